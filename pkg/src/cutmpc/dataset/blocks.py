"""Non-overlapping time blocks with relative positions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from cutmpc.errors import InsufficientHistoryError


if TYPE_CHECKING:
    from collections.abc import Sequence

    from cutmpc.controller.trial_log import TrialLog
    from cutmpc.cut_types import ControlChannel, FloatArray


@dataclass(frozen=True, slots=True)
class Block:
    """M timesteps of one trial, paired with the next block as target.

    ``x`` holds relative positions and sensed forces, ``v`` the control forces of
    the block being predicted and ``target`` its relative positions.
    """

    x: FloatArray
    v: FloatArray
    target: FloatArray
    block_index: int

    @property
    def block_size(self) -> int:
        return len(self.x)


def block_anchors(positions: FloatArray, block_size: int) -> FloatArray:
    """Reference position of every complete block.

    Block 0 is anchored at the first sample, block b at the last sample of block b-1.
    """
    n_blocks = len(positions) // block_size
    anchors = np.empty((n_blocks, positions.shape[1]))
    anchors[0] = positions[0]
    if n_blocks > 1:
        anchors[1:] = positions[block_size - 1 : (n_blocks - 1) * block_size : block_size]
    return anchors


def relative_positions(positions: FloatArray, block_size: int) -> FloatArray:
    """Positions of the complete blocks relative to their anchors, shape (n_blocks, M, 2)."""
    n_blocks = len(positions) // block_size
    blocks = positions[: n_blocks * block_size].reshape(n_blocks, block_size, -1)
    return blocks - block_anchors(positions, block_size)[:, None, :]


def reconstruct_positions(relative: FloatArray, start: FloatArray) -> FloatArray:
    """Invert :func:`relative_positions` given the trial's first position."""
    out = np.empty_like(relative)
    anchor = np.asarray(start, dtype=np.float64)
    for b, rel in enumerate(relative):
        out[b] = anchor + rel
        anchor = out[b, -1]
    return out.reshape(-1, relative.shape[-1])


def measured_block(positions: FloatArray, forces: FloatArray, anchor: FloatArray) -> FloatArray:
    """Build the ``x`` array of a block from raw samples and its anchor position."""
    return np.hstack([positions - anchor, forces])


def blockify(
    trial_log: TrialLog, block_size: int, control: ControlChannel = "sensed"
) -> list[Block]:
    """Split a trial log into blocks; the trailing remainder is dropped.

    Args:
        trial_log: One recorded trial
        block_size: Timesteps per block (M)
        control: Logged column copied into ``v``: the sensed forces, or the
                 reference forces the admittance law was commanded with

    Raises:
        InsufficientHistoryError: If the log is shorter than two blocks
    """
    if block_size < 1:
        msg = f"Block size must be at least 1, got {block_size}"
        raise ValueError(msg)
    n = len(trial_log)
    if n < 2 * block_size:
        msg = f"Trial log of {n} samples is shorter than two blocks of {block_size}"
        raise InsufficientHistoryError(msg)
    rel = relative_positions(trial_log.p, block_size)
    n_blocks = len(rel)
    forces = trial_log.f_s[: n_blocks * block_size].reshape(n_blocks, block_size, 2)
    column = trial_log.f_r if control == "reference" else trial_log.f_s
    controls = column[: n_blocks * block_size].reshape(n_blocks, block_size, 2)
    return [
        Block(
            x=np.hstack([rel[b], forces[b]]),
            v=controls[b + 1].copy(),
            target=rel[b + 1].copy(),
            block_index=b,
        )
        for b in range(n_blocks - 1)
    ]


@dataclass(frozen=True, slots=True)
class BlockSequence:
    """Consecutive blocks of one trial stacked into arrays."""

    x: FloatArray
    """Shape (n, M, 4)."""

    v: FloatArray
    """Shape (n, M, 2)."""

    target: FloatArray
    """Shape (n, M, 2)."""

    trial_id: str = ""

    def __len__(self) -> int:
        return len(self.x)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Block], trial_id: str = "") -> BlockSequence:
        return cls(
            x=np.stack([b.x for b in blocks]),
            v=np.stack([b.v for b in blocks]),
            target=np.stack([b.target for b in blocks]),
            trial_id=trial_id,
        )
