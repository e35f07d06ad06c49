"""Per-channel standardization of block data."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from pydantic import ConfigDict, Field
from schemez import Schema

from cutmpc import log
from cutmpc.dataset.blocks import Block, BlockSequence


if TYPE_CHECKING:
    from collections.abc import Sequence

    from cutmpc.cut_types import FloatArray


logger = log.get_logger(__name__)

CHANNELS = ("p_y", "p_z", "F_s_y", "F_s_z")
POSITION = slice(0, 2)
FORCE = slice(2, 4)


class NormStats(Schema):
    """Mean and population standard deviation of the four block channels.

    Relative positions and targets share the position statistics, the control
    channel shares the force statistics.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    mean: tuple[float, float, float, float]
    std: tuple[float, float, float, float]
    computed_over: str = ""
    """Identifier of the data the statistics were fit on."""

    degenerate: tuple[bool, bool, bool, bool] = (False, False, False, False)
    """Channels whose variance was zero; their std was replaced by 1."""

    n_samples: int = Field(0, ge=0)

    @classmethod
    def identity(cls) -> NormStats:
        return cls(mean=(0.0, 0.0, 0.0, 0.0), std=(1.0, 1.0, 1.0, 1.0), computed_over="identity")

    @property
    def mean_array(self) -> FloatArray:
        return np.asarray(self.mean, dtype=np.float64)

    @property
    def std_array(self) -> FloatArray:
        return np.asarray(self.std, dtype=np.float64)

    def normalize_x(self, x: FloatArray) -> FloatArray:
        return (x - self.mean_array) / self.std_array

    def denormalize_x(self, x: FloatArray) -> FloatArray:
        return x * self.std_array + self.mean_array

    def normalize_positions(self, p: FloatArray) -> FloatArray:
        return (p - self.mean_array[POSITION]) / self.std_array[POSITION]

    def denormalize_positions(self, p: FloatArray) -> FloatArray:
        return p * self.std_array[POSITION] + self.mean_array[POSITION]

    def normalize_forces(self, f: FloatArray) -> FloatArray:
        return (f - self.mean_array[FORCE]) / self.std_array[FORCE]

    def denormalize_forces(self, f: FloatArray) -> FloatArray:
        return f * self.std_array[FORCE] + self.mean_array[FORCE]


def fit_norm_stats(blocks: Sequence[Block], computed_over: str = "") -> NormStats:
    """Fit per-channel statistics over every timestep of the given blocks.

    Raises:
        ValueError: If no blocks are given
    """
    if not blocks:
        msg = "Cannot fit normalization statistics on an empty training set"
        raise ValueError(msg)
    samples = np.concatenate([b.x for b in blocks])
    mean = samples.mean(axis=0)
    std = samples.std(axis=0)
    degenerate = std == 0
    if degenerate.any():
        names = [c for c, d in zip(CHANNELS, degenerate) if d]
        logger.warning("Zero variance in channels %s, using std = 1", names)
        std = np.where(degenerate, 1.0, std)
    return NormStats(
        mean=tuple(float(m) for m in mean),  # type: ignore[arg-type]
        std=tuple(float(s) for s in std),  # type: ignore[arg-type]
        computed_over=computed_over,
        degenerate=tuple(bool(d) for d in degenerate),  # type: ignore[arg-type]
        n_samples=len(samples),
    )


def apply_norm(block: Block, stats: NormStats) -> Block:
    return Block(
        x=stats.normalize_x(block.x),
        v=stats.normalize_forces(block.v),
        target=stats.normalize_positions(block.target),
        block_index=block.block_index,
    )


def invert_norm(block: Block, stats: NormStats) -> Block:
    return Block(
        x=stats.denormalize_x(block.x),
        v=stats.denormalize_forces(block.v),
        target=stats.denormalize_positions(block.target),
        block_index=block.block_index,
    )


def normalize_sequence(seq: BlockSequence, stats: NormStats) -> BlockSequence:
    return BlockSequence(
        x=stats.normalize_x(seq.x),
        v=stats.normalize_forces(seq.v),
        target=stats.normalize_positions(seq.target),
        trial_id=seq.trial_id,
    )
