"""Cutting and sawing cost of predicted trajectories.

For absolute positions ``p_k`` over all ``H_b * M`` predicted timesteps and a
constant reference force ``F``::

    C = c_cut * sum (p_z,k - p_table)^2 + p_z,last
      + c_saw * sum (p_y,k - p_center)^2 + c_v * sum ||F||^2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np


if TYPE_CHECKING:
    from cutmpc.config import MpcConfig
    from cutmpc.cut_types import FloatArray


@dataclass(frozen=True, slots=True)
class CostBreakdown:
    """Terms of the horizon cost; arrays of shape (K,) for batched evaluation."""

    cut: FloatArray | float
    terminal: FloatArray | float
    saw: FloatArray | float
    input: FloatArray | float

    @property
    def total(self) -> FloatArray | float:
        return self.cut + self.terminal + self.saw + self.input

    def at(self, index: int) -> CostBreakdown:
        return CostBreakdown(
            cut=float(np.asarray(self.cut)[index]),
            terminal=float(np.asarray(self.terminal)[index]),
            saw=float(np.asarray(self.saw)[index]),
            input=float(np.asarray(self.input)[index]),
        )


def integrate_relative(relative: FloatArray, p_now: FloatArray) -> FloatArray:
    """Absolute positions from predicted relative blocks.

    Block ``i`` is relative to the last absolute position of block ``i - 1``; the
    first block is relative to ``p_now``.

    Args:
        relative: Shape (H_b, ..., M, 2)
        p_now: Latest measured position (2,)

    Returns:
        Absolute positions, shape (..., H_b * M, 2).
    """
    last = relative[:, ..., -1:, :]
    offsets = np.cumsum(last, axis=0) - last
    absolute = np.asarray(p_now, dtype=np.float64) + offsets + relative
    absolute = np.moveaxis(absolute, 0, -3)
    return absolute.reshape(*absolute.shape[:-3], -1, absolute.shape[-1])


def batch_horizon_cost(
    positions: FloatArray, forces: FloatArray, cfg: MpcConfig
) -> tuple[FloatArray, CostBreakdown]:
    """Costs of K trajectories; positions (K, N, 2), forces (K, 2)."""
    n = positions.shape[1]
    cut = cfg.c_cut * np.sum((positions[..., 1] - cfg.p_table) ** 2, axis=1)
    terminal = positions[:, -1, 1].copy()
    saw = cfg.c_saw * np.sum((positions[..., 0] - cfg.p_center) ** 2, axis=1)
    control = cfg.c_v * n * np.sum(forces**2, axis=1)
    breakdown = CostBreakdown(cut=cut, terminal=terminal, saw=saw, input=control)
    return np.asarray(breakdown.total), breakdown


def horizon_cost(
    positions: FloatArray, force: FloatArray, cfg: MpcConfig
) -> tuple[float, CostBreakdown]:
    """Cost of one trajectory of absolute positions (N, 2) under constant force (2,)."""
    costs, breakdown = batch_horizon_cost(
        np.asarray(positions, dtype=np.float64)[None],
        np.asarray(force, dtype=np.float64)[None],
        cfg,
    )
    return float(costs[0]), breakdown.at(0)
