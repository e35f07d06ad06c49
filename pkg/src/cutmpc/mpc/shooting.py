"""Random-shooting selection of the reference force."""

from __future__ import annotations

from dataclasses import dataclass
import time
from typing import TYPE_CHECKING

import numpy as np

from cutmpc import log
from cutmpc.dataset.blocks import measured_block
from cutmpc.errors import InsufficientHistoryError
from cutmpc.mpc.cost import CostBreakdown, batch_horizon_cost, horizon_cost, integrate_relative


if TYPE_CHECKING:
    from cutmpc.config import MpcConfig
    from cutmpc.cut_types import FloatArray
    from cutmpc.dynmodel.params import LatentState
    from cutmpc.mpc.model import BlockDynamics


logger = log.get_logger(__name__)


def sample_candidates(cfg: MpcConfig, rng: np.random.Generator) -> FloatArray:
    """K reference forces drawn uniformly from ``[-force_amp, force_amp]^2``."""
    return rng.uniform(-cfg.force_amp, cfg.force_amp, size=(cfg.candidates, 2))


@dataclass(frozen=True)
class Candidate:
    f_r: FloatArray
    predicted_positions: FloatArray
    """Absolute positions over the horizon, shape (H_b * M, 2)."""

    cost: float
    breakdown: CostBreakdown


@dataclass(frozen=True)
class MpcDiagnostics:
    candidates: FloatArray
    costs: FloatArray
    chosen: int
    winner: Candidate
    current_block_cost: float
    """Cost of the measured current block under the previous reference force."""

    wall_time: float
    """Seconds spent in the tick."""


def current_block(
    positions: FloatArray, forces: FloatArray, block_size: int
) -> tuple[FloatArray, FloatArray]:
    """Measured ``x`` block from the most recent samples and the latest position.

    The block is anchored at the sample preceding it, or at its own first sample
    when no earlier sample exists.

    Raises:
        InsufficientHistoryError: If fewer than ``block_size`` samples are available
    """
    n = len(positions)
    if n < block_size or len(forces) < block_size:
        msg = f"Need {block_size} measured samples to form a block, got {n}"
        raise InsufficientHistoryError(msg)
    anchor = positions[-block_size - 1] if n > block_size else positions[0]
    x = measured_block(positions[-block_size:], forces[-block_size:], anchor)
    return x, positions[-1]


def mpc_step(
    model: BlockDynamics,
    positions: FloatArray,
    forces: FloatArray,
    latent: LatentState | None,
    cfg: MpcConfig,
    rng: np.random.Generator,
    *,
    previous_force: FloatArray | None = None,
    candidates: FloatArray | None = None,
) -> tuple[FloatArray, MpcDiagnostics, LatentState | None]:
    """Choose the constant reference force minimizing the predicted horizon cost.

    Args:
        model: Block dynamics in physical units
        positions: Measured positions so far, (n, 2) with n >= M
        forces: Measured forces so far, (n, 2)
        latent: Model latent before the current block
        cfg: Shooting and cost settings
        rng: Candidate sampler
        previous_force: Reference force applied during the current block
        candidates: Explicit candidate set (K, 2) instead of sampling

    Returns:
        The winning force, the tick diagnostics and the latent advanced over the
        measured current block with the winning force.
    """
    start = time.perf_counter()
    m = model.block_size
    x, p_now = current_block(positions, forces, m)
    forces_k = sample_candidates(cfg, rng) if candidates is None else np.asarray(candidates)
    relative = model.predict(x, forces_k, cfg.horizon_blocks, latent)
    trajectories = integrate_relative(relative, p_now)
    costs, breakdown = batch_horizon_cost(trajectories, forces_k, cfg)
    chosen = int(np.argmin(costs))
    f_star = forces_k[chosen].copy()

    applied = np.zeros(2) if previous_force is None else previous_force
    current_cost, _ = horizon_cost(positions[-m:], applied, cfg)

    new_latent = model.advance(x, np.tile(f_star, (m, 1)), latent)
    winner = Candidate(
        f_r=f_star,
        predicted_positions=trajectories[chosen],
        cost=float(costs[chosen]),
        breakdown=breakdown.at(chosen),
    )
    diagnostics = MpcDiagnostics(
        candidates=forces_k,
        costs=costs,
        chosen=chosen,
        winner=winner,
        current_block_cost=current_cost,
        wall_time=time.perf_counter() - start,
    )
    logger.debug(
        "Tick: %d candidates, chose #%d F_r*=(%.3f, %.3f) cost %.6g",
        len(forces_k),
        chosen,
        f_star[0],
        f_star[1],
        winner.cost,
    )
    return f_star, diagnostics, new_latent
