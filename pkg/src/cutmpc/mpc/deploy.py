"""Online deployment: contact initialization, then one MPC tick per block."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import TYPE_CHECKING

import numpy as np

from cutmpc import log
from cutmpc.controller import (
    DesiredTrajectory,
    Gains,
    TrialLog,
    TrialLogBuilder,
    closed_loop_step,
    control_law,
)
from cutmpc.cut_types import StopReason
from cutmpc.errors import CutMpcError
from cutmpc.mpc.shooting import MpcDiagnostics, mpc_step


if TYPE_CHECKING:
    from cutmpc.config import DeployConfig, MpcConfig
    from cutmpc.cut_types import FloatArray
    from cutmpc.dynmodel.params import LatentState
    from cutmpc.mpc.model import BlockDynamics
    from cutmpc.plant.simulator import Simulator


logger = log.get_logger(__name__)

DEPLOY_COLUMNS = ("cut_front", "F_r_star_y", "F_r_star_z", "cost", "tick_wall_s")
TICK_LOG_INTERVAL = 50


@dataclass
class DeployResult:
    """Outcome of one deployment episode."""

    log: TrialLog
    stop_reason: StopReason
    n_ticks: int
    init_steps: int
    diagnostics: list[MpcDiagnostics] = field(default_factory=list)
    ceiling_steps: int = 0
    """Plant steps whose upward command was dropped at the workspace ceiling."""

    @property
    def completed(self) -> bool:
        return self.stop_reason is StopReason.COMPLETED


def warm_latent(
    model: BlockDynamics,
    positions: FloatArray,
    forces: FloatArray,
    references: FloatArray,
    latent: LatentState | None = None,
) -> LatentState | None:
    """Advance the latent over every complete block but the last one of a measured log.

    Blocks are aligned to the end of the log and anchored at the sample preceding
    them, like the live block of :func:`current_block`. Block b is consumed with
    the reference forces of block b + 1 as control.
    """
    m = model.block_size
    n_blocks = (len(positions) - 1) // m
    if n_blocks < 2:  # noqa: PLR2004
        return latent
    offset = len(positions) - n_blocks * m
    anchors = positions[offset - 1 :: m][:n_blocks]
    rel = positions[offset:].reshape(n_blocks, m, 2) - anchors[:, None, :]
    f = forces[offset:].reshape(n_blocks, m, 2)
    r = references[offset:].reshape(n_blocks, m, 2)
    for b in range(n_blocks - 1):
        latent = model.advance(np.hstack([rel[b], f[b]]), r[b + 1], latent)
    return latent


def limit_rise(u: FloatArray, p_z: float, ceiling: float) -> FloatArray:
    """Drop the upward part of a command once the blade is at or above ``ceiling``."""
    if p_z >= ceiling and u[1] > 0:
        u = u.copy()
        u[1] = 0.0
    return u


def episode_stop_reason(sim: Simulator, f_s: FloatArray, cfg: DeployConfig) -> StopReason | None:
    """Why an episode must end now, or None to continue."""
    if sim.cut_complete(cfg.completion_tolerance):
        return StopReason.COMPLETED
    if np.max(np.abs(f_s)) > cfg.force_limit:
        return StopReason.FORCE_LIMIT
    if sim.time >= cfg.timeout - 1e-9:
        return StopReason.TIMEOUT
    return None


def _init_trajectory(sim: Simulator, cfg: DeployConfig) -> DesiredTrajectory:
    z0 = float(sim.state.p[1])
    return DesiredTrajectory(
        z_start=z0,
        z_end=z0 - cfg.init_descent,
        descent_duration=max(cfg.init_duration, sim.config.dt),
        saw_center=sim.material.saw_center,
        saw_range=cfg.saw_range,
        saw_period=cfg.init_saw_period,
    )


def deploy_loop(
    sim: Simulator,
    model: BlockDynamics,
    ka: FloatArray,
    mpc_cfg: MpcConfig,
    deploy_cfg: DeployConfig,
    *,
    keep_diagnostics: bool = False,
) -> DeployResult:
    """Run one episode on ``sim`` until the cut completes, times out or exceeds the force limit.

    The first ``init_duration`` seconds use the collection controller with a slow
    descent. Afterwards one MPC tick chooses F_r* every M plant steps and the inner
    loop applies ``u = K_a (F_s - F_r*)``, without upward motion once the blade is
    ``max_rise`` above its start pose.

    Raises:
        CutMpcError: Plant or model faults, logged and re-raised
    """
    rng = np.random.default_rng(mpc_cfg.seed)
    m = model.block_size
    nan = math.nan
    trial_log = TrialLogBuilder(extra_columns=DEPLOY_COLUMNS)
    init_gains = Gains(kp=np.asarray(deploy_cfg.init_kp), ka=np.asarray(ka))
    mpc_gains = Gains(kp=np.zeros(2), ka=np.asarray(ka))
    traj = _init_trajectory(sim, deploy_cfg)
    ceiling = float(sim.state.p[1]) + deploy_cfg.max_rise
    diagnostics: list[MpcDiagnostics] = []
    positions: list[FloatArray] = []
    forces: list[FloatArray] = []
    references: list[FloatArray] = []
    no_tick = {"F_r_star_y": nan, "F_r_star_z": nan, "cost": nan, "tick_wall_s": nan}

    def record_measurement() -> None:
        positions.append(sim.state.p.copy())
        forces.append(sim.last_force.copy())

    def history() -> tuple[FloatArray, FloatArray]:
        """Logged samples plus the current, not yet logged, measurement."""
        return (
            np.array([*positions, sim.state.p]),
            np.array([*forces, sim.last_force]),
        )

    # the first tick needs one complete block of history
    f_star: FloatArray | None = None
    init_steps = max(round(deploy_cfg.init_duration / sim.config.dt), m - 1)
    n_ticks = 0
    ceiling_steps = 0
    reason: StopReason | None = None
    try:
        for _ in range(init_steps):
            record_measurement()
            state = closed_loop_step(sim, traj, init_gains, trial_log, **no_tick)
            references.append(state.f_r)
            reason = episode_stop_reason(sim, sim.last_force, deploy_cfg)
            if reason is not None:
                break
        pending = references[-1] if references else np.zeros(2)
        latent = warm_latent(
            model, *history(), np.array([*references, pending]), model.initial_latent()
        )
        while reason is None:
            f_star, diag, latent = mpc_step(
                model,
                *history(),
                latent,
                mpc_cfg,
                rng,
                previous_force=f_star,
            )
            n_ticks += 1
            if keep_diagnostics:
                diagnostics.append(diag)
            if n_ticks % TICK_LOG_INTERVAL == 0:
                logger.info(
                    "t=%.1f s: tick %d, cut front %.4f m, F_r*=(%.2f, %.2f)",
                    sim.time,
                    n_ticks,
                    sim.cut_front,
                    f_star[0],
                    f_star[1],
                )
            for _ in range(m):
                record_measurement()
                f_s = sim.last_force.copy()
                trial_log.append(
                    sim.time,
                    sim.state.p,
                    f_s,
                    f_star,
                    cut_front=sim.cut_front,
                    F_r_star_y=f_star[0],
                    F_r_star_z=f_star[1],
                    cost=diag.winner.cost,
                    tick_wall_s=diag.wall_time,
                )
                u = control_law(f_s, f_star, mpc_gains)
                limited = limit_rise(u, float(sim.state.p[1]), ceiling)
                if limited is not u:
                    ceiling_steps += 1
                sim.step(limited)
                reason = episode_stop_reason(sim, sim.last_force, deploy_cfg)
                if reason is not None:
                    break
    except CutMpcError:
        logger.exception("Deployment on %s failed at t=%.2f s", sim.material.name, sim.time)
        raise
    assert reason is not None
    last = np.full(2, nan) if f_star is None else f_star
    trial_log.append(
        sim.time,
        sim.state.p,
        sim.last_force,
        last,
        cut_front=sim.cut_front,
        F_r_star_y=last[0],
        F_r_star_z=last[1],
        cost=nan,
        tick_wall_s=nan,
    )
    if reason is StopReason.FORCE_LIMIT:
        logger.warning(
            "Stopped %s at t=%.2f s: sensed force %s exceeds %.1f N",
            sim.material.name,
            sim.time,
            sim.last_force,
            deploy_cfg.force_limit,
        )
    logger.info(
        "Episode on %s ended (%s) after %.2f s, %d ticks, cut front %.4f m",
        sim.material.name,
        reason,
        sim.time,
        n_ticks,
        sim.cut_front,
    )
    if ceiling_steps:
        logger.info(
            "Held %s at the workspace ceiling z=%.3f m for %d steps",
            sim.material.name,
            ceiling,
            ceiling_steps,
        )
    return DeployResult(
        trial_log.build(), reason, n_ticks, init_steps, diagnostics, ceiling_steps
    )
