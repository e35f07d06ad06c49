"""Closed-loop admittance control around the simulated plant."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from cutmpc import log
from cutmpc.controller.admittance import ForceErrorState, control_law, reference_force
from cutmpc.controller.trial_log import TrialLog, TrialLogBuilder


if TYPE_CHECKING:
    from cutmpc.controller.gains import Gains
    from cutmpc.controller.trajectories import DesiredTrajectory
    from cutmpc.plant.simulator import Simulator


logger = log.get_logger(__name__)


def closed_loop_step(
    sim: Simulator,
    traj: DesiredTrajectory,
    gains: Gains,
    trial_log: TrialLogBuilder | None = None,
    **extra: float,
) -> ForceErrorState:
    """Compute F_r and u from the latest measurement and advance the plant one step.

    The row ``(t, p, F_s, F_r)`` logged is the one the command was computed from.
    """
    t = sim.time
    p = sim.state.p.copy()
    f_s = sim.last_force.copy()
    f_r = reference_force(p, t, traj, gains)
    u = control_law(f_s, f_r, gains)
    if trial_log is not None:
        if "cut_front" in trial_log.extra_columns:
            extra.setdefault("cut_front", sim.cut_front)
        trial_log.append(t, p, f_s, f_r, **extra)
    p_d, _ = traj.at(t)
    sim.step(u)
    return ForceErrorState(e_p=p - p_d, e_f=f_s - traj.f_d, f_r=f_r, f_s=f_s, u=u)


@dataclass
class ClosedLoopRunner:
    """Runs one admittance-controlled trial on a plant instance."""

    sim: Simulator
    traj: DesiredTrajectory
    gains: Gains
    record_cut_front: bool = False
    trial_log: TrialLogBuilder = field(init=False)

    def __post_init__(self) -> None:
        self.gains.ka_inverse()
        columns = ("cut_front",) if self.record_cut_front else ()
        self.trial_log = TrialLogBuilder(extra_columns=columns)

    def step(self) -> ForceErrorState:
        return closed_loop_step(self.sim, self.traj, self.gains, self.trial_log)

    def run(self, duration: float | None = None) -> TrialLog:
        """Run for ``duration`` seconds (default: the trajectory duration)."""
        duration = self.traj.duration if duration is None else duration
        n_steps = round(duration / self.sim.config.dt)
        for _ in range(n_steps):
            self.step()
        logger.debug(
            "Trial on %s finished after %d steps, cut front %.4f m",
            self.sim.material.name,
            n_steps,
            self.sim.cut_front,
        )
        return self.trial_log.build()
