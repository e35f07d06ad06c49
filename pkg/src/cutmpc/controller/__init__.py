"""Admittance controller, collection trajectories and trial logs."""

from __future__ import annotations

from cutmpc.controller.admittance import ForceErrorState, control_law, reference_force
from cutmpc.controller.gains import Gains
from cutmpc.controller.runner import ClosedLoopRunner, closed_loop_step
from cutmpc.controller.trajectories import DesiredTrajectory, quintic_descent, triangular_saw
from cutmpc.controller.trial_log import BASE_COLUMNS, TrialLog, TrialLogBuilder


__all__ = [
    "BASE_COLUMNS",
    "ClosedLoopRunner",
    "DesiredTrajectory",
    "ForceErrorState",
    "Gains",
    "TrialLog",
    "TrialLogBuilder",
    "closed_loop_step",
    "control_law",
    "quintic_descent",
    "reference_force",
    "triangular_saw",
]
