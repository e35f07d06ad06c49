"""Controllers compared in the evaluation."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from cutmpc import log
from cutmpc.controller import ClosedLoopRunner, DesiredTrajectory, Gains, reference_force
from cutmpc.evaluation.results import TrialResult
from cutmpc.mpc import deploy_loop, episode_stop_reason
from cutmpc.plant import Simulator


if TYPE_CHECKING:
    from cutmpc.config import RunConfig
    from cutmpc.cut_types import ControllerLabel
    from cutmpc.mpc import BlockDynamics
    from cutmpc.plant import MaterialSpec


logger = log.get_logger(__name__)


@dataclass(frozen=True)
class BaselineSetting:
    """One point of the baseline tuning grid."""

    kp: float
    ka: float
    saw_period: float
    descent_duration: float

    def gains(self) -> Gains:
        return Gains.uniform(self.kp, self.ka)

    def trajectory(self, sim: Simulator, config: RunConfig) -> DesiredTrajectory:
        """Fixed descent from the start pose to just below the table, sawing throughout."""
        return DesiredTrajectory(
            z_start=float(sim.state.p[1]),
            z_end=config.plant.table_z - config.collect.descent_overshoot,
            descent_duration=self.descent_duration,
            saw_center=sim.material.saw_center,
            saw_range=config.collect.saw_range,
            saw_period=self.saw_period,
            f_d=np.asarray(config.collect.desired_force, dtype=np.float64),
        )


class CuttingController(ABC):
    """A controller that can run one cutting episode."""

    label: ClassVar[ControllerLabel]

    def __init__(self, config: RunConfig) -> None:
        self.config = config

    def simulator(self, material: MaterialSpec, seed: int) -> Simulator:
        plant = self.config.plant.model_copy(update={"rng_seed": seed})
        return Simulator(material, plant)

    @abstractmethod
    def run(self, material: MaterialSpec, seed: int) -> TrialResult:
        """Run one episode with plant noise seed ``seed``."""


class BaselineController(CuttingController):
    """Admittance controller following a fixed, per-material tuned trajectory."""

    label = "baseline"

    def __init__(self, config: RunConfig, setting: BaselineSetting) -> None:
        super().__init__(config)
        self.setting = setting

    def run(self, material: MaterialSpec, seed: int) -> TrialResult:
        sim = self.simulator(material, seed)
        traj = self.setting.trajectory(sim, self.config)
        runner = ClosedLoopRunner(sim, traj, self.setting.gains(), record_cut_front=True)
        reason = episode_stop_reason(sim, sim.last_force, self.config.deploy)
        while reason is None:
            runner.step()
            reason = episode_stop_reason(sim, sim.last_force, self.config.deploy)
        f_r = reference_force(sim.state.p, sim.time, traj, runner.gains)
        runner.trial_log.append(
            sim.time, sim.state.p, sim.last_force, f_r, cut_front=sim.cut_front
        )
        return TrialResult.from_log(
            runner.trial_log.build(),
            material=material.name,
            controller=self.label,
            seed=seed,
            stop_reason=reason,
            top=material.top(self.config.plant.table_z),
        )


class MpcController(CuttingController):
    """Random-shooting MPC on the learned dynamics."""

    label = "mpc"

    def __init__(self, config: RunConfig, model: BlockDynamics) -> None:
        super().__init__(config)
        self.model = model

    def run(self, material: MaterialSpec, seed: int) -> TrialResult:
        sim = self.simulator(material, seed)
        mpc_cfg = self.config.mpc.model_copy(update={"seed": seed})
        result = deploy_loop(
            sim,
            self.model,
            np.asarray(self.config.deploy.ka),
            mpc_cfg,
            self.config.deploy,
        )
        return TrialResult.from_log(
            result.log,
            material=material.name,
            controller=self.label,
            seed=seed,
            stop_reason=result.stop_reason,
            top=material.top(self.config.plant.table_z),
        )

