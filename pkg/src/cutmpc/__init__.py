"""Cutmpc: main package.

Learned-dynamics model predictive control for force-controlled cutting.
"""

from __future__ import annotations

from importlib.metadata import version

__version__ = version("cutmpc")
__title__ = "Cutmpc"

__author__ = "Philipp Temminghoff"
__author_email__ = "philipptemminghoff@googlemail.com"
__copyright__ = "Copyright (c) 2025 Philipp Temminghoff"
__license__ = "MIT"
__url__ = "https://github.com/phil65/cutmpc"

from cutmpc.config import RunConfig, load_config
from cutmpc.cut_types import ControllerLabel, StopReason, TrainingStage
from cutmpc.errors import (
    ConfigurationError,
    CutMpcError,
    DataError,
    NumericFault,
)
from cutmpc.plant import MaterialSpec, Simulator, default_registry, plant_step
from cutmpc.controller import Gains, DesiredTrajectory, TrialLog, control_law
from cutmpc.dataset import collect_dataset, load_training_data
from cutmpc.dynmodel import load_model, save_model, train_curriculum
from cutmpc.mpc import LearnedDynamics, deploy_loop, mpc_step
from cutmpc.evaluation import emit_report, force_critical_scenario, run_comparison


__all__ = [
    "ConfigurationError",
    "ControllerLabel",
    "CutMpcError",
    "DataError",
    "DesiredTrajectory",
    "Gains",
    "LearnedDynamics",
    "MaterialSpec",
    "NumericFault",
    "RunConfig",
    "Simulator",
    "StopReason",
    "TrainingStage",
    "TrialLog",
    "__version__",
    "collect_dataset",
    "control_law",
    "default_registry",
    "deploy_loop",
    "emit_report",
    "force_critical_scenario",
    "load_config",
    "load_model",
    "load_training_data",
    "mpc_step",
    "plant_step",
    "run_comparison",
    "save_model",
    "train_curriculum",
]
