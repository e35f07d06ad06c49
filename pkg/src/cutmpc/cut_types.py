"""Shared cutmpc types."""

from __future__ import annotations

from enum import StrEnum
from typing import Literal

import numpy as np
import numpy.typing as npt


FloatArray = npt.NDArray[np.float64]
"""Float64 array of any shape."""

ControllerLabel = Literal["baseline", "mpc"]

ControlChannel = Literal["reference", "sensed"]
"""Logged force column fed to the model as its control input during training."""


class TrainingStage(StrEnum):
    """Curriculum stages of the dynamics model, in training order."""

    AUTOENCODER = "autoencoder"
    SINGLE_STEP = "single-step"
    MULTI_STEP = "multi-step"

    @property
    def index(self) -> int:
        """1-based position in the curriculum."""
        return list(TrainingStage).index(self) + 1

    @property
    def previous(self) -> TrainingStage | None:
        """Stage whose checkpoint this stage starts from."""
        stages = list(TrainingStage)
        i = stages.index(self)
        return stages[i - 1] if i > 0 else None

    @classmethod
    def from_index(cls, index: int) -> TrainingStage:
        stages = list(cls)
        if not 1 <= index <= len(stages):
            msg = f"Stage index must be in 1..{len(stages)}, got {index}"
            raise ValueError(msg)
        return stages[index - 1]


class StopReason(StrEnum):
    """Why a closed-loop episode ended."""

    COMPLETED = "completed"
    TIMEOUT = "timeout"
    FORCE_LIMIT = "force-limit"
