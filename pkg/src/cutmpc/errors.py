"""Exception hierarchy.

Every error carries the process exit code of its category so the command line
can map failures without inspecting messages:

- 2: configuration errors
- 3: data errors (missing / malformed / inconsistent artifacts)
- 4: numeric faults (simulation integrity, training divergence)
"""

from __future__ import annotations

from typing import TYPE_CHECKING, ClassVar


if TYPE_CHECKING:
    from pathlib import Path


class CutMpcError(Exception):
    """Base class for all errors raised by cutmpc."""

    exit_code: ClassVar[int] = 1


class ConfigurationError(CutMpcError, ValueError):
    """Invalid configuration value, key or combination."""

    exit_code = 2


class UnknownMaterialError(ConfigurationError):
    """Material label not present in the registry."""

    def __init__(self, label: str, valid: list[str]) -> None:
        self.label = label
        self.valid = valid
        super().__init__(f"Unknown material {label!r}. Valid labels: {', '.join(valid)}")


class GainConfigurationError(ConfigurationError):
    """Gains that cannot be used in the admittance law (e.g. zero compliance)."""


class DataError(CutMpcError):
    """Dataset, log or model artifact is missing, malformed or inconsistent."""

    exit_code = 3


class InsufficientHistoryError(DataError):
    """Not enough measured samples to form a complete block."""


class StageGateError(DataError):
    """Training stage ordering or model stage tag violated."""


class ModelFileError(DataError):
    """Model file has the wrong format version or fails its checksum."""


class ModelMismatchError(DataError):
    """Model dimensions do not match normalization statistics or block size."""


class HeldOutLeakError(DataError):
    """A held-out material appears in the training manifest."""


class NumericFault(CutMpcError, ArithmeticError):
    """Non-finite values or divergence in simulation or training."""

    exit_code = 4


class SimulationIntegrityError(NumericFault):
    """NaN or infinite value entered the plant."""


class TrainingFault(NumericFault):
    """Non-finite loss or gradients during training."""

    def __init__(self, message: str, snapshot_path: Path | None = None) -> None:
        self.snapshot_path = snapshot_path
        if snapshot_path is not None:
            message = f"{message} (parameter snapshot: {snapshot_path})"
        super().__init__(message)


class TrainingDivergedError(TrainingFault):
    """Loss exceeded 10x its initial value for three consecutive epochs."""
