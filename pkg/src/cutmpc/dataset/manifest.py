"""Versioned JSON manifest of a collected dataset."""

from __future__ import annotations

import pathlib
from typing import TYPE_CHECKING, Literal

import numpy as np
from pydantic import Field, ValidationError
from schemez import Schema

from cutmpc import log
from cutmpc.cut_types import ControlChannel
from cutmpc.dataset.normalization import NormStats
from cutmpc.errors import DataError, HeldOutLeakError


if TYPE_CHECKING:
    from collections.abc import Iterable


logger = log.get_logger(__name__)

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"


class TrialEntry(Schema):
    """One collected trial and the randomized settings that produced it."""

    trial_id: str
    file: str
    """Path of the trial CSV relative to the manifest."""

    material: str
    seed: int
    kp: tuple[float, float]
    ka: tuple[float, float]
    saw_period: float
    descent_duration: float
    n_samples: int = Field(ge=0)


class DatasetManifest(Schema):
    """Trial list, block size, split and training normalization statistics."""

    schema_version: Literal[1] = SCHEMA_VERSION
    block_size: int = Field(ge=1)
    split_seed: int
    train_fraction: float = Field(gt=0, lt=1)
    trials: list[TrialEntry]
    train_trials: list[str] = Field(default_factory=list)
    validation_trials: list[str] = Field(default_factory=list)
    held_out: list[str] = Field(default_factory=list)
    """Materials that must never be part of this dataset."""

    control_channel: ControlChannel = "reference"
    """Logged force column the blocks use as control input."""

    norm_stats: NormStats | None = None

    @property
    def validation_fraction(self) -> float:
        return 1.0 - self.train_fraction

    def materials(self) -> list[str]:
        return sorted({t.material for t in self.trials})

    def entries(self, trial_ids: Iterable[str]) -> list[TrialEntry]:
        by_id = {t.trial_id: t for t in self.trials}
        return [by_id[i] for i in trial_ids]

    def check_held_out(self, held_out: Iterable[str]) -> None:
        """Raise if any held-out material was used for training.

        Raises:
            HeldOutLeakError: If a held-out material appears in the trial list
        """
        leaked = sorted(set(held_out) & set(self.materials()))
        if leaked:
            msg = f"Held-out materials {leaked} appear in the training manifest"
            raise HeldOutLeakError(msg)

    def save(self, directory: str | pathlib.Path) -> pathlib.Path:
        path = pathlib.Path(directory) / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, directory: str | pathlib.Path) -> DatasetManifest:
        """Load the manifest of a dataset directory.

        Raises:
            DataError: If the manifest is missing or invalid
        """
        path = pathlib.Path(directory) / MANIFEST_NAME
        try:
            return cls.model_validate_json(path.read_text(encoding="utf-8"))
        except OSError as e:
            msg = f"No dataset manifest at {path}: {e}"
            raise DataError(msg) from e
        except ValidationError as e:
            msg = f"Invalid dataset manifest {path}: {e}"
            raise DataError(msg) from e


def split_indices(n_trials: int, train_fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Deterministic trial-level split; both sides get at least one trial.

    Raises:
        DataError: If fewer than two trials are given
    """
    if n_trials < 2:  # noqa: PLR2004
        msg = f"Need at least 2 trials to split, got {n_trials}"
        raise DataError(msg)
    n_train = min(max(round(train_fraction * n_trials), 1), n_trials - 1)
    order = np.random.default_rng(seed).permutation(n_trials)
    return sorted(int(i) for i in order[:n_train]), sorted(int(i) for i in order[n_train:])


def split(
    manifest: DatasetManifest, seed: int | None = None
) -> tuple[list[TrialEntry], list[TrialEntry]]:
    """Split the manifest's trials into training and validation sets."""
    seed = manifest.split_seed if seed is None else seed
    train, validation = split_indices(len(manifest.trials), manifest.train_fraction, seed)
    return [manifest.trials[i] for i in train], [manifest.trials[i] for i in validation]
