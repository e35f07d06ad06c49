"""Per-trial outcomes and the cutting-rate metric."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import TYPE_CHECKING

import numpy as np


if TYPE_CHECKING:
    from cutmpc.controller import TrialLog
    from cutmpc.cut_types import ControllerLabel, StopReason


def cutting_rate(trial_log: TrialLog, top: float) -> float:
    """Depth cut per second: ``(top - final cut front) / elapsed``.

    The log's last row is the final state, so its time is the elapsed time.
    """
    elapsed = float(trial_log.t[-1])
    if elapsed <= 0:
        return 0.0
    return max(0.0, (top - float(trial_log.extra["cut_front"][-1])) / elapsed)


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one evaluation episode."""

    material: str
    controller: ControllerLabel
    seed: int
    stop_reason: StopReason
    elapsed: float
    cutting_rate: float
    final_cut_front: float
    peak_force: float
    """Largest componentwise sensed force magnitude (N)."""

    log: TrialLog

    @property
    def completed(self) -> bool:
        return self.stop_reason == "completed"

    @property
    def cut_time(self) -> float | None:
        """Elapsed time of a completed cut."""
        return self.elapsed if self.completed else None

    @property
    def file_name(self) -> str:
        return f"trial_{self.material}_{self.controller}_{self.seed}.csv"

    @classmethod
    def from_log(
        cls,
        trial_log: TrialLog,
        *,
        material: str,
        controller: ControllerLabel,
        seed: int,
        stop_reason: StopReason,
        top: float,
    ) -> TrialResult:
        return cls(
            material=material,
            controller=controller,
            seed=seed,
            stop_reason=stop_reason,
            elapsed=float(trial_log.t[-1]),
            cutting_rate=cutting_rate(trial_log, top),
            final_cut_front=float(trial_log.extra["cut_front"][-1]),
            peak_force=float(np.max(np.abs(trial_log.f_s))),
            log=trial_log,
        )


def max_reference_force(trial_log: TrialLog) -> float:
    """Largest componentwise MPC reference force in a deploy log (0 without ticks)."""
    columns = [trial_log.extra[c] for c in ("F_r_star_y", "F_r_star_z") if c in trial_log.extra]
    if not columns:
        return 0.0
    values = np.abs(np.concatenate(columns))
    return 0.0 if np.all(np.isnan(values)) else float(np.nanmax(values))


def mean_std(values: list[float]) -> tuple[float, float]:
    """Mean and population standard deviation (NaN for no values)."""
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())
