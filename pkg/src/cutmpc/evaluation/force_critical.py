"""Force-critical scenario: the blade meets an uncuttable core.

After the cut front reaches the top of the core the episode is inspected for a
stall and for two retreat indicators of the learned policy:

- releasing: the mean of ``F_s_z - F_r*_z`` after core contact is >= 0, i.e. the
  velocity command on the cutting axis is net upward
- lateral: the mean ``|F_r*_y|`` after core contact exceeds its mean before
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
import math
from typing import TYPE_CHECKING, Any

import numpy as np

from cutmpc import log
from cutmpc.cut_types import StopReason
from cutmpc.evaluation.controllers import MpcController


if TYPE_CHECKING:
    from cutmpc.config import RunConfig
    from cutmpc.controller import TrialLog
    from cutmpc.evaluation.results import TrialResult
    from cutmpc.mpc import BlockDynamics
    from cutmpc.plant import MaterialSpec


logger = log.get_logger(__name__)


@dataclass(frozen=True)
class ForceCriticalAssessment:
    """Measured values and pass/fail flags of the scenario."""

    core_top: float
    """Height of the top of the uncuttable band (m)."""

    core_bottom: float
    core_contact_time: float | None
    front_change: float
    """Cut-front progress within the stall window after core contact (m)."""

    stalled: bool
    passed_core: bool
    force_limit_hit: bool
    mean_force_error_z: float
    """Mean ``F_s_z - F_r*_z`` after core contact (N)."""

    mean_reference_z: float
    """Mean ``F_r*_z`` after core contact (N)."""

    lateral_before: float
    lateral_after: float
    releasing: bool
    lateral_intensified: bool

    @property
    def retreat_detected(self) -> bool:
        return self.releasing or self.lateral_intensified

    @property
    def passed(self) -> bool:
        return (
            not self.passed_core
            and not self.force_limit_hit
            and self.stalled
            and self.retreat_detected
        )

    def as_dict(self) -> dict[str, Any]:
        return asdict(self) | {"retreat_detected": self.retreat_detected, "passed": self.passed}


def core_band(material: MaterialSpec, table_z: float) -> tuple[float, float]:
    """Top and bottom height of the first uncuttable band.

    Raises:
        ValueError: If the material has no uncuttable band
    """
    bands = material.uncuttable_bands()
    if not bands:
        msg = f"Material {material.name!r} has no uncuttable band"
        raise ValueError(msg)
    start, end = bands[0]
    top = material.top(table_z)
    return top - start * material.height, top - end * material.height


def _nanmean(values: np.ndarray) -> float:
    values = values[~np.isnan(values)]
    return float(values.mean()) if len(values) else math.nan


def assess(
    trial_log: TrialLog,
    material: MaterialSpec,
    stop_reason: StopReason,
    config: RunConfig,
) -> ForceCriticalAssessment:
    """Evaluate stall and retreat indicators on a deploy log."""
    ev = config.evaluation
    core_top, core_bottom = core_band(material, config.plant.table_z)
    t = trial_log.t
    front = trial_log.extra["cut_front"]
    fr_y, fr_z = trial_log.extra["F_r_star_y"], trial_log.extra["F_r_star_z"]
    reached = np.flatnonzero(front <= core_top)
    contact_time = float(t[reached[0]]) if len(reached) else None
    if contact_time is None:
        after = np.zeros(len(t), dtype=bool)
        front_change = 0.0
    else:
        after = t >= contact_time
        window = after & (t <= contact_time + ev.stall_window)
        front_change = float(front[window][0] - front[window][-1])
    mpc = ~np.isnan(fr_z)
    before = mpc & ~after
    post = mpc & after
    force_error = _nanmean(trial_log.f_s[post, 1] - fr_z[post]) if post.any() else math.nan
    lateral_before = _nanmean(np.abs(fr_y[before])) if before.any() else math.nan
    lateral_after = _nanmean(np.abs(fr_y[post])) if post.any() else math.nan
    return ForceCriticalAssessment(
        core_top=core_top,
        core_bottom=core_bottom,
        core_contact_time=contact_time,
        front_change=front_change,
        stalled=contact_time is not None and front_change < ev.stall_threshold,
        passed_core=bool(np.any(front < core_bottom)),
        force_limit_hit=stop_reason is StopReason.FORCE_LIMIT,
        mean_force_error_z=force_error,
        mean_reference_z=_nanmean(fr_z[post]) if post.any() else math.nan,
        lateral_before=lateral_before,
        lateral_after=lateral_after,
        releasing=bool(force_error >= 0),
        lateral_intensified=bool(lateral_after > lateral_before),
    )


def force_critical_scenario(
    config: RunConfig, model: BlockDynamics, seed: int | None = None
) -> tuple[TrialResult, ForceCriticalAssessment]:
    """Run the MPC on the force-critical material and assess its behavior at the core."""
    material = config.registry().get(config.evaluation.force_critical_material)
    seed = config.seed if seed is None else seed
    result = MpcController(config, model).run(material, seed)
    assessment = assess(result.log, material, result.stop_reason, config)
    logger.info(
        "Force-critical scenario on %s: contact at %s s, stalled=%s, releasing=%s, "
        "lateral=%s (%.3f -> %.3f N)",
        material.name,
        assessment.core_contact_time,
        assessment.stalled,
        assessment.releasing,
        assessment.lateral_intensified,
        assessment.lateral_before,
        assessment.lateral_after,
    )
    return result, assessment
