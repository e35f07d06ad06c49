"""Cutting-rate comparison, force-critical scenario and reports."""

from __future__ import annotations

from cutmpc.evaluation.comparison import (
    CONTROLLERS,
    BaselineTuning,
    CellSummary,
    ComparisonReport,
    baseline_grid,
    run_comparison,
    tune_baseline,
)
from cutmpc.evaluation.controllers import (
    BaselineController,
    BaselineSetting,
    CuttingController,
    MpcController,
)
from cutmpc.evaluation.force_critical import (
    ForceCriticalAssessment,
    assess,
    core_band,
    force_critical_scenario,
)
from cutmpc.evaluation.report import emit_report
from cutmpc.evaluation.results import TrialResult, cutting_rate, max_reference_force


__all__ = [
    "CONTROLLERS",
    "BaselineController",
    "BaselineSetting",
    "BaselineTuning",
    "CellSummary",
    "ComparisonReport",
    "CuttingController",
    "ForceCriticalAssessment",
    "MpcController",
    "TrialResult",
    "assess",
    "baseline_grid",
    "core_band",
    "cutting_rate",
    "emit_report",
    "force_critical_scenario",
    "max_reference_force",
    "run_comparison",
    "tune_baseline",
]
