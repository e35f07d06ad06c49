"""Baseline tuning and the paired cutting-rate comparison."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import itertools
from typing import TYPE_CHECKING, get_args

from cutmpc import log
from cutmpc.cut_types import ControllerLabel
from cutmpc.errors import ConfigurationError
from cutmpc.evaluation.controllers import BaselineController, BaselineSetting, MpcController
from cutmpc.evaluation.results import mean_std


if TYPE_CHECKING:
    from collections.abc import Sequence

    from cutmpc.config import RunConfig
    from cutmpc.dataset.manifest import DatasetManifest
    from cutmpc.evaluation.controllers import CuttingController
    from cutmpc.evaluation.results import TrialResult
    from cutmpc.mpc import BlockDynamics
    from cutmpc.plant import MaterialSpec


logger = log.get_logger(__name__)

CONTROLLERS: tuple[ControllerLabel, ...] = get_args(ControllerLabel)


@dataclass(frozen=True)
class BaselineTuning:
    """Result of the baseline grid search on one material."""

    material: str
    setting: BaselineSetting
    rate: float
    grid: list[tuple[BaselineSetting, float]]


def baseline_grid(config: RunConfig) -> list[BaselineSetting]:
    ev = config.evaluation
    return [
        BaselineSetting(kp=kp, ka=ka, saw_period=period, descent_duration=duration)
        for kp, ka, period, duration in itertools.product(
            ev.kp_grid, ev.ka_grid, ev.saw_period_grid, ev.descent_duration_grid
        )
    ]


def tune_baseline(material: MaterialSpec, config: RunConfig) -> BaselineTuning:
    """Grid search of the fixed-trajectory baseline for the highest cutting rate.

    Every grid point runs once with the tuning seed; ties keep the earliest point.
    """
    grid = []
    for setting in baseline_grid(config):
        result = BaselineController(config, setting).run(material, config.evaluation.tuning_seed)
        grid.append((setting, result.cutting_rate))
    best, rate = grid[0]
    for setting, r in grid[1:]:
        if r > rate:
            best, rate = setting, r
    logger.info("Tuned baseline for %s: %s (%.5f m/s)", material.name, best, rate)
    return BaselineTuning(material.name, best, rate, grid)


@dataclass(frozen=True)
class CellSummary:
    """Statistics of one (material, controller) cell."""

    material: str
    controller: ControllerLabel
    held_out: bool
    n_trials: int
    mean_rate: float
    std_rate: float
    n_completed: int


@dataclass
class ComparisonReport:
    """Paired comparison of both controllers over all materials."""

    materials: list[str]
    seeds: list[int]
    held_out: list[str]
    results: list[TrialResult]
    tunings: dict[str, BaselineTuning] = field(default_factory=dict)

    def cell(self, material: str, controller: ControllerLabel) -> list[TrialResult]:
        return [r for r in self.results if r.material == material and r.controller == controller]

    def summaries(self) -> list[CellSummary]:
        rows = []
        for material in self.materials:
            for controller in CONTROLLERS:
                cell = self.cell(material, controller)
                mean, std = mean_std([r.cutting_rate for r in cell])
                rows.append(
                    CellSummary(
                        material=material,
                        controller=controller,
                        held_out=material in self.held_out,
                        n_trials=len(cell),
                        mean_rate=mean,
                        std_rate=std,
                        n_completed=sum(r.completed for r in cell),
                    )
                )
        return rows

    def winner(self, material: str) -> ControllerLabel | None:
        """Controller with the strictly higher mean rate, None on a tie."""
        means = {
            c: mean_std([r.cutting_rate for r in self.cell(material, c)])[0] for c in CONTROLLERS
        }
        if means["mpc"] > means["baseline"]:
            return "mpc"
        if means["baseline"] > means["mpc"]:
            return "baseline"
        return None

    def wins(self) -> dict[str, ControllerLabel | None]:
        return {m: self.winner(m) for m in self.materials}


def run_comparison(
    materials: Sequence[str],
    n_trials: int,
    config: RunConfig,
    model: BlockDynamics,
    *,
    seeds: Sequence[int] | None = None,
    manifest: DatasetManifest | None = None,
) -> ComparisonReport:
    """Run ``n_trials`` paired episodes per material for both controllers.

    Repetition ``i`` uses plant seed ``seeds[i]`` for both controllers.

    Raises:
        ConfigurationError: If fewer than 5 trials per cell are requested
        HeldOutLeakError: If a held-out material appears in the training manifest
    """
    if n_trials < 5:  # noqa: PLR2004
        msg = f"At least 5 trials per cell are required, got {n_trials}"
        raise ConfigurationError(msg)
    seeds = list(seeds) if seeds is not None else [config.seed + i for i in range(n_trials)]
    if len(seeds) != n_trials:
        msg = f"Expected {n_trials} seeds, got {len(seeds)}"
        raise ConfigurationError(msg)
    if manifest is not None:
        manifest.check_held_out(config.evaluation.held_out)
    elif config.evaluation.held_out:
        logger.warning(
            "No training manifest given, cannot verify that %s stayed out of training",
            config.evaluation.held_out,
        )
    registry = config.registry()
    specs = [registry.get(m) for m in materials]
    tunings = {spec.name: tune_baseline(spec, config) for spec in specs}
    controllers: dict[tuple[str, ControllerLabel], CuttingController] = {}
    for spec in specs:
        controllers[spec.name, "baseline"] = BaselineController(config, tunings[spec.name].setting)
        controllers[spec.name, "mpc"] = MpcController(config, model)
    jobs = [
        (spec, controller, seed)
        for spec in specs
        for controller in CONTROLLERS
        for seed in seeds
    ]

    def run(job: tuple[MaterialSpec, ControllerLabel, int]) -> TrialResult:
        spec, controller, seed = job
        return controllers[spec.name, controller].run(spec, seed)

    with ThreadPoolExecutor(max_workers=config.evaluation.max_workers) as pool:
        results = list(pool.map(run, jobs))
    report = ComparisonReport(
        materials=[s.name for s in specs],
        seeds=seeds,
        held_out=[m for m in config.evaluation.held_out if m in materials],
        results=results,
        tunings=tunings,
    )
    for summary in report.summaries():
        logger.info(
            "%s/%s: rate %.5f +- %.5f m/s, %d/%d completed",
            summary.material,
            summary.controller,
            summary.mean_rate,
            summary.std_rate,
            summary.n_completed,
            summary.n_trials,
        )
    return report
