"""Command line: ``cutmpc collect|train|run|eval``.

Every command resolves the run configuration from defaults, ``--config``,
``section.key=value`` overrides and the ``--seed`` / ``--out`` flags (in that
order of precedence), writes its artifacts below the output directory and
copies the resolved configuration into it as ``config.json``.
"""

from __future__ import annotations

from collections.abc import Callable
import functools
import pathlib
from typing import Annotated

import typer

from cutmpc import log
from cutmpc.config import RunConfig, load_config
from cutmpc.cut_types import TrainingStage
from cutmpc.dataset import DatasetManifest, collect_dataset, load_training_data
from cutmpc.dynmodel import checkpoint_path, load_model, train_curriculum
from cutmpc.errors import CutMpcError, DataError, StageGateError
from cutmpc.evaluation import (
    MpcController,
    emit_report,
    force_critical_scenario,
    run_comparison,
)
from cutmpc.mpc import LearnedDynamics


logger = log.get_logger(__name__)

app = typer.Typer(
    name="cutmpc",
    help="Learned-dynamics MPC for cutting on a simulated contact plant.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOption = Annotated[
    pathlib.Path | None,
    typer.Option("--config", "-c", help="TOML configuration file.", dir_okay=False),
]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Global seed.")]
OutOption = Annotated[
    pathlib.Path | None,
    typer.Option("--out", "-o", help="Artifact directory.", file_okay=False),
]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")]
Overrides = Annotated[
    list[str] | None,
    typer.Argument(help="Config overrides as section.key=value.", show_default=False),
]


def _exit_on_error[**P, R](func: Callable[P, R]) -> Callable[P, R]:
    """Turn cutmpc errors into a message on stderr and their category's exit code."""

    @functools.wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        try:
            return func(*args, **kwargs)
        except CutMpcError as e:
            logger.debug("Command failed", exc_info=True)
            typer.echo(f"Error: {e}", err=True)
            raise typer.Exit(code=e.exit_code) from e

    return wrapper


def _setup(
    config_path: pathlib.Path | None,
    overrides: list[str] | None,
    seed: int | None,
    out: pathlib.Path | None,
    verbose: bool,
) -> RunConfig:
    log.configure(verbose)
    return load_config(config_path, overrides, seed=seed, out_dir=out)


def dataset_dir(config: RunConfig) -> pathlib.Path:
    return config.out_dir / "dataset"


def model_dir(config: RunConfig) -> pathlib.Path:
    return config.out_dir / "model"


def model_path(config: RunConfig) -> pathlib.Path:
    """The deployable model: the multi-step checkpoint."""
    return checkpoint_path(model_dir(config), TrainingStage.MULTI_STEP)


def _load_model(config: RunConfig) -> LearnedDynamics:
    return LearnedDynamics.load(model_path(config), block_size=config.dataset.block_size)


@app.command()
@_exit_on_error
def collect(
    overrides: Overrides = None,
    config_path: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Run seeded admittance-control trials on the training materials."""
    config = _setup(config_path, overrides, seed, out, verbose)
    target = dataset_dir(config)
    manifest = collect_dataset(config, target)
    config.write_snapshot(target)
    n_samples = sum(e.n_samples for e in manifest.trials)
    typer.echo(f"{len(manifest.trials)} trials, {n_samples} samples -> {target}")


@app.command()
@_exit_on_error
def train(
    overrides: Overrides = None,
    stage: Annotated[
        int | None,
        typer.Option(
            "--stage",
            min=1,
            max=3,
            help="Run only this stage, starting from the previous stage's checkpoint.",
        ),
    ] = None,
    config_path: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Train the dynamics model through the three-stage curriculum."""
    config = _setup(config_path, overrides, seed, out, verbose)
    target = model_dir(config)
    start, stop = TrainingStage.AUTOENCODER, TrainingStage.MULTI_STEP
    params = None
    if stage is not None:
        start = stop = TrainingStage.from_index(stage)
        if start.previous is not None:
            previous = checkpoint_path(target, start.previous)
            if not previous.exists():
                msg = f"Stage {stage} ({start}) requires the checkpoint {previous}"
                raise StageGateError(msg)
            params, _, _ = load_model(previous, required_stage=start.previous)
    data = load_training_data(dataset_dir(config))
    if data.block_size != config.dataset.block_size:
        msg = (
            f"Dataset block size {data.block_size} differs from the configured "
            f"{config.dataset.block_size}"
        )
        raise DataError(msg)
    config.write_snapshot(target)
    train_curriculum(data, config.training, target, start=start, stop=stop, params=params)
    typer.echo(f"Stages {start.index}..{stop.index} -> {target}")


@app.command()
@_exit_on_error
def run(
    material: Annotated[str, typer.Option("--material", "-m", help="Material preset label.")],
    overrides: Overrides = None,
    config_path: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Deploy the trained MPC for one cutting episode."""
    config = _setup(config_path, overrides, seed, out, verbose)
    spec = config.registry().get(material)
    model = _load_model(config)
    result = MpcController(config, model).run(spec, config.seed)
    target = config.out_dir / "run"
    config.write_snapshot(target)
    result.log.write_csv(target / result.file_name)
    typer.echo(
        f"material={result.material} completed={'yes' if result.completed else 'no'} "
        f"stop={result.stop_reason} rate={result.cutting_rate!r} m/s "
        f"peak_force={result.peak_force:.3f} N time={result.elapsed:.2f} s"
    )


@app.command("eval")
@_exit_on_error
def evaluate(
    overrides: Overrides = None,
    materials: Annotated[
        str | None,
        typer.Option("--materials", help="Comma-separated material labels to compare."),
    ] = None,
    n_trials: Annotated[
        int | None, typer.Option("--trials", "-n", help="Paired trials per material.")
    ] = None,
    config_path: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Compare MPC against the tuned baseline and write the report."""
    config = _setup(config_path, overrides, seed, out, verbose)
    labels = (
        [m.strip() for m in materials.split(",") if m.strip()]
        if materials
        else list(config.evaluation.materials)
    )
    registry = config.registry()
    for label in labels:
        registry.get(label)
    model = _load_model(config)
    manifest = None
    if (dataset_dir(config) / "manifest.json").exists():
        manifest = DatasetManifest.load(dataset_dir(config))
    report = run_comparison(
        labels,
        n_trials or config.evaluation.n_trials,
        config,
        model,
        manifest=manifest,
    )
    force_critical = force_critical_scenario(config, model)
    target = config.out_dir / "report"
    config.write_snapshot(target)
    emit_report(report, target, force_critical)
    for material, winner in report.wins().items():
        typer.echo(f"{material}: {winner or 'tie'}")
    _, assessment = force_critical
    typer.echo(
        f"force-critical {config.evaluation.force_critical_material}: "
        f"{'passed' if assessment.passed else 'failed'} -> {target}"
    )


if __name__ == "__main__":
    app()
