"""Configuration models for every pipeline stage.

A run is driven by one TOML file with one table per section::

    seed = 7

    [plant]
    dt = 0.01

    [mpc]
    candidates = 256

Precedence: built-in defaults < config file < ``section.key=value`` overrides <
explicit command-line flags.
"""

from __future__ import annotations

import math
import pathlib
import tomllib
from typing import Any, Self

from platformdirs import user_data_dir
from pydantic import ConfigDict, Field, ValidationError, model_validator
from schemez import Schema

from cutmpc import log
from cutmpc.cut_types import ControlChannel, TrainingStage
from cutmpc.errors import ConfigurationError
from cutmpc.helpers import derive_seed, parse_override, set_nested
from cutmpc.plant.materials import MaterialRegistry, default_registry


logger = log.get_logger(__name__)

DEFAULT_OUT_DIR = pathlib.Path(user_data_dir("cutmpc", "cutmpc")) / "runs"

TRAINING_MATERIALS = [
    "cake",
    "cucumber",
    "zucchini",
    "cheese",
    "bell-pepper",
    "hollow-pepper",
    "lemon",
]
HELD_OUT_MATERIALS = ["potato", "carrot"]
DERIVED_SEEDS = (("dataset", "split_seed"), ("training", "seed"), ("mpc", "seed"))

Interval = tuple[float, float]
Pair = tuple[float, float]


class Section(Schema):
    """Base for config sections: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)


def _ordered(name: str, interval: Interval) -> None:
    if interval[0] > interval[1]:
        msg = f"{name} must be an ordered interval, got {interval}"
        raise ValueError(msg)


class PlantConfig(Section):
    """Simulated 2-axis contact plant."""

    dt: float = Field(0.01, gt=0)
    """Plant step (s)."""

    actuator_tau: float = Field(0.02, ge=0)
    """First-order velocity lag time constant (s); 0 is an ideal actuator."""

    v_ref: float = Field(0.005, gt=0)
    """Velocity scale of the smoothed Coulomb law (m/s)."""

    table_z: float = 0.0
    """Height of the table top (m)."""

    rng_seed: int = 0
    """Seed of the sensor noise."""

    penetration_max: float = Field(0.002, gt=0)
    """Maximum depth the blade may press into uncut material or the table (m)."""

    table_stiffness: float = Field(20000.0, ge=0)
    """Contact stiffness of the table top (N/m)."""

    sensor_bias: Pair = (0.0, 0.0)
    """Constant offset added to every force reading (N)."""

    start_clearance: float = Field(0.005, ge=0)
    """Initial blade height above the object's top surface (m)."""


class CollectConfig(Section):
    """Randomized admittance-controlled cutting trials."""

    trials: int = Field(210, ge=2)
    """Number of trials, spread round-robin over ``materials``."""

    materials: list[str] = Field(default_factory=lambda: list(TRAINING_MATERIALS), min_length=1)
    """Material labels used for data collection."""

    ka_range: Interval = (0.02, 0.15)
    """Per-axis uniform range of the compliance gain ((m/s)/N)."""

    kp_range: Interval = (0.0, 2.0)
    """Per-axis uniform range of the stiffness gain (1/s)."""

    saw_range: float = Field(0.04, ge=0)
    """Peak-to-peak sawing amplitude, constant for every trial (m)."""

    saw_period_range: Interval = (0.5, 2.0)
    """Uniform range of the sawing period (s)."""

    descent_duration_range: Interval = (2.0, 5.0)
    """Uniform range of the quintic descent duration (s)."""

    descent_overshoot: float = Field(0.002, ge=0)
    """How far below the table top the descent target lies (m)."""

    settle_time: float = Field(0.5, ge=0)
    """Recording time after the descent has finished (s)."""

    desired_force: Pair = (0.0, 0.0)
    """Desired force F_d during collection (N)."""

    max_workers: int | None = None
    """Thread pool size for parallel trials."""

    @model_validator(mode="after")
    def _check_ranges(self) -> Self:
        _ordered("ka_range", self.ka_range)
        _ordered("kp_range", self.kp_range)
        _ordered("saw_period_range", self.saw_period_range)
        _ordered("descent_duration_range", self.descent_duration_range)
        if self.ka_range[0] <= 0:
            msg = "ka_range must be strictly positive"
            raise ValueError(msg)
        if self.kp_range[0] < 0:
            msg = "kp_range must be non-negative"
            raise ValueError(msg)
        if self.saw_period_range[0] <= 0 or self.descent_duration_range[0] <= 0:
            msg = "Periods and durations must be positive"
            raise ValueError(msg)
        return self


class DatasetConfig(Section):
    """Block representation and split."""

    block_size: int = Field(10, ge=1)
    """Timesteps per block (M)."""

    train_fraction: float = Field(0.8, gt=0, lt=1)
    """Fraction of trials used for training; the rest is validation."""

    split_seed: int = 0
    """Seed of the trial-level split; derived from the global seed unless set."""

    control_channel: ControlChannel = "reference"
    """Logged force used as the model's control input. ``reference`` matches what
    the MPC commands; ``sensed`` assumes the admittance law tracks F_r instantly."""


class TrainConfig(Section):
    """Optimizer settings of one curriculum stage."""

    stage: TrainingStage
    """Stage these settings apply to."""

    learning_rate: float = Field(gt=0)
    """SGD step size."""

    epochs: int = Field(ge=1)
    """Passes over the training set."""

    batch_size: int = Field(32, ge=1)
    """Sequences per minibatch."""

    horizon_blocks: int = Field(5, ge=1)
    """Blocks per unrolled horizon (H_b); only used by the multi-step stage."""

    warmup_blocks: int = Field(5, ge=0)
    """Measured blocks fed before each rollout; only used by the multi-step stage."""

    seed: int = 0
    """Seed of initialization and minibatch shuffling."""

    grad_clip: float = Field(5.0, gt=0)
    """Global gradient norm threshold."""

    momentum: float = Field(0.9, ge=0, lt=1)
    """SGD momentum."""

    divergence_factor: float = Field(10.0, gt=1)
    """Loss growth over the initial loss counted as divergent."""

    divergence_patience: int = Field(3, ge=1)
    """Consecutive divergent epochs before aborting."""


class StageSettings(Section):
    learning_rate: float = Field(gt=0)
    epochs: int = Field(ge=1)
    batch_size: int = Field(32, ge=1)


class TrainingConfig(Section):
    """Network dimensions and the three-stage curriculum."""

    hidden_units: int = Field(32, ge=1)
    """Width of the hidden dense layers."""

    latent_dim: int = Field(3, ge=1)
    """Per-timestep latent features produced by the encoder."""

    rnn_units: int = Field(30, ge=1)
    """Units of each recurrent layer."""

    horizon_blocks: int = Field(5, ge=1)
    """Unrolled horizon of the multi-step stage (H_b)."""

    warmup_blocks: int = Field(5, ge=0)
    """Measured blocks fed before each multi-step rollout to warm up the latent."""

    grad_clip: float = Field(5.0, gt=0)
    """Global gradient norm threshold."""

    momentum: float = Field(0.9, ge=0, lt=1)
    """SGD momentum."""

    seed: int = 0
    """Seed of initialization and shuffling; derived from the global seed unless set."""

    autoencoder: StageSettings = StageSettings(learning_rate=1e-3, epochs=50)
    single_step: StageSettings = StageSettings(learning_rate=1e-3, epochs=100)
    multi_step: StageSettings = StageSettings(learning_rate=3e-4, epochs=100)

    def stage_config(self, stage: TrainingStage) -> TrainConfig:
        """Resolve the optimizer settings of one stage."""
        settings = {
            TrainingStage.AUTOENCODER: self.autoencoder,
            TrainingStage.SINGLE_STEP: self.single_step,
            TrainingStage.MULTI_STEP: self.multi_step,
        }[stage]
        return TrainConfig(
            stage=stage,
            learning_rate=settings.learning_rate,
            epochs=settings.epochs,
            batch_size=settings.batch_size,
            horizon_blocks=self.horizon_blocks,
            warmup_blocks=self.warmup_blocks,
            seed=self.seed + stage.index,
            grad_clip=self.grad_clip,
            momentum=self.momentum,
        )


class MpcConfig(Section):
    """Random-shooting receding-horizon controller."""

    candidates: int = Field(128, ge=1)
    """Candidate reference forces per tick (K)."""

    horizon_blocks: int = Field(5, ge=1)
    """Prediction horizon in blocks (H_b)."""

    force_amp: float = Field(8.0, gt=0)
    """Componentwise bound of the uniform candidate distribution (N)."""

    c_cut: float = Field(50.0, ge=0)
    """Weight of the squared height above the table."""

    c_saw: float = Field(10.0, ge=0)
    """Weight of the squared lateral distance to the sawing center."""

    c_v: float = Field(1e-4, ge=0)
    """Weight of the squared reference force."""

    p_table: float = 0.0
    """Table height the cut should reach (m)."""

    p_center: float = 0.0
    """Center of the sawing motion (m)."""

    control_rate: float = Field(10.0, gt=0)
    """Ticks per second (Hz)."""

    seed: int = 0
    """Seed of the candidate sampler; derived from the global seed unless set."""


class DeployConfig(Section):
    """Online deployment loop around the MPC."""

    ka: Pair = (0.05, 0.05)
    """Compliance gain of the inverse damping law during MPC ((m/s)/N)."""

    init_duration: float = Field(1.5, ge=0)
    """Contact-initialization phase driven by the collection controller (s)."""

    init_descent: float = Field(0.01, ge=0)
    """Descent commanded during the initialization phase (m)."""

    init_kp: Pair = (1.0, 1.0)
    """Stiffness gain during the initialization phase (1/s)."""

    init_saw_period: float = Field(1.0, gt=0)
    """Sawing period during the initialization phase (s)."""

    saw_range: float = Field(0.04, ge=0)
    """Peak-to-peak sawing range during the initialization phase (m)."""

    timeout: float = Field(60.0, gt=0)
    """Simulated seconds before an episode is stopped."""

    force_limit: float = Field(50.0, gt=0)
    """Componentwise sensed force magnitude that stops an episode (N)."""

    completion_tolerance: float = Field(1e-3, ge=0)
    """Cut is complete once the cut front is this close to the table (m)."""

    max_rise: float = Field(0.02, ge=0)
    """Height above the start pose beyond which upward commands are dropped (m)."""


class EvaluationConfig(Section):
    """Cutting-rate comparison and force-critical scenario."""

    materials: list[str] = Field(
        default_factory=lambda: [*TRAINING_MATERIALS, *HELD_OUT_MATERIALS],
        min_length=1,
    )
    """Materials of the comparison."""

    held_out: list[str] = Field(default_factory=lambda: list(HELD_OUT_MATERIALS))
    """Materials that must never appear in the training manifest."""

    n_trials: int = Field(5, ge=5)
    """Paired trials per (material, controller) cell."""

    max_workers: int | None = None
    """Thread pool size for parallel trials."""

    kp_grid: tuple[float, ...] = (1.0, 2.0)
    """Baseline tuning grid of the stiffness gain (both axes)."""

    ka_grid: tuple[float, ...] = (0.02, 0.05)
    """Baseline tuning grid of the compliance gain (both axes)."""

    saw_period_grid: tuple[float, ...] = (0.5, 1.0)
    """Baseline tuning grid of the sawing period."""

    descent_duration_grid: tuple[float, ...] = (4.0, 8.0)
    """Baseline tuning grid of the descent duration."""

    tuning_seed: int = 0
    """Plant seed of the tuning simulations."""

    stall_window: float = Field(3.0, gt=0)
    """Window after core contact inspected for a stall (s)."""

    stall_threshold: float = Field(5e-4, gt=0)
    """Cut-front progress below which the window counts as stalled (m)."""

    force_critical_material: str = "carrot"
    """Material of the force-critical scenario."""


class RunConfig(Schema):
    """Complete configuration of one pipeline run."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    """Global seed.

    Collection trials derive their seeds from it, evaluation trial ``i`` uses
    ``seed + i`` and the split, training and candidate seeds are derived from it
    unless their section sets them explicitly.
    """

    out_dir: pathlib.Path = DEFAULT_OUT_DIR
    """Root of all artifacts."""

    plant: PlantConfig = PlantConfig()
    collect: CollectConfig = CollectConfig()
    dataset: DatasetConfig = DatasetConfig()
    training: TrainingConfig = TrainingConfig()
    mpc: MpcConfig = MpcConfig()
    deploy: DeployConfig = DeployConfig()
    evaluation: EvaluationConfig = EvaluationConfig()

    materials: dict[str, dict[str, Any]] = Field(default_factory=dict)
    """Per-material field overrides (``[materials.<label>]`` tables)."""

    @model_validator(mode="before")
    @classmethod
    def _derive_section_seeds(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        try:
            seed = int(data.get("seed", 0))
        except (TypeError, ValueError):
            return data
        data = dict(data)
        for section, key in DERIVED_SEEDS:
            value = data.get(section)
            if isinstance(value, Section):
                if key not in value.model_fields_set:
                    data[section] = value.model_copy(
                        update={key: derive_seed(seed, section, key)}
                    )
            elif value is None or isinstance(value, dict):
                table = dict(value or {})
                table.setdefault(key, derive_seed(seed, section, key))
                data[section] = table
        return data

    @model_validator(mode="after")
    def _check_consistency(self) -> Self:
        block_time = self.dataset.block_size * self.plant.dt
        if not math.isclose(block_time, 1.0 / self.mpc.control_rate, rel_tol=1e-9):
            msg = (
                f"One MPC tick must span one block: block_size * dt = {block_time} s, "
                f"1 / control_rate = {1.0 / self.mpc.control_rate} s"
            )
            raise ValueError(msg)
        if self.mpc.horizon_blocks != self.training.horizon_blocks:
            logger.debug(
                "MPC horizon (%d) differs from training horizon (%d)",
                self.mpc.horizon_blocks,
                self.training.horizon_blocks,
            )
        leaked = set(self.collect.materials) & set(self.evaluation.held_out)
        if leaked:
            msg = f"Held-out materials listed for collection: {sorted(leaked)}"
            raise ValueError(msg)
        return self

    def registry(self) -> MaterialRegistry:
        """Material presets with this run's overrides applied."""
        return default_registry().with_overrides(self.materials)

    def snapshot(self) -> str:
        """JSON snapshot of the resolved configuration."""
        return self.model_dump_json(indent=2)

    def write_snapshot(self, directory: pathlib.Path) -> pathlib.Path:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "config.json"
        path.write_text(self.snapshot() + "\n", encoding="utf-8")
        return path


def load_config(
    path: str | pathlib.Path | None = None,
    overrides: list[str] | None = None,
    *,
    seed: int | None = None,
    out_dir: str | pathlib.Path | None = None,
) -> RunConfig:
    """Build a run configuration from defaults, a TOML file, overrides and flags.

    Args:
        path: Optional TOML config file
        overrides: ``section.key=value`` items applied after the file
        seed: Global seed flag, wins over file and overrides
        out_dir: Output directory flag, wins over file and overrides

    Raises:
        ConfigurationError: If the file cannot be read or any value is invalid
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            with pathlib.Path(path).open("rb") as f:
                data = tomllib.load(f)
        except (OSError, tomllib.TOMLDecodeError) as e:
            msg = f"Cannot read config file {path}: {e}"
            raise ConfigurationError(msg) from e
    for item in overrides or []:
        try:
            key_path, value = parse_override(item)
            set_nested(data, key_path, value)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e
    if seed is not None:
        data["seed"] = seed
    if out_dir is not None:
        data["out_dir"] = str(out_dir)
    try:
        config = RunConfig.model_validate(data)
        config.registry()
    except ValidationError as e:
        msg = f"Invalid configuration: {e}"
        raise ConfigurationError(msg) from e
    unknown = [
        m
        for m in [*config.collect.materials, *config.evaluation.materials]
        if m not in config.registry().materials
    ]
    if unknown:
        msg = f"Unknown materials in config: {unknown}. Valid: {config.registry().labels()}"
        raise ConfigurationError(msg)
    logger.debug("Loaded config (seed=%d, out_dir=%s)", config.seed, config.out_dir)
    return config
