"""Randomized admittance-controlled data collection."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import pathlib
from typing import TYPE_CHECKING

import numpy as np

from cutmpc import log
from cutmpc.controller import ClosedLoopRunner, DesiredTrajectory, Gains, TrialLog
from cutmpc.dataset.blocks import BlockSequence, blockify
from cutmpc.dataset.manifest import DatasetManifest, TrialEntry, split
from cutmpc.dataset.normalization import NormStats, fit_norm_stats, normalize_sequence
from cutmpc.helpers import derive_seed
from cutmpc.plant import Simulator


if TYPE_CHECKING:
    from collections.abc import Sequence

    from cutmpc.config import CollectConfig, PlantConfig, RunConfig
    from cutmpc.plant import MaterialSpec


logger = log.get_logger(__name__)


def sample_trial_setup(
    rng: np.random.Generator,
    cfg: CollectConfig,
    material: MaterialSpec,
    plant: PlantConfig,
) -> tuple[Gains, DesiredTrajectory]:
    """Draw per-axis gains, saw period and descent duration for one trial."""
    gains = Gains(kp=rng.uniform(*cfg.kp_range, size=2), ka=rng.uniform(*cfg.ka_range, size=2))
    traj = DesiredTrajectory(
        z_start=material.top(plant.table_z) + plant.start_clearance,
        z_end=plant.table_z - cfg.descent_overshoot,
        descent_duration=float(rng.uniform(*cfg.descent_duration_range)),
        saw_center=material.saw_center,
        saw_range=cfg.saw_range,
        saw_period=float(rng.uniform(*cfg.saw_period_range)),
        settle_time=cfg.settle_time,
        f_d=np.asarray(cfg.desired_force, dtype=np.float64),
    )
    return gains, traj


def run_collection_trial(
    material: MaterialSpec,
    gains: Gains,
    traj: DesiredTrajectory,
    plant: PlantConfig,
) -> TrialLog:
    runner = ClosedLoopRunner(Simulator(material, plant), traj, gains)
    return runner.run()


@dataclass(frozen=True)
class _TrialJob:
    index: int
    material: MaterialSpec
    seed: int


def collect_dataset(config: RunConfig, out_dir: str | pathlib.Path) -> DatasetManifest:
    """Run the collection trials, write one CSV per trial and the manifest.

    Trial ``i`` uses material ``materials[i % len(materials)]`` and a seed derived
    from the global seed, so the files only depend on the configuration.
    """
    out_dir = pathlib.Path(out_dir)
    cfg = config.collect
    registry = config.registry()
    jobs = [
        _TrialJob(
            index=i,
            material=registry.get(cfg.materials[i % len(cfg.materials)]),
            seed=derive_seed(config.seed, "collect", i),
        )
        for i in range(cfg.trials)
    ]

    def run(job: _TrialJob) -> TrialEntry:
        rng = np.random.default_rng(job.seed)
        gains, traj = sample_trial_setup(rng, cfg, job.material, config.plant)
        plant = config.plant.model_copy(update={"rng_seed": job.seed})
        trial_log = run_collection_trial(job.material, gains, traj, plant)
        trial_id = f"trial_{job.index:04d}"
        rel_file = f"trials/{trial_id}.csv"
        trial_log.write_csv(out_dir / rel_file)
        logger.debug("Wrote %s (%s, %d samples)", rel_file, job.material.name, len(trial_log))
        return TrialEntry(
            trial_id=trial_id,
            file=rel_file,
            material=job.material.name,
            seed=job.seed,
            kp=(float(gains.kp[0]), float(gains.kp[1])),
            ka=(float(gains.ka[0]), float(gains.ka[1])),
            saw_period=traj.saw_period,
            descent_duration=traj.descent_duration,
            n_samples=len(trial_log),
        )

    with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
        entries = list(pool.map(run, jobs))

    manifest = DatasetManifest(
        block_size=config.dataset.block_size,
        split_seed=config.dataset.split_seed,
        train_fraction=config.dataset.train_fraction,
        control_channel=config.dataset.control_channel,
        trials=entries,
        held_out=list(config.evaluation.held_out),
    )
    manifest.check_held_out(config.evaluation.held_out)
    train, validation = split(manifest)
    blocks = [
        b
        for e in train
        for b in blockify(
            TrialLog.read_csv(out_dir / e.file), manifest.block_size, manifest.control_channel
        )
    ]
    stats = fit_norm_stats(blocks, computed_over=f"{out_dir.name}:train")
    manifest = manifest.model_copy(
        update={
            "train_trials": [e.trial_id for e in train],
            "validation_trials": [e.trial_id for e in validation],
            "norm_stats": stats,
        }
    )
    manifest.save(out_dir)
    n_samples = sum(e.n_samples for e in entries)
    logger.info(
        "Collected %d trials (%d samples) over %s into %s",
        len(entries),
        n_samples,
        manifest.materials(),
        out_dir,
    )
    return manifest


@dataclass(frozen=True)
class TrainingData:
    """Normalized block sequences of both splits plus their statistics."""

    train: list[BlockSequence]
    validation: list[BlockSequence]
    stats: NormStats
    block_size: int

    @property
    def n_train_blocks(self) -> int:
        return sum(len(s) for s in self.train)


def _sequences(
    directory: pathlib.Path,
    entries: Sequence[TrialEntry],
    manifest: DatasetManifest,
    stats: NormStats,
) -> list[BlockSequence]:
    sequences = []
    for e in entries:
        trial_log = TrialLog.read_csv(directory / e.file)
        blocks = blockify(trial_log, manifest.block_size, manifest.control_channel)
        sequences.append(normalize_sequence(BlockSequence.from_blocks(blocks, e.trial_id), stats))
    return sequences


def load_training_data(directory: str | pathlib.Path) -> TrainingData:
    """Read a collected dataset and normalize both splits with the training statistics.

    Raises:
        DataError: If the manifest or a trial file is missing or malformed
    """
    directory = pathlib.Path(directory)
    manifest = DatasetManifest.load(directory)
    if manifest.norm_stats is None:
        stats = fit_norm_stats(
            [
                b
                for e in manifest.entries(manifest.train_trials)
                for b in blockify(
                    TrialLog.read_csv(directory / e.file),
                    manifest.block_size,
                    manifest.control_channel,
                )
            ],
            computed_over=f"{directory.name}:train",
        )
    else:
        stats = manifest.norm_stats
    return TrainingData(
        train=_sequences(directory, manifest.entries(manifest.train_trials), manifest, stats),
        validation=_sequences(
            directory, manifest.entries(manifest.validation_trials), manifest, stats
        ),
        stats=stats,
        block_size=manifest.block_size,
    )
