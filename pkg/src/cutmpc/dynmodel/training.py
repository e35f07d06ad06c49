"""Three-stage training curriculum of the dynamics network.

1. autoencoder: encoder layers plus a throwaway decoder reconstruct the input
2. single-step: all dense layers predict the next block, recurrent layers frozen
3. multi-step: the whole network is unrolled over ``H_b`` blocks with its own
   predictions fed back, trained by backpropagation through time
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
import pathlib
from typing import TYPE_CHECKING

import numpy as np

from cutmpc import log
from cutmpc.cut_types import TrainingStage
from cutmpc.dynmodel.autoencoder import (
    ENCODER_PARAMS,
    init_decoder,
    reconstruction_loss,
    reconstruction_loss_and_grads,
)
from cutmpc.dynmodel.network import sequence_loss, sequence_loss_and_grads
from cutmpc.dynmodel.optim import MomentumSGD
from cutmpc.dynmodel.params import NetworkDims, NetworkParams, init_params, is_recurrent
from cutmpc.dynmodel.serialization import dump_snapshot, save_model
from cutmpc.errors import DataError, StageGateError, TrainingDivergedError, TrainingFault
from cutmpc.helpers import is_finite


if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from cutmpc.config import TrainConfig, TrainingConfig
    from cutmpc.cut_types import FloatArray
    from cutmpc.dataset.blocks import BlockSequence
    from cutmpc.dataset.collect import TrainingData


logger = log.get_logger(__name__)

METRICS_COLUMNS = ("epoch", "stage", "train_loss", "validation_loss")


@dataclass(frozen=True, slots=True)
class EpochMetrics:
    stage: TrainingStage
    epoch: int
    train_loss: float
    validation_loss: float


@dataclass
class StageResult:
    """Trained parameters and per-epoch history of one stage."""

    stage: TrainingStage
    params: NetworkParams
    history: list[EpochMetrics] = field(default_factory=list)
    initial_loss: float = float("nan")

    @property
    def final_train_loss(self) -> float:
        return self.history[-1].train_loss if self.history else self.initial_loss


@dataclass
class DivergenceMonitor:
    """Raise once the loss exceeds ``factor`` x the initial loss ``patience`` epochs in a row."""

    initial_loss: float
    factor: float = 10.0
    patience: int = 3
    _strikes: int = 0

    def update(self, loss: float, stage: TrainingStage, epoch: int) -> None:
        if loss > self.factor * self.initial_loss:
            self._strikes += 1
        else:
            self._strikes = 0
        if self._strikes >= self.patience:
            msg = (
                f"{stage} training diverged at epoch {epoch}: loss {loss:.4g} exceeded "
                f"{self.factor}x the initial loss {self.initial_loss:.4g} for "
                f"{self.patience} consecutive epochs"
            )
            raise TrainingDivergedError(msg)


def _fault(
    what: str,
    arrays: dict[str, FloatArray],
    stage: TrainingStage,
    epoch: int,
    snapshot_dir: pathlib.Path | None,
) -> TrainingFault:
    path = None
    if snapshot_dir is not None:
        path = dump_snapshot(arrays, snapshot_dir / f"fault_{stage}_epoch{epoch}.json")
    logger.error("Non-finite %s in %s training at epoch %d", what, stage, epoch)
    return TrainingFault(f"Non-finite {what} in {stage} training at epoch {epoch}", path)


def _check_stage(cfg: TrainConfig, expected: TrainingStage) -> None:
    if cfg.stage != expected:
        msg = f"Config for stage {cfg.stage} passed to the {expected} trainer"
        raise StageGateError(msg)


def _run_epochs(
    cfg: TrainConfig,
    arrays: dict[str, FloatArray],
    n_samples: int,
    batch_step: Callable[[FloatArray], tuple[float, dict[str, FloatArray]]],
    train_loss: Callable[[], float],
    validation_loss: Callable[[], float],
    frozen: Sequence[str] = (),
    snapshot_dir: pathlib.Path | None = None,
) -> tuple[list[EpochMetrics], float]:
    """Shared SGD loop over shuffled minibatch indices."""
    rng = np.random.default_rng(cfg.seed)
    optimizer = MomentumSGD(cfg.learning_rate, cfg.momentum, cfg.grad_clip, frozen=frozen)
    initial = train_loss()
    if not is_finite(initial):
        raise _fault("initial loss", arrays, cfg.stage, 0, snapshot_dir)
    monitor = DivergenceMonitor(initial, cfg.divergence_factor, cfg.divergence_patience)
    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n_samples)
        losses = []
        for start in range(0, n_samples, cfg.batch_size):
            loss, grads = batch_step(order[start : start + cfg.batch_size])
            if not is_finite(loss, *grads.values()):
                raise _fault("loss or gradient", arrays, cfg.stage, epoch, snapshot_dir)
            optimizer.step(arrays, grads)
            losses.append(loss)
        metrics = EpochMetrics(cfg.stage, epoch, float(np.mean(losses)), validation_loss())
        if not is_finite(metrics.train_loss, metrics.validation_loss):
            raise _fault("loss", arrays, cfg.stage, epoch, snapshot_dir)
        history.append(metrics)
        logger.debug(
            "%s epoch %d: train %.6g, validation %.6g",
            cfg.stage,
            epoch,
            metrics.train_loss,
            metrics.validation_loss,
        )
        monitor.update(metrics.train_loss, cfg.stage, epoch)
    logger.info(
        "%s stage finished: train loss %.6g -> %.6g, validation %.6g",
        cfg.stage,
        initial,
        history[-1].train_loss,
        history[-1].validation_loss,
    )
    return history, initial


def _samples(sequences: Sequence[BlockSequence]) -> FloatArray:
    return np.concatenate([s.x for s in sequences])


def stage1_autoencoder_train(
    data: TrainingData,
    cfg: TrainConfig,
    params: NetworkParams | None = None,
    *,
    dims: NetworkDims | None = None,
    snapshot_dir: pathlib.Path | None = None,
) -> StageResult:
    """Initialize the encoder by minimizing the per-timestep reconstruction error.

    Minibatches are drawn over blocks; each block contributes its M timesteps.
    """
    _check_stage(cfg, TrainingStage.AUTOENCODER)
    if params is None:
        params = init_params(dims or NetworkDims(block_size=data.block_size), cfg.seed)
    params = params.copy()
    arrays = {k: params.arrays[k] for k in ENCODER_PARAMS} | init_decoder(params, cfg.seed)
    train_blocks = _samples(data.train)
    val_blocks = _samples(data.validation) if data.validation else train_blocks

    def flat(blocks: FloatArray) -> FloatArray:
        return blocks.reshape(-1, blocks.shape[-1])

    history, initial = _run_epochs(
        cfg,
        arrays,
        len(train_blocks),
        lambda idx: reconstruction_loss_and_grads(arrays, flat(train_blocks[idx])),
        lambda: reconstruction_loss(arrays, flat(train_blocks)),
        lambda: reconstruction_loss(arrays, flat(val_blocks)),
        snapshot_dir=snapshot_dir,
    )
    for name in ENCODER_PARAMS:
        params.arrays[name] = arrays[name]
    return StageResult(TrainingStage.AUTOENCODER, params, history, initial)


def windows(sequences: Sequence[BlockSequence], n_steps: int) -> list[tuple[int, int]]:
    """All ``(sequence index, start block)`` pairs with ``n_steps`` consecutive blocks."""
    return [(i, s) for i, seq in enumerate(sequences) for s in range(len(seq) - n_steps + 1)]


def gather(
    sequences: Sequence[BlockSequence],
    index: Sequence[tuple[int, int]],
    n_steps: int,
    warmup_steps: int,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Stack windows into time-major arrays ``x (T, B, M, 4)``, ``v``, ``targets``."""
    x = np.stack([sequences[i].x[s : s + n_steps] for i, s in index], axis=1)
    v = np.stack([sequences[i].v[s : s + n_steps] for i, s in index], axis=1)
    target = np.stack(
        [sequences[i].target[s + warmup_steps : s + n_steps] for i, s in index], axis=1
    )
    return x, v, target


def windowed_mse(
    params: NetworkParams,
    sequences: Sequence[BlockSequence],
    horizon: int,
    warmup_steps: int = 0,
) -> float:
    """Prediction MSE over every window of ``warmup_steps + horizon`` blocks."""
    n_steps = warmup_steps + horizon
    index = windows(sequences, n_steps)
    if not index:
        msg = f"No sequence holds {n_steps} consecutive blocks"
        raise DataError(msg)
    return sequence_loss(params, *gather(sequences, index, n_steps, warmup_steps), warmup_steps)


def persistence_mse(sequences: Sequence[BlockSequence]) -> float:
    """MSE of predicting each block's relative positions as the next block's."""
    errors = [seq.target - seq.x[..., :2] for seq in sequences]
    return float(np.mean(np.concatenate(errors) ** 2))


def _sequence_stage(
    data: TrainingData,
    cfg: TrainConfig,
    params: NetworkParams,
    horizon: int,
    warmup_steps: int,
    frozen: Sequence[str],
    snapshot_dir: pathlib.Path | None,
) -> StageResult:
    params = params.copy()
    n_steps = warmup_steps + horizon
    index = windows(data.train, n_steps)
    if not index:
        msg = f"No training trial holds {n_steps} consecutive blocks"
        raise DataError(msg)
    validation = data.validation or data.train

    def batch_step(idx: FloatArray) -> tuple[float, dict[str, FloatArray]]:
        batch = [index[int(i)] for i in idx]
        return sequence_loss_and_grads(
            params, *gather(data.train, batch, n_steps, warmup_steps), warmup_steps
        )

    history, initial = _run_epochs(
        cfg,
        params.arrays,
        len(index),
        batch_step,
        lambda: windowed_mse(params, data.train, horizon, warmup_steps),
        lambda: windowed_mse(params, validation, horizon, warmup_steps),
        frozen=frozen,
        snapshot_dir=snapshot_dir,
    )
    return StageResult(cfg.stage, params, history, initial)


def stage2_single_step_train(
    data: TrainingData,
    cfg: TrainConfig,
    params: NetworkParams,
    *,
    snapshot_dir: pathlib.Path | None = None,
) -> StageResult:
    """Train every dense layer on one-block prediction; recurrent weights stay untouched."""
    _check_stage(cfg, TrainingStage.SINGLE_STEP)
    frozen = [name for name in params.names() if is_recurrent(name)]
    return _sequence_stage(data, cfg, params, 1, 0, frozen, snapshot_dir)


def stage3_multi_step_train(
    data: TrainingData,
    cfg: TrainConfig,
    params: NetworkParams,
    *,
    snapshot_dir: pathlib.Path | None = None,
) -> StageResult:
    """Train the full network on unrolled ``H_b``-block rollouts after a measured warm-up."""
    _check_stage(cfg, TrainingStage.MULTI_STEP)
    return _sequence_stage(
        data, cfg, params, cfg.horizon_blocks, cfg.warmup_blocks, (), snapshot_dir
    )


def write_metrics_csv(history: Sequence[EpochMetrics], path: str | pathlib.Path) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for m in history:
            writer.writerow([m.epoch, m.stage, repr(m.train_loss), repr(m.validation_loss)])
    return path


def read_metrics_csv(path: str | pathlib.Path) -> list[EpochMetrics]:
    with pathlib.Path(path).open(newline="", encoding="utf-8") as f:
        return [
            EpochMetrics(
                stage=TrainingStage(row["stage"]),
                epoch=int(row["epoch"]),
                train_loss=float(row["train_loss"]),
                validation_loss=float(row["validation_loss"]),
            )
            for row in csv.DictReader(f)
        ]


def checkpoint_path(model_dir: str | pathlib.Path, stage: TrainingStage) -> pathlib.Path:
    return pathlib.Path(model_dir) / f"stage{stage.index}.json"


def train_curriculum(
    data: TrainingData,
    cfg: TrainingConfig,
    model_dir: str | pathlib.Path,
    *,
    start: TrainingStage = TrainingStage.AUTOENCODER,
    stop: TrainingStage = TrainingStage.MULTI_STEP,
    params: NetworkParams | None = None,
) -> NetworkParams:
    """Run stages ``start..stop``, writing a checkpoint and metrics CSV per stage.

    Args:
        data: Normalized training and validation sequences
        cfg: Training section of the run configuration
        model_dir: Directory of checkpoints and metrics
        start: First stage to run
        stop: Last stage to run
        params: Parameters of the checkpoint preceding ``start``

    Raises:
        StageGateError: If ``start`` is not the first stage and ``params`` is missing
    """
    model_dir = pathlib.Path(model_dir)
    if start.previous is not None and params is None:
        msg = f"Stage {start.index} ({start}) requires the stage {start.index - 1} checkpoint"
        raise StageGateError(msg)
    dims = NetworkDims(
        block_size=data.block_size,
        hidden_units=cfg.hidden_units,
        latent_dim=cfg.latent_dim,
        rnn_units=cfg.rnn_units,
    )
    snapshots = model_dir / "snapshots"
    for stage in TrainingStage:
        if not start.index <= stage.index <= stop.index:
            continue
        stage_cfg = cfg.stage_config(stage)
        match stage:
            case TrainingStage.AUTOENCODER:
                result = stage1_autoencoder_train(
                    data, stage_cfg, params, dims=dims, snapshot_dir=snapshots
                )
            case TrainingStage.SINGLE_STEP:
                assert params is not None
                result = stage2_single_step_train(data, stage_cfg, params, snapshot_dir=snapshots)
            case TrainingStage.MULTI_STEP:
                assert params is not None
                result = stage3_multi_step_train(data, stage_cfg, params, snapshot_dir=snapshots)
        params = result.params
        save_model(params, data.stats, checkpoint_path(model_dir, stage), stage)
        write_metrics_csv(result.history, model_dir / f"metrics_stage{stage.index}.csv")
    _combine_metrics(model_dir)
    assert params is not None
    return params


def _combine_metrics(model_dir: pathlib.Path) -> None:
    history = []
    for stage in TrainingStage:
        path = model_dir / f"metrics_stage{stage.index}.csv"
        if path.exists():
            history.extend(read_metrics_csv(path))
    write_metrics_csv(history, model_dir / "metrics.csv")
