"""Learned block dynamics: network, curriculum training and model files."""

from __future__ import annotations

from cutmpc.dynmodel.gradcheck import GradientSample, check_gradients, max_relative_error
from cutmpc.dynmodel.network import (
    forward_block,
    rollout,
    sequence_loss,
    sequence_loss_and_grads,
    unroll,
)
from cutmpc.dynmodel.params import (
    LatentState,
    NetworkDims,
    NetworkParams,
    init_params,
    zero_params,
)
from cutmpc.dynmodel.serialization import check_compatible, load_model, save_model
from cutmpc.dynmodel.training import (
    EpochMetrics,
    StageResult,
    checkpoint_path,
    persistence_mse,
    stage1_autoencoder_train,
    stage2_single_step_train,
    stage3_multi_step_train,
    train_curriculum,
    windowed_mse,
)


__all__ = [
    "EpochMetrics",
    "GradientSample",
    "LatentState",
    "NetworkDims",
    "NetworkParams",
    "StageResult",
    "check_compatible",
    "check_gradients",
    "checkpoint_path",
    "forward_block",
    "init_params",
    "load_model",
    "max_relative_error",
    "persistence_mse",
    "rollout",
    "save_model",
    "sequence_loss",
    "sequence_loss_and_grads",
    "stage1_autoencoder_train",
    "stage2_single_step_train",
    "stage3_multi_step_train",
    "train_curriculum",
    "unroll",
    "windowed_mse",
    "zero_params",
]
