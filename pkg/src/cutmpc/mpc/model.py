"""Dynamics models usable by the shooting controller."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Protocol

import numpy as np

from cutmpc.cut_types import TrainingStage
from cutmpc.dynmodel.network import forward_block, rollout
from cutmpc.dynmodel.params import LatentState
from cutmpc.dynmodel.serialization import check_compatible, load_model


if TYPE_CHECKING:
    import pathlib

    from cutmpc.cut_types import FloatArray
    from cutmpc.dataset.normalization import NormStats
    from cutmpc.dynmodel.params import NetworkParams


class BlockDynamics(Protocol):
    """Block-granular dynamics in physical units."""

    @property
    def block_size(self) -> int: ...

    def initial_latent(self) -> LatentState | None: ...

    def predict(
        self,
        x_block: FloatArray,
        forces: FloatArray,
        horizon: int,
        latent: LatentState | None,
    ) -> FloatArray:
        """Relative positions (H_b, K, M, 2) for K constant forces (K, 2)."""
        ...

    def advance(
        self, x_block: FloatArray, v_block: FloatArray, latent: LatentState | None
    ) -> LatentState | None:
        """Latent after consuming one measured block under control ``v_block`` (M, 2)."""
        ...


@dataclass(frozen=True)
class LearnedDynamics:
    """The trained network wrapped with its normalization statistics."""

    params: NetworkParams
    stats: NormStats

    @classmethod
    def load(cls, path: str | pathlib.Path, block_size: int | None = None) -> LearnedDynamics:
        """Load a multi-step model file.

        Raises:
            StageGateError: If the file is not a multi-step checkpoint
            ModelMismatchError: If its block size differs from ``block_size``
        """
        params, stats, _ = load_model(path, required_stage=TrainingStage.MULTI_STEP)
        if block_size is not None:
            check_compatible(params, stats, block_size)
        return cls(params, stats)

    @property
    def block_size(self) -> int:
        return self.params.dims.block_size

    def initial_latent(self) -> LatentState:
        return LatentState.zeros(self.params.dims.rnn_units)

    def predict(
        self,
        x_block: FloatArray,
        forces: FloatArray,
        horizon: int,
        latent: LatentState | None,
    ) -> FloatArray:
        k, m = len(forces), self.block_size
        x = np.repeat(self.stats.normalize_x(x_block)[None], k, axis=0)
        v_norm = self.stats.normalize_forces(forces)
        v = np.broadcast_to(v_norm[None, :, None, :], (horizon, k, m, 2))
        lat = (latent or self.initial_latent()).repeat(k)
        predictions, _ = rollout(self.params, x, v, lat)
        return self.stats.denormalize_positions(predictions)

    def advance(
        self, x_block: FloatArray, v_block: FloatArray, latent: LatentState | None
    ) -> LatentState:
        _, lat = forward_block(
            self.params,
            self.stats.normalize_x(x_block),
            self.stats.normalize_forces(v_block),
            latent or self.initial_latent(),
        )
        return lat

