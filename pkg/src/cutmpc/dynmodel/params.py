"""Network dimensions, parameters and latent state.

Layer wiring (M = block size, all hidden nonlinearities tanh)::

    x (M x 4) -en1-> M x hidden -en2-> M x latent -flatten-> rnn1 -> rnn2 -> h2
    x (4M)    -state-> s
    v (2M)    -input-> c
    [h2, s, c] -out1-> hidden -out2-> M x 2

``en1``/``en2`` are applied to every timestep with shared weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import TYPE_CHECKING

import numpy as np
from pydantic import ConfigDict, Field
from schemez import Schema

from cutmpc.errors import ModelMismatchError


if TYPE_CHECKING:
    from cutmpc.cut_types import FloatArray


STATE_DIM = 4
POSITION_DIM = 2
FORCE_DIM = 2

DENSE_LAYERS = ("en1", "en2", "state", "input", "out1", "out2")
RECURRENT_LAYERS = ("rnn1", "rnn2")


class NetworkDims(Schema):
    """Layer sizes of the dynamics network."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    block_size: int = Field(10, ge=1)
    hidden_units: int = Field(32, ge=1)
    latent_dim: int = Field(3, ge=1)
    rnn_units: int = Field(30, ge=1)

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Shape of every parameter array, in canonical order."""
        m, h, lat, r = self.block_size, self.hidden_units, self.latent_dim, self.rnn_units
        concat = r + 2 * h
        return {
            "en1_w": (STATE_DIM, h),
            "en1_b": (h,),
            "en2_w": (h, lat),
            "en2_b": (lat,),
            "rnn1_wx": (m * lat, r),
            "rnn1_wh": (r, r),
            "rnn1_b": (r,),
            "rnn2_wx": (r, r),
            "rnn2_wh": (r, r),
            "rnn2_b": (r,),
            "state_w": (STATE_DIM * m, h),
            "state_b": (h,),
            "input_w": (FORCE_DIM * m, h),
            "input_b": (h,),
            "out1_w": (concat, h),
            "out1_b": (h,),
            "out2_w": (h, POSITION_DIM * m),
            "out2_b": (POSITION_DIM * m,),
        }

    def parameter_count(self) -> int:
        """Analytic parameter count from the layer dimensions."""
        m, h, lat, r = self.block_size, self.hidden_units, self.latent_dim, self.rnn_units
        encoder = (STATE_DIM + 1) * h + (h + 1) * lat
        state = (STATE_DIM * m + 1) * h
        control = (FORCE_DIM * m + 1) * h
        recurrent = (m * lat + r + 1) * r + (2 * r + 1) * r
        output = (r + 2 * h + 1) * h + (h + 1) * POSITION_DIM * m
        return encoder + state + control + recurrent + output


def is_recurrent(name: str) -> bool:
    return name.split("_", 1)[0] in RECURRENT_LAYERS


@dataclass
class NetworkParams:
    """All weights of the dynamics network."""

    dims: NetworkDims
    arrays: dict[str, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = self.dims.shapes()
        if set(self.arrays) != set(expected):
            msg = f"Parameter names {sorted(self.arrays)} do not match {sorted(expected)}"
            raise ModelMismatchError(msg)
        for name, shape in expected.items():
            if self.arrays[name].shape != shape:
                msg = f"Parameter {name} has shape {self.arrays[name].shape}, expected {shape}"
                raise ModelMismatchError(msg)

    def __getitem__(self, name: str) -> FloatArray:
        return self.arrays[name]

    def names(self) -> list[str]:
        return list(self.dims.shapes())

    def parameter_count(self) -> int:
        """Census of the stored arrays."""
        return sum(a.size for a in self.arrays.values())

    def copy(self) -> NetworkParams:
        return NetworkParams(self.dims, {k: v.copy() for k, v in self.arrays.items()})

    def zeros_like(self) -> dict[str, FloatArray]:
        return {k: np.zeros_like(v) for k, v in self.arrays.items()}

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(v))) for v in self.arrays.values())


def _fan_in(shape: tuple[int, ...], shapes: dict[str, tuple[int, ...]], name: str) -> int:
    if len(shape) == 2:  # noqa: PLR2004
        return shape[0]
    return shapes[name.rsplit("_", 1)[0] + ("_wx" if name.startswith("rnn") else "_w")][0]


def init_params(dims: NetworkDims, seed: int = 0) -> NetworkParams:
    """Uniform initialization in +-1/sqrt(fan_in), seeded."""
    rng = np.random.default_rng(seed)
    shapes = dims.shapes()
    arrays = {}
    for name, shape in shapes.items():
        bound = 1.0 / math.sqrt(_fan_in(shape, shapes, name))
        arrays[name] = rng.uniform(-bound, bound, size=shape)
    return NetworkParams(dims, arrays)


def zero_params(dims: NetworkDims) -> NetworkParams:
    return NetworkParams(dims, {k: np.zeros(s) for k, s in dims.shapes().items()})


@dataclass(frozen=True, slots=True)
class LatentState:
    """Hidden activations of both recurrent layers, shape (batch, rnn_units) each."""

    h1: FloatArray
    h2: FloatArray

    @classmethod
    def zeros(cls, rnn_units: int, batch: int = 1) -> LatentState:
        return cls(h1=np.zeros((batch, rnn_units)), h2=np.zeros((batch, rnn_units)))

    @property
    def batch(self) -> int:
        return len(self.h1)

    def copy(self) -> LatentState:
        return LatentState(h1=self.h1.copy(), h2=self.h2.copy())

    def repeat(self, batch: int) -> LatentState:
        """Broadcast a single latent to ``batch`` identical rows."""
        return LatentState(
            h1=np.repeat(self.h1, batch, axis=0), h2=np.repeat(self.h2, batch, axis=0)
        )
