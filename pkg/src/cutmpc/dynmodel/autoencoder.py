"""Per-timestep autoencoder used to initialize the encoder layers."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from cutmpc.dynmodel.params import STATE_DIM, NetworkParams


if TYPE_CHECKING:
    from cutmpc.cut_types import FloatArray


ENCODER_PARAMS = ("en1_w", "en1_b", "en2_w", "en2_b")


def init_decoder(params: NetworkParams, seed: int = 0) -> dict[str, FloatArray]:
    """Throwaway decoder mapping the latent back to the 4 input channels."""
    rng = np.random.default_rng(seed)
    h, lat = params.dims.hidden_units, params.dims.latent_dim
    b1, b2 = 1.0 / math.sqrt(lat), 1.0 / math.sqrt(h)
    return {
        "dec1_w": rng.uniform(-b1, b1, size=(lat, h)),
        "dec1_b": rng.uniform(-b1, b1, size=h),
        "dec2_w": rng.uniform(-b2, b2, size=(h, STATE_DIM)),
        "dec2_b": rng.uniform(-b2, b2, size=STATE_DIM),
    }


def reconstruct(
    params: dict[str, FloatArray], samples: FloatArray
) -> tuple[FloatArray, tuple[FloatArray, ...]]:
    """Encode and decode samples of shape (N, 4)."""
    a1 = np.tanh(samples @ params["en1_w"] + params["en1_b"])
    z = np.tanh(a1 @ params["en2_w"] + params["en2_b"])
    d1 = np.tanh(z @ params["dec1_w"] + params["dec1_b"])
    out = d1 @ params["dec2_w"] + params["dec2_b"]
    return out, (a1, z, d1)


def reconstruction_loss(params: dict[str, FloatArray], samples: FloatArray) -> float:
    out, _ = reconstruct(params, samples)
    return float(np.mean((out - samples) ** 2))


def reconstruction_loss_and_grads(
    params: dict[str, FloatArray], samples: FloatArray
) -> tuple[float, dict[str, FloatArray]]:
    """L2 reconstruction error and its gradient w.r.t. encoder and decoder."""
    out, (a1, z, d1) = reconstruct(params, samples)
    err = out - samples
    loss = float(np.mean(err**2))
    d_out = 2.0 * err / err.size
    grads = {
        "dec2_w": d1.T @ d_out,
        "dec2_b": d_out.sum(axis=0),
    }
    d_d1 = (d_out @ params["dec2_w"].T) * (1 - d1**2)
    grads["dec1_w"] = z.T @ d_d1
    grads["dec1_b"] = d_d1.sum(axis=0)
    d_z = (d_d1 @ params["dec1_w"].T) * (1 - z**2)
    grads["en2_w"] = a1.T @ d_z
    grads["en2_b"] = d_z.sum(axis=0)
    d_a1 = (d_z @ params["en2_w"].T) * (1 - a1**2)
    grads["en1_w"] = samples.T @ d_a1
    grads["en1_b"] = d_a1.sum(axis=0)
    return loss, grads
