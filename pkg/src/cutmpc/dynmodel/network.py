"""Forward pass, multi-block rollout and backpropagation through time."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from cutmpc.dynmodel.params import POSITION_DIM, LatentState, NetworkParams


if TYPE_CHECKING:
    from cutmpc.cut_types import FloatArray


@dataclass(frozen=True, slots=True)
class _StepCache:
    x: FloatArray
    v: FloatArray
    a1: FloatArray
    z: FloatArray
    h1_prev: FloatArray
    h2_prev: FloatArray
    h1: FloatArray
    h2: FloatArray
    s: FloatArray
    q: FloatArray
    c: FloatArray
    o1: FloatArray


def _step(
    params: NetworkParams, x: FloatArray, v: FloatArray, latent: LatentState
) -> tuple[FloatArray, LatentState, _StepCache]:
    """Batched forward pass; x (B, M, 4), v (B, M, 2)."""
    b, m = x.shape[:2]
    a1 = np.tanh(x @ params["en1_w"] + params["en1_b"])
    z = np.tanh(a1 @ params["en2_w"] + params["en2_b"])
    zf = z.reshape(b, -1)
    h1 = np.tanh(zf @ params["rnn1_wx"] + latent.h1 @ params["rnn1_wh"] + params["rnn1_b"])
    h2 = np.tanh(h1 @ params["rnn2_wx"] + latent.h2 @ params["rnn2_wh"] + params["rnn2_b"])
    s = np.tanh(x.reshape(b, -1) @ params["state_w"] + params["state_b"])
    q = np.tanh(v.reshape(b, -1) @ params["input_w"] + params["input_b"])
    c = np.concatenate([h2, s, q], axis=1)
    o1 = np.tanh(c @ params["out1_w"] + params["out1_b"])
    y = (o1 @ params["out2_w"] + params["out2_b"]).reshape(b, m, POSITION_DIM)
    cache = _StepCache(x, v, a1, z, latent.h1, latent.h2, h1, h2, s, q, c, o1)
    return y, LatentState(h1=h1, h2=h2), cache


def _step_backward(
    params: NetworkParams,
    cache: _StepCache,
    dy: FloatArray,
    dh1: FloatArray,
    dh2: FloatArray,
    grads: dict[str, FloatArray],
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """Accumulate parameter gradients of one step into ``grads``.

    ``dh1``/``dh2`` are the gradients flowing into this step's output latent.

    Returns:
        Gradients w.r.t. x, v and the incoming latent (h1_prev, h2_prev).
    """
    b, m = cache.x.shape[:2]
    r = cache.h1.shape[1]
    hidden = cache.s.shape[1]
    dyf = dy.reshape(b, -1)
    grads["out2_w"] += cache.o1.T @ dyf
    grads["out2_b"] += dyf.sum(axis=0)
    d_o1 = (dyf @ params["out2_w"].T) * (1 - cache.o1**2)
    grads["out1_w"] += cache.c.T @ d_o1
    grads["out1_b"] += d_o1.sum(axis=0)
    dc = d_o1 @ params["out1_w"].T

    d_s = dc[:, r : r + hidden] * (1 - cache.s**2)
    xf = cache.x.reshape(b, -1)
    grads["state_w"] += xf.T @ d_s
    grads["state_b"] += d_s.sum(axis=0)
    dx = (d_s @ params["state_w"].T).reshape(cache.x.shape)

    d_q = dc[:, r + hidden :] * (1 - cache.q**2)
    grads["input_w"] += cache.v.reshape(b, -1).T @ d_q
    grads["input_b"] += d_q.sum(axis=0)
    dv = (d_q @ params["input_w"].T).reshape(cache.v.shape)

    d_h2 = (dc[:, :r] + dh2) * (1 - cache.h2**2)
    grads["rnn2_wx"] += cache.h1.T @ d_h2
    grads["rnn2_wh"] += cache.h2_prev.T @ d_h2
    grads["rnn2_b"] += d_h2.sum(axis=0)
    dh2_prev = d_h2 @ params["rnn2_wh"].T

    d_h1 = (d_h2 @ params["rnn2_wx"].T + dh1) * (1 - cache.h1**2)
    zf = cache.z.reshape(b, -1)
    grads["rnn1_wx"] += zf.T @ d_h1
    grads["rnn1_wh"] += cache.h1_prev.T @ d_h1
    grads["rnn1_b"] += d_h1.sum(axis=0)
    dh1_prev = d_h1 @ params["rnn1_wh"].T

    d_z = (d_h1 @ params["rnn1_wx"].T).reshape(cache.z.shape) * (1 - cache.z**2)
    grads["en2_w"] += cache.a1.reshape(b * m, -1).T @ d_z.reshape(b * m, -1)
    grads["en2_b"] += d_z.sum(axis=(0, 1))
    d_a1 = (d_z @ params["en2_w"].T) * (1 - cache.a1**2)
    grads["en1_w"] += cache.x.reshape(b * m, -1).T @ d_a1.reshape(b * m, -1)
    grads["en1_b"] += d_a1.sum(axis=(0, 1))
    dx += d_a1 @ params["en1_w"].T
    return dx, dv, dh1_prev, dh2_prev


def _batched(
    x: FloatArray, v: FloatArray, latent: LatentState | None, rnn_units: int
) -> tuple[FloatArray, FloatArray, LatentState, bool]:
    single = x.ndim == 2  # noqa: PLR2004
    if single:
        x, v = x[None], v[None]
    if latent is None:
        latent = LatentState.zeros(rnn_units, len(x))
    elif latent.h1.ndim == 1:
        latent = LatentState(h1=latent.h1[None], h2=latent.h2[None])
    return x, v, latent, single


def forward_block(
    params: NetworkParams,
    x_block: FloatArray,
    v_block: FloatArray,
    latent: LatentState | None = None,
) -> tuple[FloatArray, LatentState]:
    """Predict the next block's normalized relative positions.

    Accepts a single block (M, 4) / (M, 2) or a batch (B, M, 4) / (B, M, 2).
    A missing latent is the zero state.
    """
    x, v, lat, single = _batched(
        np.asarray(x_block, dtype=np.float64),
        np.asarray(v_block, dtype=np.float64),
        latent,
        params.dims.rnn_units,
    )
    y, new_latent, _ = _step(params, x, v, lat)
    return (y[0] if single else y), new_latent


@dataclass(frozen=True)
class Unrolled:
    """Result of an unrolled forward pass, kept for the backward pass."""

    predictions: FloatArray
    """Shape (T, B, M, 2): one predicted block per step."""

    latent: LatentState
    caches: list[_StepCache]
    warmup_steps: int


def unroll(
    params: NetworkParams,
    x_seq: FloatArray,
    v_seq: FloatArray,
    warmup_steps: int = 0,
    latent: LatentState | None = None,
) -> Unrolled:
    """Run T consecutive steps.

    Steps ``0..warmup_steps`` read the measured ``x_seq[j]``; later steps replace the
    position channels with the previous prediction and keep the measured forces.

    Args:
        params: Network weights
        x_seq: Measured blocks, shape (T, B, M, 4); only ``x_seq[0..warmup_steps]``
               position channels are used
        v_seq: Control blocks, shape (T, B, M, 2)
        warmup_steps: Number of leading warm-up steps fed with measured positions
        latent: Initial latent, zero when omitted
    """
    n_steps, batch = x_seq.shape[:2]
    lat = latent if latent is not None else LatentState.zeros(params.dims.rnn_units, batch)
    predictions = []
    caches = []
    prev: FloatArray | None = None
    for j in range(n_steps):
        x = x_seq[j]
        if j > warmup_steps and prev is not None:
            x = np.concatenate([prev, x[..., POSITION_DIM:]], axis=-1)
        prev, lat, cache = _step(params, x, v_seq[j], lat)
        predictions.append(prev)
        caches.append(cache)
    return Unrolled(np.stack(predictions), lat, caches, warmup_steps)


def rollout(
    params: NetworkParams,
    x_block: FloatArray,
    future_v_blocks: FloatArray,
    latent: LatentState | None = None,
) -> tuple[FloatArray, LatentState]:
    """Predict ``H_b`` blocks by feeding each prediction back as the next position input.

    The force part of input block ``i >= 1`` is ``future_v_blocks[i - 1]``.

    Args:
        params: Network weights
        x_block: Current measured block, (M, 4) or (B, M, 4)
        future_v_blocks: Control blocks, (H_b, M, 2) or (H_b, B, M, 2)
        latent: Latent before the current block

    Returns:
        Predicted blocks (H_b, [B,] M, 2) and the latent after the last step.
    """
    x_block = np.asarray(x_block, dtype=np.float64)
    future_v_blocks = np.asarray(future_v_blocks, dtype=np.float64)
    single = x_block.ndim == 2  # noqa: PLR2004
    if single:
        x_block, future_v_blocks = x_block[None], future_v_blocks[:, None]
    horizon = len(future_v_blocks)
    if horizon < 1:
        msg = "Rollout horizon must be at least one block"
        raise ValueError(msg)
    if latent is not None and latent.h1.ndim == 1:
        latent = LatentState(h1=latent.h1[None], h2=latent.h2[None])
    x_seq = np.zeros((horizon, *x_block.shape))
    x_seq[0] = x_block
    x_seq[1:, ..., POSITION_DIM:] = future_v_blocks[:-1]
    result = unroll(params, x_seq, future_v_blocks, warmup_steps=0, latent=latent)
    predictions = result.predictions[:, 0] if single else result.predictions
    return predictions, result.latent


def sequence_loss(
    params: NetworkParams,
    x_seq: FloatArray,
    v_seq: FloatArray,
    targets: FloatArray,
    warmup_steps: int = 0,
) -> float:
    """Mean squared error of the predictions after the warm-up steps."""
    result = unroll(params, x_seq, v_seq, warmup_steps)
    return float(np.mean((result.predictions[warmup_steps:] - targets) ** 2))


def sequence_loss_and_grads(
    params: NetworkParams,
    x_seq: FloatArray,
    v_seq: FloatArray,
    targets: FloatArray,
    warmup_steps: int = 0,
) -> tuple[float, dict[str, FloatArray]]:
    """Loss of :func:`sequence_loss` and its gradient by backpropagation through time.

    Args:
        params: Network weights
        x_seq: Measured blocks (T, B, M, 4)
        v_seq: Control blocks (T, B, M, 2)
        targets: Targets of the predicted steps (T - warmup_steps, B, M, 2)
        warmup_steps: Leading warm-up steps excluded from the loss
    """
    result = unroll(params, x_seq, v_seq, warmup_steps)
    errors = result.predictions[warmup_steps:] - targets
    loss = float(np.mean(errors**2))
    scale = 2.0 / errors.size
    grads = params.zeros_like()
    batch = x_seq.shape[1]
    r = params.dims.rnn_units
    dh1 = np.zeros((batch, r))
    dh2 = np.zeros((batch, r))
    d_feedback = np.zeros_like(result.predictions[0])
    for j in reversed(range(len(result.caches))):
        dy = d_feedback.copy()
        if j >= warmup_steps:
            dy += scale * errors[j - warmup_steps]
        dx, _, dh1, dh2 = _step_backward(params, result.caches[j], dy, dh1, dh2, grads)
        # predictions feed the next step's position channels after the warm-up
        d_feedback = dx[..., :POSITION_DIM] if j > warmup_steps else np.zeros_like(d_feedback)
    return loss, grads
