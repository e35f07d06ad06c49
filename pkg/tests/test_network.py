"""Tests for the dynamics network, its gradients and the optimizer."""

from __future__ import annotations

import numpy as np
import pytest

from cutmpc.dynmodel import (
    LatentState,
    NetworkDims,
    NetworkParams,
    check_gradients,
    forward_block,
    init_params,
    rollout,
    sequence_loss,
    sequence_loss_and_grads,
    unroll,
    zero_params,
)
from cutmpc.dynmodel.autoencoder import (
    init_decoder,
    reconstruction_loss,
    reconstruction_loss_and_grads,
)
from cutmpc.dynmodel.optim import MomentumSGD, clip_by_global_norm, global_norm
from cutmpc.errors import ModelMismatchError


SMALL = NetworkDims(block_size=3, hidden_units=5, latent_dim=2, rnn_units=4)


def _close(samples) -> None:
    for s in samples:
        assert abs(s.analytic - s.numeric) <= 1e-4 * max(abs(s.analytic), abs(s.numeric)) + 1e-8, s


def _oracle(params, x, v, h1_prev, h2_prev):
    """Timestep-by-timestep forward pass of a single block."""
    w = params.arrays
    z = [
        np.tanh(np.tanh(row @ w["en1_w"] + w["en1_b"]) @ w["en2_w"] + w["en2_b"]) for row in x
    ]
    h1 = np.tanh(np.concatenate(z) @ w["rnn1_wx"] + h1_prev @ w["rnn1_wh"] + w["rnn1_b"])
    h2 = np.tanh(h1 @ w["rnn2_wx"] + h2_prev @ w["rnn2_wh"] + w["rnn2_b"])
    s = np.tanh(x.ravel() @ w["state_w"] + w["state_b"])
    q = np.tanh(v.ravel() @ w["input_w"] + w["input_b"])
    o1 = np.tanh(np.concatenate([h2, s, q]) @ w["out1_w"] + w["out1_b"])
    return (o1 @ w["out2_w"] + w["out2_b"]).reshape(len(x), 2), h1, h2


def test_parameter_census_matches_layer_dimensions():
    dims = NetworkDims()
    assert dims.parameter_count() == 9603
    assert init_params(dims).parameter_count() == 9603
    assert init_params(SMALL).parameter_count() == SMALL.parameter_count()


def test_wrong_parameter_shape_is_rejected():
    arrays = zero_params(SMALL).arrays
    arrays["out2_b"] = np.zeros(5)
    with pytest.raises(ModelMismatchError):
        NetworkParams(SMALL, arrays)


def test_zero_weights_output_the_bias():
    """With every weight and hidden bias at zero the prediction is the output bias."""
    params = zero_params(SMALL)
    params.arrays["out2_b"][:] = np.arange(6) * 0.1
    rng = np.random.default_rng(0)
    y, latent = forward_block(params, rng.normal(size=(3, 4)), rng.normal(size=(3, 2)))
    np.testing.assert_allclose(y, params["out2_b"].reshape(3, 2))
    np.testing.assert_array_equal(latent.h1, 0)


def test_forward_matches_timestep_oracle():
    rng = np.random.default_rng(1)
    params = init_params(SMALL, seed=4)
    x, v = rng.normal(size=(3, 4)), rng.normal(size=(3, 2))
    h1_prev, h2_prev = rng.normal(size=4) * 0.5, rng.normal(size=4) * 0.5
    y, latent = forward_block(params, x, v, LatentState(h1=h1_prev, h2=h2_prev))
    y_ref, h1, h2 = _oracle(params, x, v, h1_prev, h2_prev)
    np.testing.assert_allclose(y, y_ref, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(latent.h1[0], h1, rtol=1e-12)
    np.testing.assert_allclose(latent.h2[0], h2, rtol=1e-12)


def test_forward_is_pure():
    """Repeated calls give identical outputs and leave inputs untouched."""
    rng = np.random.default_rng(2)
    params = init_params(SMALL, seed=1)
    before = params.copy()
    x, v = rng.normal(size=(3, 4)), rng.normal(size=(3, 2))
    latent = LatentState(h1=rng.normal(size=(1, 4)), h2=rng.normal(size=(1, 4)))
    latent_before = latent.copy()
    y1, l1 = forward_block(params, x, v, latent)
    y2, l2 = forward_block(params, x, v, latent)
    np.testing.assert_array_equal(y1, y2)
    np.testing.assert_array_equal(l1.h2, l2.h2)
    np.testing.assert_array_equal(latent.h1, latent_before.h1)
    for name in params.names():
        np.testing.assert_array_equal(params[name], before[name])


def test_batched_forward_matches_single_blocks():
    rng = np.random.default_rng(3)
    params = init_params(SMALL, seed=2)
    x, v = rng.normal(size=(5, 3, 4)), rng.normal(size=(5, 3, 2))
    y, _ = forward_block(params, x, v)
    for i in range(5):
        np.testing.assert_allclose(y[i], forward_block(params, x[i], v[i])[0], rtol=1e-12)


def test_single_block_rollout_equals_forward():
    rng = np.random.default_rng(4)
    params = init_params(SMALL, seed=3)
    x, v = rng.normal(size=(3, 4)), rng.normal(size=(1, 3, 2))
    predictions, latent = rollout(params, x, v)
    y, expected_latent = forward_block(params, x, v[0])
    np.testing.assert_allclose(predictions[0], y, rtol=1e-12)
    np.testing.assert_allclose(latent.h1, expected_latent.h1, rtol=1e-12)


def test_rollout_feeds_predictions_back():
    """Each later input block is the previous prediction with the previous control forces."""
    rng = np.random.default_rng(5)
    params = init_params(SMALL, seed=5)
    x, future_v = rng.normal(size=(3, 4)), rng.normal(size=(4, 3, 2))
    predictions, _ = rollout(params, x, future_v)
    assert predictions.shape == (4, 3, 2)
    latent = None
    block = x
    for i in range(4):
        y, latent = forward_block(params, block, future_v[i], latent)
        np.testing.assert_allclose(predictions[i], y, rtol=1e-12)
        block = np.hstack([y, future_v[i]])


def test_rollout_prefix_is_shorter_rollout():
    rng = np.random.default_rng(6)
    params = init_params(SMALL, seed=6)
    x, future_v = rng.normal(size=(2, 3, 4)), rng.normal(size=(5, 2, 3, 2))
    long, _ = rollout(params, x, future_v)
    short, _ = rollout(params, x, future_v[:3])
    np.testing.assert_array_equal(long[:3], short)


def test_rollout_requires_a_horizon():
    with pytest.raises(ValueError, match="horizon"):
        rollout(init_params(SMALL), np.zeros((3, 4)), np.zeros((0, 3, 2)))


def test_unroll_uses_measurements_during_warm_up():
    """Warm-up steps read measured positions; the loss only covers later steps."""
    rng = np.random.default_rng(7)
    params = init_params(SMALL, seed=7)
    x_seq, v_seq = rng.normal(size=(4, 2, 3, 4)), rng.normal(size=(4, 2, 3, 2))
    result = unroll(params, x_seq, v_seq, warmup_steps=2)
    latent = None
    for j in range(3):
        y, latent = forward_block(params, x_seq[j], v_seq[j], latent)
        np.testing.assert_allclose(result.predictions[j], y, rtol=1e-12)
    fed = np.concatenate([result.predictions[2], x_seq[3][..., 2:]], axis=-1)
    y, _ = forward_block(params, fed, v_seq[3], latent)
    np.testing.assert_allclose(result.predictions[3], y, rtol=1e-12)
    targets = rng.normal(size=(2, 2, 3, 2))
    expected = np.mean((result.predictions[2:] - targets) ** 2)
    assert sequence_loss(params, x_seq, v_seq, targets, 2) == pytest.approx(expected)


def test_single_step_gradients_match_finite_differences():
    rng = np.random.default_rng(8)
    params = init_params(SMALL, seed=8)
    x, v = rng.normal(size=(1, 4, 3, 4)), rng.normal(size=(1, 4, 3, 2))
    t = rng.normal(size=(1, 4, 3, 2))
    loss, grads = sequence_loss_and_grads(params, x, v, t)
    assert loss == pytest.approx(sequence_loss(params, x, v, t))
    samples = check_gradients(
        lambda: sequence_loss(params, x, v, t), params.arrays, grads, n_samples=5
    )
    assert len(samples) == 5 * len(params.names())
    _close(samples)


def test_bptt_gradients_match_finite_differences():
    """Three predicted blocks after a two-block warm-up, predictions fed back."""
    rng = np.random.default_rng(9)
    params = init_params(SMALL, seed=9)
    x, v = rng.normal(size=(5, 2, 3, 4)), rng.normal(size=(5, 2, 3, 2))
    t = rng.normal(size=(3, 2, 3, 2))
    _, grads = sequence_loss_and_grads(params, x, v, t, warmup_steps=2)
    _close(
        check_gradients(
            lambda: sequence_loss(params, x, v, t, 2), params.arrays, grads, n_samples=6, seed=1
        )
    )


def test_bptt_gradient_reaches_recurrent_weights():
    rng = np.random.default_rng(10)
    params = init_params(SMALL, seed=10)
    x, v = rng.normal(size=(3, 1, 3, 4)), rng.normal(size=(3, 1, 3, 2))
    _, grads = sequence_loss_and_grads(params, x, v, rng.normal(size=(3, 1, 3, 2)))
    assert np.abs(grads["rnn1_wh"]).max() > 0
    assert np.abs(grads["rnn2_wh"]).max() > 0


def test_autoencoder_gradients_match_finite_differences():
    rng = np.random.default_rng(11)
    params = init_params(SMALL, seed=11)
    arrays = {k: params.arrays[k].copy() for k in ("en1_w", "en1_b", "en2_w", "en2_b")}
    arrays |= init_decoder(params, seed=2)
    samples = rng.normal(size=(12, 4))
    _, grads = reconstruction_loss_and_grads(arrays, samples)
    _close(check_gradients(lambda: reconstruction_loss(arrays, samples), arrays, grads))


def test_clipping_bounds_the_global_norm():
    grads = {"a": np.array([3.0, 0.0]), "b": np.array([[0.0, 4.0]])}
    assert clip_by_global_norm(grads, 1.0) == pytest.approx(5.0)
    assert global_norm(grads) == pytest.approx(1.0)
    np.testing.assert_allclose(grads["a"], [0.6, 0.0])


def test_momentum_sgd_skips_frozen_parameters():
    params = {"w": np.ones(2), "rnn1_wh": np.ones(2)}
    grads = {"w": np.array([1.0, -1.0]), "rnn1_wh": np.array([5.0, 5.0])}
    optimizer = MomentumSGD(0.1, momentum=0.5, grad_clip=None, frozen=("rnn1_wh",))
    optimizer.step(params, grads)
    optimizer.step(params, grads)
    np.testing.assert_allclose(params["w"], [1 - 0.1 - 0.15, 1 + 0.1 + 0.15])
    np.testing.assert_array_equal(params["rnn1_wh"], 1)
