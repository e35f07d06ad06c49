"""Tests for model files."""

from __future__ import annotations

import json

import numpy as np
import pytest

from cutmpc.cut_types import TrainingStage
from cutmpc.dataset import NormStats
from cutmpc.dynmodel import (
    NetworkDims,
    check_compatible,
    init_params,
    load_model,
    save_model,
)
from cutmpc.errors import ModelFileError, ModelMismatchError, StageGateError
from cutmpc.mpc import LearnedDynamics


DIMS = NetworkDims(block_size=4, hidden_units=5, latent_dim=2, rnn_units=3)
STATS = NormStats(mean=(0.0, -1e-3, 0.2, 1.5), std=(2e-3, 3e-3, 0.4, 2.0), computed_over="test")


def test_round_trip_is_bitwise(tmp_path):
    params = init_params(DIMS, seed=7)
    params.arrays["out2_b"][0] = 0.1 + 0.2
    params.arrays["en1_b"][1] = 1e-300
    path = save_model(params, STATS, tmp_path / "model.json")
    loaded, stats, stage = load_model(path)
    assert stage is TrainingStage.MULTI_STEP
    assert stats == STATS
    assert loaded.dims == DIMS
    for name in params.names():
        assert loaded[name].tobytes() == params[name].tobytes()


def test_saving_twice_gives_identical_files(tmp_path):
    params = init_params(DIMS, seed=1)
    a = save_model(params, STATS, tmp_path / "a.json")
    b = save_model(params, STATS, tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()


def test_tampered_weights_fail_checksum(tmp_path):
    path = save_model(init_params(DIMS), STATS, tmp_path / "model.json")
    payload = json.loads(path.read_text())
    payload["params"]["out2_b"]["data"][0] += 1.0
    path.write_text(json.dumps(payload))
    with pytest.raises(ModelFileError, match="Checksum"):
        load_model(path)


@pytest.mark.parametrize("content", ["", "not json", "[]", '{"header": {}}'])
def test_unreadable_model_file(tmp_path, content):
    path = tmp_path / "model.json"
    path.write_text(content)
    with pytest.raises(ModelFileError):
        load_model(path)


def test_missing_model_file(tmp_path):
    with pytest.raises(ModelFileError):
        load_model(tmp_path / "missing.json")


def test_stage_tag_is_enforced(tmp_path):
    path = save_model(init_params(DIMS), STATS, tmp_path / "stage2.json", TrainingStage.SINGLE_STEP)
    _, _, stage = load_model(path, required_stage=TrainingStage.SINGLE_STEP)
    assert stage is TrainingStage.SINGLE_STEP
    with pytest.raises(StageGateError):
        load_model(path, required_stage=TrainingStage.MULTI_STEP)
    with pytest.raises(StageGateError):
        LearnedDynamics.load(path, block_size=4)


def test_block_size_mismatch_is_rejected(tmp_path):
    params = init_params(DIMS)
    check_compatible(params, STATS, 4)
    with pytest.raises(ModelMismatchError):
        check_compatible(params, STATS, 10)
    path = save_model(params, STATS, tmp_path / "model.json")
    with pytest.raises(ModelMismatchError):
        LearnedDynamics.load(path, block_size=10)


def test_learned_dynamics_loads_trained_model(tmp_path):
    params = init_params(DIMS, seed=3)
    path = save_model(params, STATS, tmp_path / "model.json")
    model = LearnedDynamics.load(path, block_size=4)
    assert model.block_size == 4
    np.testing.assert_array_equal(model.params["rnn1_wh"], params["rnn1_wh"])
