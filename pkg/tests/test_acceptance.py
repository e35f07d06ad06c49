"""End-to-end runs at realistic sizes. Deselected by default; run with ``-m slow``."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cutmpc.config import load_config
from cutmpc.cut_types import StopReason, TrainingStage
from cutmpc.dataset import collect_dataset, load_training_data
from cutmpc.dynmodel import (
    checkpoint_path,
    load_model,
    persistence_mse,
    train_curriculum,
    windowed_mse,
)
from cutmpc.dynmodel.training import read_metrics_csv
from cutmpc.evaluation import MpcController, emit_report, force_critical_scenario, run_comparison
from cutmpc.mpc import LearnedDynamics, deploy_loop


pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """Default-sized dataset (210 trials) and the full three-stage curriculum."""
    out = tmp_path_factory.mktemp("acceptance")
    config = load_config(seed=1, out_dir=out)
    manifest = collect_dataset(config, out / "dataset")
    data = load_training_data(out / "dataset")
    train_curriculum(data, config.training, out / "model")
    model = LearnedDynamics.load(
        checkpoint_path(out / "model", TrainingStage.MULTI_STEP), block_size=data.block_size
    )
    return config, manifest, data, model


def test_dataset_scale(trained):
    """The training set holds at least 200 trials and 50k timesteps."""
    _, manifest, _, _ = trained
    assert len(manifest.trials) >= 200
    assert sum(e.n_samples for e in manifest.trials) >= 50_000


def test_curriculum_reduces_validation_loss(trained):
    """Each sequence stage ends with a finite validation loss no worse than its first epoch."""
    config, _, data, model = trained
    history = read_metrics_csv(config.out_dir / "model" / "metrics.csv")
    assert [m.stage for m in history][0] is TrainingStage.AUTOENCODER
    for stage in (TrainingStage.SINGLE_STEP, TrainingStage.MULTI_STEP):
        losses = [m.validation_loss for m in history if m.stage is stage]
        assert all(math.isfinite(v) for v in losses)
        assert losses[-1] <= losses[0]
    horizon = config.training.horizon_blocks
    assert math.isfinite(windowed_mse(model.params, data.validation, horizon))


def test_single_step_model_beats_persistence(trained):
    """Validation single-step MSE stays below half of predicting the last block again."""
    config, _, data, _ = trained
    stage2, _, _ = load_model(
        checkpoint_path(config.out_dir / "model", TrainingStage.SINGLE_STEP),
        required_stage=TrainingStage.SINGLE_STEP,
    )
    assert windowed_mse(stage2, data.validation, 1) < 0.5 * persistence_mse(data.validation)


def test_multi_step_training_improves_rollouts(trained):
    """The multi-step model predicts the horizon better than rolling the single-step model."""
    config, _, data, model = trained
    stage2, _, _ = load_model(
        checkpoint_path(config.out_dir / "model", TrainingStage.SINGLE_STEP)
    )
    horizon, warmup = config.training.horizon_blocks, config.training.warmup_blocks
    multi = windowed_mse(model.params, data.validation, horizon, warmup)
    naive = windowed_mse(stage2, data.validation, horizon, warmup)
    assert multi < naive


@pytest.mark.parametrize("material", ["air", "cake", "cucumber"])
def test_mpc_cuts_training_materials(trained, material):
    """Materials seen in training are cut through before the timeout."""
    config, _, _, model = trained
    result = MpcController(config, model).run(config.registry().get(material), seed=config.seed)
    assert result.completed, result.stop_reason
    assert result.cutting_rate > 0


def test_every_tick_picks_the_cheapest_bounded_candidate(trained):
    """Chosen references are the argmin of their tick's costs and never exceed the force bound."""
    config, _, _, model = trained
    material = config.registry().get("hollow-pepper")
    sim = MpcController(config, model).simulator(material, config.seed)
    result = deploy_loop(
        sim,
        model,
        np.asarray(config.deploy.ka),
        config.mpc,
        config.deploy,
        keep_diagnostics=True,
    )
    assert result.diagnostics
    amp = config.mpc.force_amp
    for diag in result.diagnostics:
        assert diag.chosen == int(np.argmin(diag.costs))
        assert np.abs(diag.candidates).max() <= amp
        np.testing.assert_array_equal(diag.winner.f_r, diag.candidates[diag.chosen])
    f_star = np.concatenate([result.log.extra["F_r_star_y"], result.log.extra["F_r_star_z"]])
    assert np.nanmax(np.abs(f_star)) <= amp


def test_mpc_outcuts_baseline_on_heterogeneous_material(trained, tmp_path):
    """MPC beats the tuned baseline on hollow pepper and finishes the potato in time."""
    config, manifest, _, model = trained
    report = run_comparison(["hollow-pepper", "potato"], 5, config, model, manifest=manifest)
    emit_report(report, tmp_path)
    assert report.winner("hollow-pepper") == "mpc"
    assert all(r.completed for r in report.cell("potato", "mpc"))
    for r in report.cell("hollow-pepper", "mpc") + report.cell("potato", "mpc"):
        assert np.nanmax(np.abs(r.log.extra["F_r_star_z"])) <= config.mpc.force_amp
    assert (tmp_path / "rates.csv").exists()


def test_mpc_backs_off_at_the_carrot_core(trained):
    """The cut stops at the uncuttable band without a fault and the controller backs off."""
    config, _, _, model = trained
    result, assessment = force_critical_scenario(config, model)
    assert result.stop_reason is not StopReason.FORCE_LIMIT
    assert assessment.core_contact_time is not None
    assert not assessment.passed_core
    assert not assessment.force_limit_hit
    assert assessment.retreat_detected
    assert math.isfinite(assessment.mean_reference_z)
