"""Tests for the command line."""

from __future__ import annotations

import csv
import json
import shutil

import pytest
from typer.testing import CliRunner

from cutmpc.cli import app
from cutmpc.plant import default_registry


CONFIG = """\
seed = 3

[collect]
trials = 4
materials = ["cake", "cucumber"]
descent_duration_range = [1.5, 2.0]
settle_time = 0.2
max_workers = 2

[training]
hidden_units = 6
latent_dim = 2
rnn_units = 5
horizon_blocks = 2
warmup_blocks = 2

[training.autoencoder]
learning_rate = 0.01
epochs = 1

[training.single_step]
learning_rate = 0.01
epochs = 1

[training.multi_step]
learning_rate = 0.001
epochs = 1

[mpc]
candidates = 16
horizon_blocks = 2

[deploy]
timeout = 3.0
init_duration = 0.5

[evaluation]
materials = ["air", "cake"]
kp_grid = [1.0]
ka_grid = [0.05]
saw_period_grid = [1.0]
descent_duration_grid = [2.0]
"""


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(CONFIG, encoding="utf-8")
    return path


def _invoke(runner: CliRunner, config_file, out, *args: str):
    return runner.invoke(app, [*args, "--config", str(config_file), "--out", str(out)])


def test_help_lists_commands(runner):
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for command in ("collect", "train", "run", "eval"):
        assert command in result.output


def test_unknown_material_exits_with_configuration_error(runner, config_file, tmp_path):
    result = _invoke(runner, config_file, tmp_path / "out", "run", "--material", "durian")
    assert result.exit_code == 2
    assert "durian" in result.output
    for label in default_registry().labels():
        assert label in result.output


def test_invalid_override_exits_with_configuration_error(runner, config_file, tmp_path):
    result = _invoke(runner, config_file, tmp_path / "out", "collect", "mpc.candidates=0")
    assert result.exit_code == 2
    assert "Error" in result.output


def test_stage_without_previous_checkpoint_is_rejected(runner, config_file, tmp_path):
    result = _invoke(runner, config_file, tmp_path / "out", "train", "--stage", "2")
    assert result.exit_code == 3
    assert "stage1.json" in result.output


def test_run_without_model_is_a_data_error(runner, config_file, tmp_path):
    result = _invoke(runner, config_file, tmp_path / "out", "run", "-m", "cake")
    assert result.exit_code == 3


def test_eval_needs_five_trials(runner, config_file, tmp_path):
    out = tmp_path / "out"
    assert _invoke(runner, config_file, out, "collect").exit_code == 0
    assert _invoke(runner, config_file, out, "train").exit_code == 0
    result = _invoke(runner, config_file, out, "eval", "--trials", "4")
    assert result.exit_code == 2


def test_collect_writes_requested_trials(runner, config_file, tmp_path):
    out = tmp_path / "out"
    result = _invoke(runner, config_file, out, "collect", "collect.trials=5")
    assert result.exit_code == 0, result.output
    assert "5 trials, " in result.output
    manifest = json.loads((out / "dataset" / "manifest.json").read_text())
    assert len(manifest["trials"]) == 5
    assert len(list((out / "dataset" / "trials").glob("trial_*.csv"))) == 5
    snapshot = json.loads((out / "dataset" / "config.json").read_text())
    assert snapshot["collect"]["trials"] == 5
    assert snapshot["seed"] == 3


def test_seed_flag_wins_over_config(runner, config_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        app, ["collect", "--config", str(config_file), "--out", str(out), "--seed", "11"]
    )
    assert result.exit_code == 0, result.output
    assert json.loads((out / "dataset" / "config.json").read_text())["seed"] == 11


def test_pipeline(runner, config_file, tmp_path):
    """collect, train, run and eval write their artifacts below the output directory."""
    out = tmp_path / "out"
    for command in ("collect", "train"):
        result = _invoke(runner, config_file, out, command)
        assert result.exit_code == 0, result.output
    for stage in (1, 2, 3):
        assert (out / "model" / f"stage{stage}.json").exists()
    with (out / "model" / "metrics.csv").open(newline="") as f:
        assert len(list(csv.DictReader(f))) == 3

    result = _invoke(runner, config_file, out, "train", "--stage", "3")
    assert result.exit_code == 0, result.output
    assert "Stages 3..3" in result.output

    result = _invoke(runner, config_file, out, "run", "--material", "cake")
    assert result.exit_code == 0, result.output
    assert "material=cake completed=" in result.output
    assert "stop=" in result.output
    assert (out / "run" / "trial_cake_mpc_3.csv").exists()

    result = _invoke(runner, config_file, out, "eval")
    assert result.exit_code == 0, result.output
    report = out / "report"
    with (report / "rates.csv").open(newline="") as f:
        rows = list(csv.DictReader(f))
    assert [(r["material"], r["controller"]) for r in rows] == [
        ("air", "baseline"),
        ("air", "mpc"),
        ("cake", "baseline"),
        ("cake", "mpc"),
    ]
    assert (report / "rates.svg").exists()
    assert (report / "force_critical.json").exists()
    assert len(list(report.glob("trial_*.csv"))) == 2 * 2 * 5
    assert "force-critical carrot:" in result.output


@pytest.mark.slow
def test_repeated_pipeline_writes_identical_reports(runner, config_file, tmp_path):
    """collect, train and eval under one seed reproduce every report file byte for byte."""
    out = tmp_path / "out"
    reports = []
    for _ in range(2):
        for command in ("collect", "train", "eval"):
            result = _invoke(runner, config_file, out, command)
            assert result.exit_code == 0, result.output
        report = out / "report"
        reports.append({p.name: p.read_bytes() for p in sorted(report.iterdir())})
        shutil.rmtree(out)
    assert "rates.csv" in reports[0]
    assert "force_critical.json" in reports[0]
    assert reports[0].keys() == reports[1].keys()
    for name, content in reports[0].items():
        assert reports[1][name] == content, name
