from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from cutmpc.config import PlantConfig, RunConfig
from cutmpc.plant import make_material


@dataclass
class LinearDynamics:
    """Mock block dynamics: every timestep moves the blade by ``-gain * F``.

    No latent state; ``predict`` ignores the measured block.
    """

    block_size: int = 10
    gain: float = 1e-4

    def initial_latent(self) -> None:
        return None

    def predict(self, x_block, forces, horizon, latent):
        steps = np.arange(1, self.block_size + 1)[None, :, None]
        block = -self.gain * steps * np.asarray(forces)[:, None, :]
        return np.broadcast_to(block, (horizon, *block.shape)).copy()

    def advance(self, x_block, v_block, latent) -> None:
        return None


@pytest.fixture
def plant_config() -> PlantConfig:
    return PlantConfig()


@pytest.fixture
def quiet_cake():
    """Cake preset without sensor noise."""
    return make_material("cake").model_copy(update={"force_noise_std": 0.0})


@pytest.fixture
def linear_model() -> LinearDynamics:
    return LinearDynamics()


@pytest.fixture
def small_config(tmp_path) -> RunConfig:
    """Run configuration scaled down for tests: few short trials, tiny network."""
    return RunConfig.model_validate({
        "seed": 3,
        "out_dir": str(tmp_path / "out"),
        "collect": {
            "trials": 6,
            "materials": ["cake", "cucumber", "hollow-pepper"],
            "descent_duration_range": [1.5, 2.0],
            "settle_time": 0.2,
            "max_workers": 2,
        },
        "dataset": {"block_size": 10, "train_fraction": 0.7},
        "training": {
            "hidden_units": 6,
            "latent_dim": 2,
            "rnn_units": 5,
            "horizon_blocks": 2,
            "warmup_blocks": 2,
            "autoencoder": {"learning_rate": 1e-2, "epochs": 2, "batch_size": 16},
            "single_step": {"learning_rate": 1e-2, "epochs": 2, "batch_size": 16},
            "multi_step": {"learning_rate": 1e-3, "epochs": 2, "batch_size": 16},
        },
        "mpc": {"candidates": 16, "horizon_blocks": 2},
        "deploy": {"timeout": 4.0, "init_duration": 0.5},
        "evaluation": {
            "materials": ["air", "cake"],
            "n_trials": 5,
            "max_workers": 2,
            "kp_grid": [1.0],
            "ka_grid": [0.05],
            "saw_period_grid": [1.0],
            "descent_duration_grid": [2.0],
        },
    })
