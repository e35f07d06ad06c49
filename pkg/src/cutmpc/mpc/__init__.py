"""Random-shooting MPC on the learned block dynamics."""

from __future__ import annotations

from cutmpc.mpc.cost import CostBreakdown, batch_horizon_cost, horizon_cost, integrate_relative
from cutmpc.mpc.deploy import (
    DEPLOY_COLUMNS,
    DeployResult,
    deploy_loop,
    episode_stop_reason,
    limit_rise,
    warm_latent,
)
from cutmpc.mpc.model import BlockDynamics, LearnedDynamics
from cutmpc.mpc.shooting import (
    Candidate,
    MpcDiagnostics,
    current_block,
    mpc_step,
    sample_candidates,
)


__all__ = [
    "DEPLOY_COLUMNS",
    "BlockDynamics",
    "Candidate",
    "CostBreakdown",
    "DeployResult",
    "LearnedDynamics",
    "MpcDiagnostics",
    "batch_horizon_cost",
    "current_block",
    "deploy_loop",
    "episode_stop_reason",
    "horizon_cost",
    "integrate_relative",
    "limit_rise",
    "mpc_step",
    "sample_candidates",
    "warm_latent",
]
