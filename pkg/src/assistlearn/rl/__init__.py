"""Assisted reinforcement learning: parameterized cart-pole, REINFORCE
policies, and the policy-gradient variant of the exchange protocol."""

from .assist_pg import (
    PolicyCheckpoint,
    RLAssistConfig,
    RLAssistResult,
    RLRoundRecord,
    local_pg_train,
    run_assist_pg,
    run_pg_baselines,
    select_best_policy,
)
from .cartpole import CartPoleParams, EnvDistribution, EnvState, cartpole_step, sample_environments
from .policy import episode_log_prob, pg_gradient, policy_spec
from .rollout import Episode, estimate_J, mean_return, rollout, rollout_backend

__all__ = [
    "CartPoleParams",
    "EnvDistribution",
    "EnvState",
    "Episode",
    "PolicyCheckpoint",
    "RLAssistConfig",
    "RLAssistResult",
    "RLRoundRecord",
    "cartpole_step",
    "episode_log_prob",
    "estimate_J",
    "local_pg_train",
    "mean_return",
    "pg_gradient",
    "policy_spec",
    "rollout",
    "rollout_backend",
    "run_assist_pg",
    "run_pg_baselines",
    "sample_environments",
    "select_best_policy",
]
