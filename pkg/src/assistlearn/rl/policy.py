"""Softmax feed-forward policy and the episode-batch REINFORCE gradient.

The policy is the shared mlp kernel specialized to 4 state inputs and two
actions, so initialization and log-probability gradients reuse the model
machinery: log pi(a|s) is minus the per-record cross-entropy of the action
label, hence the score function of an episode is minus the sum-aggregated
cross-entropy gradient over its (state, action) pairs.
"""

from __future__ import annotations

import numpy as np

from ..models import Dataset, ModelSpec, ParamVector, gradient, loss
from .rollout import Episode


def policy_spec(hidden: int = 4) -> ModelSpec:
    """The 4 -> hidden (tanh) -> 2 softmax control policy."""
    return ModelSpec(kind="mlp", input_dim=4, num_classes=2, hidden_sizes=(hidden,))


def episode_log_prob(policy: ParamVector, spec: ModelSpec, episode: Episode) -> float:
    """log pi_theta(tau): the summed log-probability of the taken actions."""
    if episode.length == 0:
        return 0.0
    return -loss(spec, policy, Dataset(episode.states, episode.actions), aggregate="sum")


def pg_gradient(policy: ParamVector, spec: ModelSpec, episodes) -> ParamVector:
    """Batch-mean REINFORCE estimator R(tau) * grad log pi_theta(tau).

    This is an ascent direction: the optimizer adds eta times this vector.
    """
    episodes = list(episodes)
    if not episodes:
        raise ValueError("episode batch must be nonempty")
    total = np.zeros_like(policy)
    for ep in episodes:
        if ep.length == 0:
            continue
        score = -gradient(spec, policy, Dataset(ep.states, ep.actions), aggregate="sum")
        total += ep.discounted_return * score
    return total / len(episodes)
