"""Episode rollouts and return estimation, on top of a swappable kernel.

At import time the compiled extension is preferred; the pure-Python twin is
the fallback, and setting ``ASSISTLEARN_PURE_PYTHON=1`` forces it (used by
the backend benchmark and the parity tests).  Both kernels produce
bit-identical episodes, so results do not depend on which one is active.

Per-environment randomness is keyed by (seed, environment parameters), not
by position in an environment list.  That makes return estimates additive
under set unions and identical for duplicated environments, mirroring the
sum structure of the two-party objective.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass

import numpy as np

from ..models import ModelSpec, ParamVector
from .cartpole import CartPoleParams

if os.environ.get("ASSISTLEARN_PURE_PYTHON", "") not in ("", "0"):
    from . import _rollout_py as _kernel
else:
    try:
        from .. import _speedups as _kernel  # type: ignore[no-redef]
    except ImportError:
        from . import _rollout_py as _kernel  # type: ignore[no-redef]


def rollout_backend() -> str:
    """Name of the active kernel: "compiled" or "python"."""
    return _kernel.BACKEND_NAME


def check_policy_spec(spec: ModelSpec) -> int:
    """Rollout kernels support the 4-input, one-hidden-layer, 2-action net;
    returns the hidden width."""
    if (
        spec.kind != "mlp"
        or spec.input_dim != 4
        or spec.num_classes != 2
        or len(spec.hidden_sizes) != 1
    ):
        raise ValueError("policy spec must be an mlp with input 4, one hidden layer, 2 actions")
    return spec.hidden_sizes[0]


@dataclass(frozen=True)
class Episode:
    """One played episode: per-step pre-action states, sampled actions, and
    unit rewards, plus the discounted return sum_t gamma^(t-1) r_t."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    discounted_return: float

    @property
    def length(self) -> int:
        return self.actions.shape[0]


def rollout(
    policy: ParamVector,
    spec: ModelSpec,
    env: CartPoleParams,
    gamma: float,
    rng: np.random.Generator,
) -> Episode:
    """Play one episode of at most ``env.max_steps`` steps.

    Consumes exactly ``4 + max_steps`` uniform draws from ``rng`` (initial
    state plus one action draw per potential step), so episode content is a
    pure function of (policy, env, rng state).
    """
    hidden = check_policy_spec(spec)
    policy = np.ascontiguousarray(policy, dtype=np.float64)
    if policy.shape != (spec.param_count,):
        raise ValueError(
            f"policy vector has shape {policy.shape}, spec requires {spec.param_count}"
        )
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    uniforms = rng.random(4 + env.max_steps)
    states = np.empty((env.max_steps, 4))
    actions = np.empty(env.max_steps, dtype=np.int64)
    length, ret = _kernel.rollout_core(
        policy,
        hidden,
        env.pole_length,
        env.gravity,
        env.cart_mass,
        env.pole_mass,
        env.force_magnitude,
        env.tau,
        env.theta_threshold,
        env.x_threshold,
        env.max_steps,
        gamma,
        uniforms,
        states,
        actions,
    )
    return Episode(
        states=states[:length].copy(),
        actions=actions[:length].copy(),
        rewards=np.ones(length),
        discounted_return=float(ret),
    )


def env_stream(seed: int, env: CartPoleParams) -> np.random.Generator:
    """Generator keyed by (seed, environment parameters); stable across runs."""
    blob = struct.pack("<q9d", int(seed) % (1 << 62), *env.key())
    digest = hashlib.blake2b(blob, digest_size=16).digest()
    return np.random.default_rng(
        np.random.SeedSequence(int.from_bytes(digest, "little"))
    )


def estimate_J(
    policy: ParamVector,
    spec: ModelSpec,
    env_set,
    gamma: float,
    eval_episodes: int,
    seed: int,
) -> float:
    """Sum over the environment set of the mean discounted return.

    Each environment gets its own :func:`env_stream`, so estimates for
    disjoint sets add exactly and duplicated environments contribute
    identical terms.  Only the returns are needed, so the kernel is driven
    directly with reused buffers; the random-draw sequence is identical to
    per-episode :func:`rollout` calls on the same stream.
    """
    if eval_episodes < 1:
        raise ValueError("eval_episodes must be >= 1")
    hidden = check_policy_spec(spec)
    policy = np.ascontiguousarray(policy, dtype=np.float64)
    if policy.shape != (spec.param_count,):
        raise ValueError(
            f"policy vector has shape {policy.shape}, spec requires {spec.param_count}"
        )
    total = 0.0
    for env in env_set:
        rng = env_stream(seed, env)
        uniforms = rng.random((eval_episodes, 4 + env.max_steps))
        states = np.empty((env.max_steps, 4))
        actions = np.empty(env.max_steps, dtype=np.int64)
        returns = 0.0
        for episode in range(eval_episodes):
            _, ret = _kernel.rollout_core(
                policy, hidden,
                env.pole_length, env.gravity, env.cart_mass, env.pole_mass,
                env.force_magnitude, env.tau, env.theta_threshold, env.x_threshold,
                env.max_steps, gamma, uniforms[episode], states, actions,
            )
            returns += ret
        total += returns / eval_episodes
    return total


def mean_return(
    policy: ParamVector,
    spec: ModelSpec,
    env_set,
    gamma: float,
    eval_episodes: int,
    seed: int,
) -> float:
    """Per-environment mean of :func:`estimate_J`; the reporting form."""
    envs = list(env_set)
    if not envs:
        return 0.0
    return estimate_J(policy, spec, envs, gamma, eval_episodes, seed) / len(envs)
