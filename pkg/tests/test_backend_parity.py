"""The compiled rollout kernel and the pure-Python twin must agree bit for
bit: both use libm scalar math on IEEE doubles in the same expression order,
and the build uses no fused-multiply-add or fast-math flags."""

import numpy as np
import pytest

from assistlearn.models import init_params
from assistlearn.rl import _rollout_py
from assistlearn.rl.cartpole import CartPoleParams
from assistlearn.rl.policy import policy_spec
from assistlearn.rl.rollout import rollout_backend

speedups = pytest.importorskip(
    "assistlearn._speedups", reason="compiled extension not built"
)

SPEC = policy_spec(4)


def run_kernel(kernel, weights, env, uniforms, gamma=0.99):
    states = np.empty((env.max_steps, 4))
    actions = np.empty(env.max_steps, dtype=np.int64)
    length, ret = kernel.rollout_core(
        weights, 4, env.pole_length, env.gravity, env.cart_mass, env.pole_mass,
        env.force_magnitude, env.tau, env.theta_threshold, env.x_threshold,
        env.max_steps, gamma, uniforms, states, actions,
    )
    return length, ret, states[:length].copy(), actions[:length].copy()


def test_episodes_identical_across_backends():
    rng = np.random.default_rng(99)
    for trial in range(300):
        weights = init_params(SPEC, trial) + rng.standard_normal(SPEC.param_count)
        env = CartPoleParams(
            pole_length=float(rng.uniform(0.05, 5.0)),
            force_magnitude=float(rng.uniform(5.0, 40.0)),
        )
        uniforms = rng.random(4 + env.max_steps)
        compiled = run_kernel(speedups, weights, env, uniforms)
        python = run_kernel(_rollout_py, weights, env, uniforms)
        assert compiled[0] == python[0], f"lengths differ on trial {trial}"
        assert compiled[1] == python[1], f"returns differ on trial {trial}"
        np.testing.assert_array_equal(compiled[2], python[2])
        np.testing.assert_array_equal(compiled[3], python[3])


def test_extreme_logits_clamp_identically():
    # drive the logit gap past the clamp threshold in both directions
    for sign in (60.0, -60.0):
        weights = np.zeros(SPEC.param_count)
        weights[-2] = sign  # output bias of action 0
        env = CartPoleParams(max_steps=20)
        uniforms = np.linspace(0.0, 0.999, 24)
        compiled = run_kernel(speedups, weights, env, uniforms)
        python = run_kernel(_rollout_py, weights, env, uniforms)
        assert compiled[1] == python[1]
        np.testing.assert_array_equal(compiled[3], python[3])


def test_active_backend_matches_environment():
    import os

    forced = os.environ.get("ASSISTLEARN_PURE_PYTHON", "") not in ("", "0")
    assert rollout_backend() == ("python" if forced else "compiled")


_PROBE = """
from assistlearn.rl import rollout_backend
from assistlearn.rl.assist_pg import RLAssistConfig, run_assist_pg
from assistlearn.rl.cartpole import CartPoleParams
from assistlearn.rl.policy import policy_spec

config = RLAssistConfig(
    rounds=1, total_local_iters=2, eta=5e-3,
    learner_envs=(CartPoleParams(pole_length=4.5),),
    provider_envs=(CartPoleParams(pole_length=0.5),),
    batch_size=3, sample_period=1, eval_episodes=2, seed=7,
)
result = run_assist_pg(config, policy_spec(4))
print(rollout_backend())
print(repr([m.train_metric for m in result.metrics]))
print(repr(result.best_params.tolist()))
"""


def _run_probe(force_python: bool):
    import os
    import subprocess
    import sys

    env = dict(os.environ)
    if force_python:
        env["ASSISTLEARN_PURE_PYTHON"] = "1"
    else:
        env.pop("ASSISTLEARN_PURE_PYTHON", None)
    proc = subprocess.run(
        [sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True
    )
    return proc.stdout.splitlines()


def test_env_var_forces_python_backend_with_identical_results():
    compiled = _run_probe(force_python=False)
    python = _run_probe(force_python=True)
    assert compiled[0] == "compiled"
    assert python[0] == "python"
    assert compiled[1:] == python[1:]
