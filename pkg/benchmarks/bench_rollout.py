#!/usr/bin/env python3
"""Benchmark the compiled rollout kernel against the pure-Python twin.

The episode loop is the hot kernel of every policy-gradient experiment
(policy forward + physics integration per step, millions of steps per
run); the supervised side is BLAS-bound numpy and is not duplicated.

Run:  python benchmarks/bench_rollout.py [--episodes N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from assistlearn.models import init_params
from assistlearn.rl import _rollout_py
from assistlearn.rl.cartpole import CartPoleParams
from assistlearn.rl.policy import policy_spec

try:
    from assistlearn import _speedups
except ImportError:
    _speedups = None


def bench(kernel, weights, env, episodes: int, seed: int = 123) -> tuple[float, float, int]:
    rng = np.random.default_rng(seed)
    states = np.empty((env.max_steps, 4))
    actions = np.empty(env.max_steps, dtype=np.int64)
    steps = 0
    checksum = 0.0
    started = time.perf_counter()
    for _ in range(episodes):
        uniforms = rng.random(4 + env.max_steps)
        length, ret = kernel.rollout_core(
            weights, 4, env.pole_length, env.gravity, env.cart_mass, env.pole_mass,
            env.force_magnitude, env.tau, env.theta_threshold, env.x_threshold,
            env.max_steps, 0.99, uniforms, states, actions,
        )
        steps += length
        checksum += ret
    return time.perf_counter() - started, checksum, steps


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=20000)
    args = parser.parse_args()

    spec = policy_spec(4)
    rng = np.random.default_rng(7)
    weights = init_params(spec, 7) + 0.3 * rng.standard_normal(spec.param_count)
    env = CartPoleParams(pole_length=1.5)

    results = {}
    for name, kernel in (("python", _rollout_py), ("compiled", _speedups)):
        if kernel is None:
            print(f"{name:9s} unavailable (extension not built)")
            continue
        elapsed, checksum, steps = bench(kernel, weights, env, args.episodes)
        results[name] = (elapsed, checksum, steps)
        print(
            f"{name:9s} {args.episodes} episodes, {steps} steps: {elapsed:.3f}s "
            f"({steps / elapsed / 1e6:.2f}M steps/s), checksum {checksum:.6f}"
        )

    if len(results) == 2:
        py, comp = results["python"], results["compiled"]
        agree = "agree" if py[1] == comp[1] and py[2] == comp[2] else "DISAGREE"
        print(f"speedup: {py[0] / comp[0]:.1f}x; outputs {agree}")


if __name__ == "__main__":
    main()
