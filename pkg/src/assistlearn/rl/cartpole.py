"""Parameterized cart-pole environment and environment distributions.

The dynamics are the classic cart-pole equations integrated with an
explicit Euler step; ``pole_length`` is the half-length as in the classic
formulation and is the parameter the training environments vary.  A second
parameterization over ``force_magnitude`` stands in for engine-power style
variation.  Every step of a surviving episode is worth reward 1.0.

The single-step function here is the reference implementation; the batch
rollout kernels (compiled and pure-Python) inline the identical arithmetic
in the identical order so that all three agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWELVE_DEGREES = 12.0 * 2.0 * math.pi / 360.0


@dataclass(frozen=True)
class CartPoleParams:
    pole_length: float = 0.5  # half-length of the pole
    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    force_magnitude: float = 10.0
    tau: float = 0.02  # integration step, seconds
    theta_threshold: float = TWELVE_DEGREES
    x_threshold: float = 2.4
    max_steps: int = 200

    def __post_init__(self):
        numeric = (
            self.pole_length, self.gravity, self.cart_mass, self.pole_mass,
            self.force_magnitude, self.tau, self.theta_threshold, self.x_threshold,
        )
        if any(v <= 0 for v in numeric):
            raise ValueError("all cart-pole parameters must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def key(self) -> tuple[float, ...]:
        """Canonical numeric tuple; identifies the transition kernel."""
        return (
            self.pole_length, self.gravity, self.cart_mass, self.pole_mass,
            self.force_magnitude, self.tau, self.theta_threshold, self.x_threshold,
            float(self.max_steps),
        )


@dataclass(frozen=True)
class EnvState:
    x: float
    x_dot: float
    theta: float
    theta_dot: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.x_dot, self.theta, self.theta_dot])


def cartpole_step(
    params: CartPoleParams, state: EnvState, action: int
) -> tuple[EnvState, float, bool]:
    """One explicit Euler step; action 1 pushes right, 0 pushes left.

    Reward is 1.0 for the executed step.  ``done`` reports threshold
    violations of the new state; episode-length truncation at
    ``max_steps`` is the rollout loop's job (the state carries no counter).
    """
    force = params.force_magnitude if action == 1 else -params.force_magnitude
    cos_t = math.cos(state.theta)
    sin_t = math.sin(state.theta)
    total_mass = params.cart_mass + params.pole_mass
    polemass_length = params.pole_mass * params.pole_length
    temp = (force + polemass_length * state.theta_dot * state.theta_dot * sin_t) / total_mass
    theta_acc = (params.gravity * sin_t - cos_t * temp) / (
        params.pole_length * (4.0 / 3.0 - params.pole_mass * cos_t * cos_t / total_mass)
    )
    x_acc = temp - polemass_length * theta_acc * cos_t / total_mass

    new = EnvState(
        x=state.x + params.tau * state.x_dot,
        x_dot=state.x_dot + params.tau * x_acc,
        theta=state.theta + params.tau * state.theta_dot,
        theta_dot=state.theta_dot + params.tau * theta_acc,
    )
    done = abs(new.x) > params.x_threshold or abs(new.theta) > params.theta_threshold
    return new, 1.0, done


@dataclass(frozen=True)
class EnvDistribution:
    """Distribution over one scalar environment parameter.

    Kinds: ``uniform`` on (low, high); ``mixture`` drawing Beta(alpha, beta)
    with probability beta_prob and uniform(low, high) otherwise;
    ``affine_beta`` drawing scale * Beta(alpha, beta) + offset.
    """

    kind: str
    low: float = 0.0
    high: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    beta_prob: float = 0.0
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "mixture", "affine_beta"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind in ("uniform", "mixture") and not self.low < self.high:
            raise ValueError("uniform bounds require low < high")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("beta shape parameters must be positive")
        if not 0 <= self.beta_prob <= 1:
            raise ValueError("beta_prob must lie in [0, 1]")

    @staticmethod
    def uniform(low: float, high: float) -> "EnvDistribution":
        return EnvDistribution("uniform", low=low, high=high)

    @staticmethod
    def mixture(
        beta_prob: float, alpha: float, beta: float, low: float, high: float
    ) -> "EnvDistribution":
        return EnvDistribution(
            "mixture", low=low, high=high, alpha=alpha, beta=beta, beta_prob=beta_prob
        )

    @staticmethod
    def affine_beta(alpha: float, beta: float, scale: float, offset: float) -> "EnvDistribution":
        return EnvDistribution("affine_beta", alpha=alpha, beta=beta, scale=scale, offset=offset)

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "uniform":
            return float(rng.uniform(self.low, self.high))
        if self.kind == "affine_beta":
            return self.scale * float(rng.beta(self.alpha, self.beta)) + self.offset
        if rng.random() < self.beta_prob:
            return float(rng.beta(self.alpha, self.beta))
        return float(rng.uniform(self.low, self.high))


def sample_environments(
    dist: EnvDistribution,
    n: int,
    seed: int,
    parameter: str = "pole_length",
    base: CartPoleParams | None = None,
) -> list[CartPoleParams]:
    """Draw ``n`` environments varying only ``parameter``; deterministic per seed."""
    if parameter not in ("pole_length", "force_magnitude"):
        raise ValueError(f"unsupported environment parameter {parameter!r}")
    base = base or CartPoleParams()
    rng = np.random.default_rng(seed)
    return [replace(base, **{parameter: dist.draw(rng)}) for _ in range(n)]
