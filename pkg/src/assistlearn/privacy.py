"""Differentially private gradient perturbation and strong composition.

Per step, gradients are rescaled to norm at most the clipping bound and
perturbed with isotropic Gaussian noise of per-coordinate variance
2 * eps^-2 * log(1/delta), giving (eps, delta)-DP per SGD step for unit
sensitivity.  Over T steps with batch fraction q, strong composition yields
(eps', delta')-DP with eps' = 2 q eps sqrt(T log(1/delta)) and
delta' = q T delta.

Transmitted full-dataset loss values are deliberately NOT noised: only the
gradient updates are privatized, which matches the accounting above but
means the exchanged scalars themselves carry no formal guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrivacySpec:
    """Per-step (epsilon, delta) target and the gradient clipping norm."""

    epsilon: float
    delta: float
    clip_norm: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")

    @property
    def noise_variance(self) -> float:
        return 2.0 * math.log(1.0 / self.delta) / self.epsilon**2


@dataclass(frozen=True)
class CompositionResult:
    eps_prime: float
    delta_prime: float


def dp_perturb(grad: np.ndarray, spec: PrivacySpec, rng: np.random.Generator) -> np.ndarray:
    """Clip ``grad`` to norm <= clip_norm, then add i.i.d. Gaussian noise."""
    norm = float(np.linalg.norm(grad))
    scale = min(1.0, spec.clip_norm / norm) if norm > 0 else 1.0
    noise = rng.normal(0.0, math.sqrt(spec.noise_variance), size=grad.shape)
    return grad * scale + noise


def compose(spec: PrivacySpec, steps: int, batch_fraction: float) -> CompositionResult:
    """Strong-composition privacy spent by ``steps`` noisy SGD steps."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if not 0 < batch_fraction <= 1:
        raise ValueError("batch_fraction must lie in (0, 1]")
    eps_prime = 2.0 * batch_fraction * spec.epsilon * math.sqrt(steps * math.log(1.0 / spec.delta))
    delta_prime = batch_fraction * steps * spec.delta
    return CompositionResult(eps_prime, delta_prime)
