"""Shared oracles and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from assistlearn.data import ClassSpec, GaussianMixtureSpec, generate_gaussian
from assistlearn.models import Dataset, ModelSpec, loss


def finite_difference_gradient(
    spec: ModelSpec, params: np.ndarray, data: Dataset, step: float = 1e-5, aggregate: str = "mean"
) -> np.ndarray:
    """Central-difference oracle for the loss gradient (independent of the
    analytic backprop path)."""
    fd = np.zeros_like(params)
    for i in range(params.size):
        up = params.copy()
        up[i] += step
        down = params.copy()
        down[i] -= step
        fd[i] = (loss(spec, up, data, aggregate) - loss(spec, down, data, aggregate)) / (2.0 * step)
    return fd


def random_dataset(rng: np.random.Generator, n: int, dim: int, classes: int) -> Dataset:
    return Dataset(rng.standard_normal((n, dim)), rng.integers(0, classes, size=n))


def two_gaussian_mixture(per_class: int, seed: int) -> GaussianMixtureSpec:
    """The two-class visualization task: N([-1,1], 1.5^2 I), N([1,-1], 1.5^2 I)."""
    return GaussianMixtureSpec(
        classes=(
            ClassSpec(mean=(-1.0, 1.0), sigma=1.5, count=per_class),
            ClassSpec(mean=(1.0, -1.0), sigma=1.5, count=per_class),
        ),
        seed=seed,
    )


def ten_class_mixture(per_class: int, seed: int, dim: int = 20, sigma: float = 0.8) -> GaussianMixtureSpec:
    """Ten unit-separated Gaussian classes in 20 dimensions."""
    classes = []
    for k in range(10):
        mean = [0.0] * dim
        mean[k] = 1.0
        classes.append(ClassSpec(mean=tuple(mean), sigma=sigma, count=per_class))
    return GaussianMixtureSpec(classes=tuple(classes), seed=seed)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_two_gaussian_data(per_class: int, seed: int) -> Dataset:
    return generate_gaussian(two_gaussian_mixture(per_class, seed))
