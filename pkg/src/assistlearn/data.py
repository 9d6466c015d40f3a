"""Synthetic data generation and the learner/provider partitioner.

The partitioner implements the two splitting recipes used throughout the
experiments: an explicit per-class fraction map (the two-Gaussian
visualization task) and the (rho, gamma_L) recipe, where rho fixes the
learner-to-provider size ratio and gamma_L the fraction of learner records
drawn from a single primary class.  All operations are pure functions of
their inputs and a seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .models import Dataset


def round_half_up(x: float) -> int:
    """Deterministic count rounding with upward ties: 25.5 -> 26."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class ClassSpec:
    """One mixture component: isotropic Gaussian around ``mean``."""

    mean: tuple[float, ...]
    sigma: float
    count: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.count < 0:
            raise ValueError("count must be nonnegative")


@dataclass(frozen=True)
class GaussianMixtureSpec:
    classes: tuple[ClassSpec, ...]
    seed: int = 0

    def __post_init__(self):
        dims = {len(c.mean) for c in self.classes}
        if len(dims) > 1:
            raise ValueError("all class means must share one dimension")


@dataclass(frozen=True)
class PartitionSpec:
    """(rho, gamma_L) partition recipe.

    rho = |learner| / |provider|; gamma_L is the fraction of the learner's
    records drawn from ``primary_class``.  gamma_L = 1 is admitted (the
    fully imbalanced learner used in the experiments).
    """

    rho: float
    gamma_l: float
    primary_class: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if not 0 < self.gamma_l <= 1:
            raise ValueError("gamma_l must lie in (0, 1]")


def generate_gaussian(spec: GaussianMixtureSpec) -> Dataset:
    """Draw the per-class counts; deterministic for a fixed seed."""
    rng = np.random.default_rng(spec.seed)
    blocks = []
    labels = []
    for cls_index, cls in enumerate(spec.classes):
        mean = np.asarray(cls.mean, dtype=np.float64)
        draws = mean + cls.sigma * rng.standard_normal((cls.count, mean.size))
        blocks.append(draws)
        labels.append(np.full(cls.count, cls_index, dtype=np.int64))
    if not blocks:
        raise ValueError("mixture spec has no classes")
    return Dataset(np.concatenate(blocks, axis=0), np.concatenate(labels))


def split_by_class_fraction(
    data: Dataset, learner_fraction_per_class: dict[int, float], seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Per class, round(fraction * count) records go to the learner.

    Records are chosen uniformly without replacement; classes absent from
    the map contribute nothing to the learner.  The two outputs partition
    the input multiset.
    """
    for cls, frac in learner_fraction_per_class.items():
        if not 0 <= frac <= 1:
            raise ValueError(f"fraction for class {cls} outside [0, 1]")
    rng = np.random.default_rng(seed)
    learner_idx = []
    provider_idx = []
    for cls in np.unique(data.labels):
        pool = np.flatnonzero(data.labels == cls)
        frac = learner_fraction_per_class.get(int(cls), 0.0)
        take = round_half_up(frac * pool.size)
        chosen = np.sort(rng.choice(pool, size=take, replace=False))
        learner_idx.append(chosen)
        provider_idx.append(np.setdiff1d(pool, chosen))
    learner = np.sort(np.concatenate(learner_idx)) if learner_idx else np.zeros(0, dtype=np.int64)
    provider = np.sort(np.concatenate(provider_idx)) if provider_idx else np.zeros(0, dtype=np.int64)
    return data.subset(learner), data.subset(provider)


def partition(data: Dataset, spec: PartitionSpec) -> tuple[Dataset, Dataset]:
    """Split ``data`` into (learner, provider) by the (rho, gamma_L) recipe.

    |learner| = round(N * rho / (1 + rho)).  The learner draws
    round(gamma_L * |learner|) records from the primary class; the remainder
    is spread over the other classes in equal per-class quotas (half-up,
    with any rounding deficit or surplus absorbed by the class with the
    largest remaining pool), records chosen uniformly without replacement
    within each class.  The provider receives the complement, so the union
    is exactly the input multiset.
    """
    labels = data.labels
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("partition requires at least two classes")
    if spec.primary_class not in classes:
        raise ValueError(f"primary class {spec.primary_class} absent from data")
    n_total = data.n
    n_learner = round_half_up(n_total * spec.rho / (1.0 + spec.rho))
    n_primary = min(round_half_up(spec.gamma_l * n_learner), n_learner)

    pools = {int(c): np.flatnonzero(labels == c) for c in classes}
    if n_primary > pools[spec.primary_class].size:
        raise ValueError(
            f"learner needs {n_primary} primary-class records, "
            f"only {pools[spec.primary_class].size} available"
        )

    others = [int(c) for c in classes if c != spec.primary_class]
    fill = n_learner - n_primary
    if fill > sum(pools[c].size for c in others):
        raise ValueError("secondary classes exhausted while filling the learner draw")
    targets = {c: round_half_up(fill / len(others)) for c in others}
    largest = max(others, key=lambda c: (pools[c].size, -c))
    targets[largest] += fill - sum(targets.values())
    # cap quotas at availability, pushing overflow to the roomiest classes
    while True:
        over = [c for c in others if targets[c] > pools[c].size]
        if not over:
            break
        for c in over:
            excess = targets[c] - pools[c].size
            targets[c] = pools[c].size
            spare = max(
                (d for d in others if targets[d] < pools[d].size),
                key=lambda d: (pools[d].size - targets[d], -d),
            )
            targets[spare] += excess
    if any(t < 0 for t in targets.values()):
        raise ValueError("per-class quota went negative; partition sizes inconsistent")

    rng = np.random.default_rng(spec.seed)
    chosen = [rng.choice(pools[spec.primary_class], size=n_primary, replace=False)]
    chosen.extend(rng.choice(pools[c], size=targets[c], replace=False) for c in others)
    learner_idx = np.sort(np.concatenate(chosen).astype(np.int64))
    mask = np.zeros(n_total, dtype=bool)
    mask[learner_idx] = True
    provider_idx = np.flatnonzero(~mask)
    return data.subset(learner_idx), data.subset(provider_idx)


def load_csv(path) -> Dataset:
    """Read a labeled dataset: UTF-8, comma-separated, header row required,
    one column named ``label`` holding integer class indices."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: missing header row") from None
        if "label" not in header:
            raise ValueError(f"{path}: no 'label' column in header")
        label_col = header.index("label")
        feature_cols = [i for i in range(len(header)) if i != label_col]
        features = []
        labels = []
        for row_num, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValueError(f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}")
            values = []
            for i in feature_cols:
                try:
                    values.append(float(row[i]))
                except ValueError:
                    raise ValueError(
                        f"{path}: row {row_num}, column {header[i]!r}: not a number: {row[i]!r}"
                    ) from None
            try:
                labels.append(int(row[label_col]))
            except ValueError:
                raise ValueError(
                    f"{path}: row {row_num}, column 'label': not an integer: {row[label_col]!r}"
                ) from None
            features.append(values)
    dim = len(feature_cols)
    if not features:
        return Dataset.empty(dim)
    return Dataset(np.asarray(features), np.asarray(labels))
