"""Differentiable model kernels shared by every training algorithm.

Three model kinds are supported:

* ``quadratic`` -- f(theta) = 0.5 * ||theta - c||^2 around a fixed center c,
  used for the two-party regression example and the theory checks.  The
  dataset argument is ignored.
* ``logistic`` -- multinomial softmax regression (the 2-class case covers
  binary problems).
* ``mlp`` -- feed-forward net with tanh hidden layers and a softmax output.

Parameters are always a flat 1-D float64 vector so that trajectory packets,
checkpoint arithmetic, and the protocol layer stay model-agnostic.
Losses can be aggregated as the per-record ``sum`` (the form exchanged by
the two-party protocol, which makes the union decomposition
loss(D1 ++ D2) = loss(D1) + loss(D2) exact) or as the ``mean`` used for
reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Flat float64 vector; length is fixed by the owning ModelSpec.
ParamVector = np.ndarray

MODEL_KINDS = ("quadratic", "logistic", "mlp")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description from which parameter layout is derived."""

    kind: str
    input_dim: int
    num_classes: int = 2
    hidden_sizes: tuple[int, ...] = ()
    quadratic_center: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if self.kind == "quadratic":
            if self.quadratic_center is None:
                raise ValueError("quadratic kind requires quadratic_center")
            if len(self.quadratic_center) != self.input_dim:
                raise ValueError("quadratic_center length must equal input_dim")
        else:
            if self.num_classes < 2:
                raise ValueError("num_classes must be at least 2")
            if any(h < 1 for h in self.hidden_sizes):
                raise ValueError("hidden sizes must be positive")
        if self.kind == "logistic" and self.hidden_sizes:
            raise ValueError("logistic kind takes no hidden layers")

    @property
    def layer_dims(self) -> list[int]:
        return [self.input_dim, *self.hidden_sizes, self.num_classes]

    @property
    def param_count(self) -> int:
        if self.kind == "quadratic":
            return self.input_dim
        dims = self.layer_dims
        return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))

    @property
    def center(self) -> np.ndarray:
        if self.quadratic_center is None:
            raise ValueError("spec has no quadratic center")
        return np.asarray(self.quadratic_center, dtype=np.float64)


@dataclass
class Dataset:
    """Labeled feature records: an (n, d) float matrix plus n class labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels length must match the number of rows")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx])

    @staticmethod
    def empty(dim: int) -> "Dataset":
        return Dataset(np.zeros((0, dim)), np.zeros(0, dtype=np.int64))

    @staticmethod
    def concat(first: "Dataset", second: "Dataset") -> "Dataset":
        return Dataset(
            np.concatenate([first.features, second.features], axis=0),
            np.concatenate([first.labels, second.labels], axis=0),
        )


def init_params(spec: ModelSpec, seed: int) -> ParamVector:
    """Deterministic initialization: zeros for quadratic/logistic, uniform
    Glorot draws for mlp weights (biases zero)."""
    if spec.kind in ("quadratic", "logistic"):
        return np.zeros(spec.param_count)
    rng = np.random.default_rng(seed)
    dims = spec.layer_dims
    chunks = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)


def unpack_layers(spec: ModelSpec, params: ParamVector) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat vector into per-layer (W, b) views, W of shape (fan_in, fan_out)."""
    _check_params(spec, params)
    dims = spec.layer_dims
    layers = []
    offset = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        w = params[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = params[offset : offset + fan_out]
        offset += fan_out
        layers.append((w, b))
    return layers


def _check_params(spec: ModelSpec, params: ParamVector) -> None:
    if params.shape != (spec.param_count,):
        raise ValueError(
            f"parameter vector has length {params.shape}, spec requires {spec.param_count}"
        )


def _check_data(spec: ModelSpec, data: Dataset) -> None:
    if data.n == 0:
        raise ValueError(f"{spec.kind} model requires a nonempty dataset")
    if data.dim != spec.input_dim:
        raise ValueError(f"dataset has dim {data.dim}, spec requires {spec.input_dim}")
    if data.n and (data.labels.min() < 0 or data.labels.max() >= spec.num_classes):
        raise ValueError("labels out of range for spec.num_classes")


def _forward(spec: ModelSpec, params: ParamVector, features: np.ndarray):
    """Returns (activations per layer, logits).  activations[0] is the input."""
    layers = unpack_layers(spec, params)
    acts = [features]
    a = features
    for w, b in layers[:-1]:
        a = np.tanh(a @ w + b)
        acts.append(a)
    w, b = layers[-1]
    return acts, a @ w + b


def scores(spec: ModelSpec, params: ParamVector, data: Dataset) -> np.ndarray:
    """Class logits, shape (n, num_classes)."""
    if spec.kind == "quadratic":
        raise ValueError("quadratic kind has no class scores")
    _check_data(spec, data)
    _, logits = _forward(spec, params, data.features)
    return logits


def loss(spec: ModelSpec, params: ParamVector, data: Dataset, aggregate: str = "mean") -> float:
    """Model loss.

    quadratic: 0.5 * ||theta - c||^2 (dataset ignored, aggregate irrelevant).
    logistic/mlp: softmax cross-entropy over ``data``, aggregated as the
    per-record mean (reporting form) or sum (the exchanged form).
    """
    if aggregate not in ("mean", "sum"):
        raise ValueError("aggregate must be 'mean' or 'sum'")
    if spec.kind == "quadratic":
        _check_params(spec, params)
        diff = params - spec.center
        return 0.5 * float(diff @ diff)
    logits = scores(spec, params, data)
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    per_record = logsumexp - logits[np.arange(data.n), data.labels]
    total = float(per_record.sum())
    return total if aggregate == "sum" else total / data.n


def gradient(spec: ModelSpec, params: ParamVector, data: Dataset, aggregate: str = "mean") -> ParamVector:
    """Analytic gradient of :func:`loss` with the matching aggregation."""
    if aggregate not in ("mean", "sum"):
        raise ValueError("aggregate must be 'mean' or 'sum'")
    if spec.kind == "quadratic":
        _check_params(spec, params)
        return params - spec.center
    _check_data(spec, data)
    acts, logits = _forward(spec, params, data.features)
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    probs = expd / expd.sum(axis=1, keepdims=True)
    delta = probs
    delta[np.arange(data.n), data.labels] -= 1.0
    if aggregate == "mean":
        delta = delta / data.n
    layers = unpack_layers(spec, params)
    grads: list[np.ndarray] = []
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        a_prev = acts[i]
        gw = a_prev.T @ delta
        gb = delta.sum(axis=0)
        grads.append(np.concatenate([gw.reshape(-1), gb]))
        if i > 0:
            # propagate through tanh of the previous hidden activation
            delta = (delta @ w.T) * (1.0 - acts[i] ** 2)
    return np.concatenate(grads[::-1])


def accuracy(spec: ModelSpec, params: ParamVector, data: Dataset) -> float:
    """Fraction of records whose argmax score matches the label.

    Argmax ties break toward the smallest class index.
    """
    logits = scores(spec, params, data)
    predicted = np.argmax(logits, axis=1)
    return float(np.mean(predicted == data.labels))
