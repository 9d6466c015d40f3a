"""Comparison algorithms: centralized SGD, learner-only SGD, two-party FedAvg.

All three consume the same (data, seed, iteration budget) inputs as the
assisted protocol and emit the same per-round metrics, so curves are
comparable round for round: one "round" of a baseline is
``total_local_iters`` plain SGD iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import Dataset, ModelSpec, ParamVector, accuracy, gradient, init_params, loss
from .protocol import (
    AssistConfig,
    DivergenceError,
    RoundMetrics,
    _split_iters,
    global_mean_loss,
    local_train,
)


@dataclass
class BaselineResult:
    algorithm: str
    final_params: ParamVector
    metrics: list[RoundMetrics]


def _test_metric(spec: ModelSpec, params: ParamVector, test_data: Dataset | None) -> float | None:
    if test_data is None or spec.kind == "quadratic":
        return None
    return accuracy(spec, params, test_data)


def run_centralized(
    config: AssistConfig,
    spec: ModelSpec,
    data: Dataset,
    test_data: Dataset | None = None,
    provider_spec: ModelSpec | None = None,
) -> BaselineResult:
    """Plain SGD on the pooled objective.

    For record-based models ``data`` is the union of both parties' records
    and the run reuses the protocol's training kernel verbatim.  When a
    distinct ``provider_spec`` is given (quadratic pair), the objective is
    the sum of the two centered quadratics instead.
    """
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[0])
    theta = init_params(spec, config.seed)

    def row(round_index: int, params: ParamVector) -> RoundMetrics:
        if provider_spec is not None:
            train = global_mean_loss(spec, data, provider_spec, data, params)
        else:
            train = loss(spec, params, data)
        return RoundMetrics(round_index, train, _test_metric(spec, params, test_data))

    metrics = [row(0, theta)]
    for r in range(1, config.rounds + 1):
        eta = config.eta_at(r)
        if provider_spec is not None:
            for t in range(config.total_local_iters):
                step = gradient(spec, theta, data) + gradient(provider_spec, theta, data)
                theta = theta - eta * step
                if not np.all(np.isfinite(theta)):
                    raise DivergenceError((r - 1) * config.total_local_iters + t + 1)
        else:
            packet = local_train(
                spec, theta, data, config.total_local_iters, eta,
                config.batch_size, config.total_local_iters or 1, rng,
            )
            theta = packet.checkpoints[-1].params
        metrics.append(row(r, theta))
    return BaselineResult("centralized", theta, metrics)


def run_learner_only(
    config: AssistConfig,
    spec: ModelSpec,
    learner_data: Dataset,
    test_data: Dataset | None = None,
) -> BaselineResult:
    """SGD on the learner's data alone; the train metric is the learner's
    own mean loss (a union loss would not be its training objective)."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[0])
    theta = init_params(spec, config.seed)

    def row(round_index: int, params: ParamVector) -> RoundMetrics:
        return RoundMetrics(
            round_index, loss(spec, params, learner_data), _test_metric(spec, params, test_data)
        )

    metrics = [row(0, theta)]
    for r in range(1, config.rounds + 1):
        packet = local_train(
            spec, theta, learner_data, config.total_local_iters, config.eta_at(r),
            config.batch_size, config.total_local_iters or 1, rng,
        )
        theta = packet.checkpoints[-1].params
        metrics.append(row(r, theta))
    return BaselineResult("learner_only", theta, metrics)


def run_fedavg(
    config: AssistConfig,
    spec: ModelSpec,
    learner_data: Dataset,
    provider_data: Dataset,
    test_data: Dataset | None = None,
    provider_spec: ModelSpec | None = None,
) -> BaselineResult:
    """Two-agent federated averaging with the protocol's iteration budgets.

    Per round each agent runs its local-iteration share of SGD from the
    current global model; the new global model is the dataset-size-weighted
    average of the two results (equal weights when both datasets are empty,
    as for the quadratic pair).  The train metric is the union mean loss of
    the post-aggregation model.
    """
    provider_spec = provider_spec or spec
    learner_rng, provider_rng = [
        np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(2)
    ]
    theta = init_params(spec, config.seed)
    pool = learner_data.n + provider_data.n
    learner_weight = learner_data.n / pool if pool else 0.5
    learner_iters, provider_iters = _split_iters(config, learner_data.n, provider_data.n)

    def row(round_index: int, params: ParamVector) -> RoundMetrics:
        train = global_mean_loss(spec, learner_data, provider_spec, provider_data, params)
        return RoundMetrics(round_index, train, _test_metric(spec, params, test_data))

    def agent_end(agent_spec, agent_data, iters, eta, rng, party, start):
        # an agent with no records (and no quadratic objective) cannot train
        if agent_data.n == 0 and agent_spec.kind != "quadratic":
            return start
        packet = local_train(
            agent_spec, start, agent_data, iters, eta,
            config.batch_size, max(iters, 1), rng, party=party,
        )
        return packet.checkpoints[-1].params

    metrics = [row(0, theta)]
    for r in range(1, config.rounds + 1):
        eta = config.eta_at(r)
        learner_end = agent_end(spec, learner_data, learner_iters, eta, learner_rng, "learner", theta)
        provider_end = agent_end(
            provider_spec, provider_data, provider_iters, eta, provider_rng, "provider", theta
        )
        theta = learner_weight * learner_end + (1.0 - learner_weight) * provider_end
        metrics.append(row(r, theta))
    return BaselineResult("fedavg", theta, metrics)
