"""Assisted policy-gradient training and its comparison algorithms.

Mirror of the supervised protocol with argmin replaced by argmax and the
exchanged scalar replaced by the sender's environment-set return estimate:
each round the learner runs local REINFORCE ascent, sends sampled (policy,
own-set return) checkpoints, the provider resumes from the argmax of the
combined estimate and sends its own trajectory back, and the learner's
argmax becomes the round output.  The Monte-Carlo estimates are accepted
as-is (no re-evaluation); argmax ties break toward the smallest iteration
index.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..baselines import BaselineResult
from ..data import round_half_up
from ..models import ModelSpec, ParamVector, init_params
from ..protocol import DivergenceError, RoundMetrics, TrajectoryPacket, checkpoint_indices
from ..seeding import derive_seed
from .cartpole import CartPoleParams
from .policy import pg_gradient
from .rollout import estimate_J, mean_return, rollout


@dataclass(frozen=True)
class RLAssistConfig:
    """Round/iteration budget, REINFORCE hyperparameters, and the two
    parties' environment sets.

    ``total_local_iters`` is the per-round budget, split between the parties
    in proportion to their environment-set sizes (half-up).
    """

    rounds: int
    total_local_iters: int
    eta: float
    learner_envs: tuple[CartPoleParams, ...]
    provider_envs: tuple[CartPoleParams, ...]
    batch_size: int = 32
    sample_period: int = 4
    gamma: float = 0.99
    eval_episodes: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1 or self.total_local_iters < 0:
            raise ValueError("rounds must be >= 1 and total_local_iters >= 0")
        if self.eta <= 0 or self.batch_size < 1 or self.sample_period < 1:
            raise ValueError("eta, batch_size, and sample_period must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be >= 1")
        if not self.learner_envs or not self.provider_envs:
            raise ValueError("both parties need at least one environment")

    def split_iters(self) -> tuple[int, int]:
        n_l, n_p = len(self.learner_envs), len(self.provider_envs)
        learner_iters = round_half_up(self.total_local_iters * n_l / (n_l + n_p))
        return learner_iters, self.total_local_iters - learner_iters


@dataclass(frozen=True)
class PolicyCheckpoint:
    """One transmitted trajectory point: ``local_return`` is the sender's
    own-environment-set return estimate at ``params``."""

    iter_index: int
    params: ParamVector
    local_return: float


@dataclass
class RLRoundRecord:
    round: int
    global_return_before: float
    provider_init_global_return: float
    global_return_after: float
    selected_party: str
    selected_iter_index: int
    params: ParamVector
    wall_s: float = 0.0


@dataclass
class RLAssistResult:
    best_params: ParamVector
    records: list[RLRoundRecord]
    metrics: list[RoundMetrics]
    config: RLAssistConfig


def _pg_iteration(
    spec: ModelSpec,
    params: ParamVector,
    envs,
    batch_size: int,
    gamma: float,
    eta: float,
    rng: np.random.Generator,
    iteration: int,
    party: str = "",
) -> ParamVector:
    episodes = []
    for _ in range(batch_size):
        env = envs[rng.integers(len(envs))]
        episodes.append(rollout(params, spec, env, gamma, rng))
    new = params + eta * pg_gradient(params, spec, episodes)
    if not np.all(np.isfinite(new)):
        raise DivergenceError(iteration, party)
    return new


def _metrics_row(
    config: RLAssistConfig,
    spec: ModelSpec,
    round_index: int,
    params: ParamVector,
    train_envs,
    test_env_sets,
    eval_seed: int,
    test_seed: int,
) -> RoundMetrics:
    row = RoundMetrics(
        round=round_index,
        train_metric=mean_return(
            params, spec, train_envs, config.gamma, config.eval_episodes, eval_seed
        ),
    )
    for slot, envs in enumerate(test_env_sets or []):
        value = mean_return(params, spec, envs, config.gamma, config.eval_episodes, test_seed)
        if slot == 0:
            row.test_metric = value
        elif slot == 1:
            row.test_metric_2 = value
    return row


def local_pg_train(
    spec: ModelSpec,
    start: ParamVector,
    envs,
    iters: int,
    eta: float,
    batch_size: int,
    sample_period: int,
    gamma: float,
    eval_episodes: int,
    train_rng: np.random.Generator,
    eval_seed: int,
    party: str = "learner",
    round_index: int = 1,
) -> TrajectoryPacket:
    """REINFORCE ascent with trajectory sampling; the RL twin of local SGD
    training.  Checkpoints carry the sender's own-set return estimate."""
    wanted = set(checkpoint_indices(iters, sample_period))
    params = np.array(start, dtype=np.float64)
    checkpoints = []
    for t in range(iters + 1):
        if t in wanted:
            estimate = estimate_J(params, spec, envs, gamma, eval_episodes, eval_seed)
            checkpoints.append(PolicyCheckpoint(t, params.copy(), estimate))
        if t == iters:
            break
        params = _pg_iteration(
            spec, params, envs, batch_size, gamma, eta, train_rng, t + 1, party
        )
    return TrajectoryPacket(party=party, round=round_index, checkpoints=tuple(checkpoints))


def select_best_policy(
    packet: TrajectoryPacket,
    own_spec: ModelSpec,
    own_envs,
    gamma: float,
    eval_episodes: int,
    eval_seed: int,
) -> tuple[PolicyCheckpoint, float]:
    """Argmax of transmitted-plus-own return estimates; ties break toward
    the smallest iteration index."""
    best = None
    best_value = -np.inf
    for cp in packet.checkpoints:
        value = cp.local_return + estimate_J(
            cp.params, own_spec, own_envs, gamma, eval_episodes, eval_seed
        )
        if value > best_value:
            best, best_value = cp, value
    return best, best_value


def run_assist_pg(
    config: RLAssistConfig,
    spec: ModelSpec,
    test_env_sets=None,
) -> RLAssistResult:
    """Run the assisted policy-gradient protocol.

    ``test_env_sets`` is an optional sequence of up to two environment
    lists; per-round metrics then include the mean return on each.  The
    best policy is the round output with the largest combined return
    estimate, ties toward the earliest round.
    """
    learner_rng, provider_rng = [
        np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(2)
    ]
    eval_seed = derive_seed(config.seed, "selection-eval")
    test_seed = derive_seed(config.seed, "test-eval")
    theta = init_params(spec, config.seed)
    learner_iters, provider_iters = config.split_iters()
    union_envs = list(config.learner_envs) + list(config.provider_envs)

    def metrics_row(round_index: int, params: ParamVector) -> RoundMetrics:
        return _metrics_row(
            config, spec, round_index, params, union_envs, test_env_sets, eval_seed, test_seed
        )

    records: list[RLRoundRecord] = []
    metrics = [metrics_row(0, theta)]
    for r in range(1, config.rounds + 1):
        started = time.perf_counter()
        learner_packet = local_pg_train(
            spec, theta, config.learner_envs, learner_iters, config.eta,
            config.batch_size, config.sample_period, config.gamma, config.eval_episodes,
            learner_rng, eval_seed, party="learner", round_index=r,
        )
        before = learner_packet.checkpoints[0].local_return + estimate_J(
            theta, spec, config.provider_envs, config.gamma, config.eval_episodes, eval_seed
        )
        provider_start, provider_init = select_best_policy(
            learner_packet, spec, config.provider_envs, config.gamma,
            config.eval_episodes, eval_seed,
        )
        provider_packet = local_pg_train(
            spec, provider_start.params, config.provider_envs, provider_iters, config.eta,
            config.batch_size, config.sample_period, config.gamma, config.eval_episodes,
            provider_rng, eval_seed, party="provider", round_index=r,
        )
        output, after = select_best_policy(
            provider_packet, spec, config.learner_envs, config.gamma,
            config.eval_episodes, eval_seed,
        )
        theta = output.params
        if output.iter_index > 0:
            origin = ("provider", output.iter_index)
        else:
            origin = ("learner", provider_start.iter_index)
        records.append(
            RLRoundRecord(
                round=r,
                global_return_before=before,
                provider_init_global_return=provider_init,
                global_return_after=after,
                selected_party=origin[0],
                selected_iter_index=origin[1],
                params=theta.copy(),
                wall_s=time.perf_counter() - started,
            )
        )
        metrics.append(metrics_row(r, theta))

    best = max(records, key=lambda rec: (rec.global_return_after, -rec.round))
    return RLAssistResult(
        best_params=best.params.copy(), records=records, metrics=metrics, config=config
    )


def _run_pg_plain(
    config: RLAssistConfig,
    spec: ModelSpec,
    train_envs,
    iters_per_round: int,
    rng: np.random.Generator,
    algorithm: str,
    test_env_sets,
) -> BaselineResult:
    eval_seed = derive_seed(config.seed, "selection-eval")
    test_seed = derive_seed(config.seed, "test-eval")
    theta = init_params(spec, config.seed)

    def metrics_row(round_index: int, params: ParamVector) -> RoundMetrics:
        return _metrics_row(
            config, spec, round_index, params, train_envs, test_env_sets, eval_seed, test_seed
        )

    metrics = [metrics_row(0, theta)]
    for r in range(1, config.rounds + 1):
        for t in range(iters_per_round):
            theta = _pg_iteration(
                spec, theta, train_envs, config.batch_size, config.gamma,
                config.eta, rng, (r - 1) * iters_per_round + t + 1, algorithm,
            )
        metrics.append(metrics_row(r, theta))
    return BaselineResult(algorithm, theta, metrics)


def run_pg_baselines(
    config: RLAssistConfig,
    spec: ModelSpec,
    test_env_sets=None,
    algorithms=("centralized", "learner_only", "fedavg"),
) -> dict[str, BaselineResult]:
    """Comparison runs sharing the protocol's budgets.

    centralized trains on the union of both environment sets, learner_only
    on the learner's set; fedavg averages two per-party policies each round,
    weighted by environment-set cardinality.  One baseline round spends the
    protocol's full per-round iteration budget.
    """
    results: dict[str, BaselineResult] = {}
    union_envs = list(config.learner_envs) + list(config.provider_envs)
    for algorithm in algorithms:
        learner_rng, provider_rng = [
            np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(2)
        ]
        if algorithm == "centralized":
            results[algorithm] = _run_pg_plain(
                config, spec, union_envs, config.total_local_iters,
                learner_rng, algorithm, test_env_sets,
            )
        elif algorithm == "learner_only":
            results[algorithm] = _run_pg_plain(
                config, spec, list(config.learner_envs), config.total_local_iters,
                learner_rng, algorithm, test_env_sets,
            )
        elif algorithm == "fedavg":
            results[algorithm] = _run_fedavg_pg(
                config, spec, learner_rng, provider_rng, test_env_sets
            )
        else:
            raise ValueError(f"unknown PG baseline {algorithm!r}")
    return results


def _run_fedavg_pg(
    config: RLAssistConfig,
    spec: ModelSpec,
    learner_rng: np.random.Generator,
    provider_rng: np.random.Generator,
    test_env_sets,
) -> BaselineResult:
    eval_seed = derive_seed(config.seed, "selection-eval")
    test_seed = derive_seed(config.seed, "test-eval")
    theta = init_params(spec, config.seed)
    union_envs = list(config.learner_envs) + list(config.provider_envs)
    learner_iters, provider_iters = config.split_iters()
    n_l, n_p = len(config.learner_envs), len(config.provider_envs)
    learner_weight = n_l / (n_l + n_p)

    def metrics_row(round_index: int, params: ParamVector) -> RoundMetrics:
        return _metrics_row(
            config, spec, round_index, params, union_envs, test_env_sets, eval_seed, test_seed
        )

    metrics = [metrics_row(0, theta)]
    for r in range(1, config.rounds + 1):
        learner_end = theta
        for t in range(learner_iters):
            learner_end = _pg_iteration(
                spec, learner_end, config.learner_envs, config.batch_size,
                config.gamma, config.eta, learner_rng, t + 1, "fedavg-learner",
            )
        provider_end = theta
        for t in range(provider_iters):
            provider_end = _pg_iteration(
                spec, provider_end, config.provider_envs, config.batch_size,
                config.gamma, config.eta, provider_rng, t + 1, "fedavg-provider",
            )
        theta = learner_weight * learner_end + (1.0 - learner_weight) * provider_end
        metrics.append(metrics_row(r, theta))
    return BaselineResult("fedavg", theta, metrics)
