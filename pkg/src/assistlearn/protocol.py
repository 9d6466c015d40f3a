"""Two-party trajectory-exchange training (assisted SGD).

Each assistance round is one learner -> provider -> learner exchange:

1. the learner runs local SGD from the previous round's output and sends a
   sampled trajectory of (iteration, parameters, full-dataset sum loss)
   checkpoints;
2. the provider scores every received checkpoint by adding its own
   full-dataset sum loss (the exact union-loss decomposition), starts local
   SGD from the argmin, and sends its own sampled trajectory back;
3. the learner scores the provider's checkpoints the same way and keeps the
   argmin as the round output.

Checkpoint index sets always contain iteration 0 and the final iterate, so
with full-batch gradients the union loss of the round outputs is
non-increasing by construction.  Raw records never cross the party
boundary; the only transmitted object is :class:`TrajectoryPacket`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .data import round_half_up
from .models import Dataset, ModelSpec, ParamVector, accuracy, gradient, init_params, loss
from .privacy import PrivacySpec, dp_perturb

PARTIES = ("learner", "provider")


class DivergenceError(RuntimeError):
    """Raised when training produces non-finite parameters."""

    def __init__(self, iteration: int, party: str = ""):
        self.iteration = iteration
        self.party = party
        where = f" in {party} training" if party else ""
        super().__init__(f"non-finite parameters at local iteration {iteration}{where}")


@dataclass(frozen=True)
class Checkpoint:
    """One transmitted trajectory point.

    ``local_loss`` is the sender's full-dataset sum loss at ``params``,
    regardless of the batch size used for training.
    """

    iter_index: int
    params: ParamVector
    local_loss: float


@dataclass(frozen=True)
class TrajectoryPacket:
    """Everything one party sends to the other in a round."""

    party: str
    round: int
    checkpoints: tuple[Checkpoint, ...]

    def __post_init__(self):
        if self.party not in PARTIES:
            raise ValueError(f"unknown party {self.party!r}")
        if not self.checkpoints:
            raise ValueError("packet must contain at least one checkpoint")
        indices = [cp.iter_index for cp in self.checkpoints]
        if indices[0] != 0:
            raise ValueError("packet must include the iteration-0 checkpoint")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("checkpoint indices must be strictly increasing")


@dataclass(frozen=True)
class AssistConfig:
    """Round/iteration budget and SGD hyperparameters shared by both parties.

    ``eta_decay`` gives the per-round schedule eta_r = eta * eta_decay**r
    with rounds counted from 1; the default decay of 1.0 is a constant rate.
    ``split`` is either "proportional" (local iterations assigned in
    proportion to dataset sizes, half-up) or an explicit (T, T') pair.
    ``batch_size`` of None means deterministic full-gradient steps.
    """

    rounds: int
    total_local_iters: int
    eta: float
    eta_decay: float = 1.0
    sample_period: int = 50
    batch_size: int | None = None
    split: str | tuple[int, int] = "proportional"
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.total_local_iters < 0:
            raise ValueError("total_local_iters must be >= 0")
        if self.sample_period < 1:
            raise ValueError("sample_period must be >= 1")
        if self.eta <= 0 or self.eta_decay <= 0:
            raise ValueError("eta and eta_decay must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive or None for full batch")
        if isinstance(self.split, str):
            if self.split != "proportional":
                raise ValueError(f"unknown split rule {self.split!r}")
        elif not (isinstance(self.split, tuple) and len(self.split) == 2 and min(self.split) >= 0):
            raise ValueError("explicit split must be a (T, T') pair of nonnegative ints")

    def eta_at(self, round_index: int) -> float:
        return self.eta * self.eta_decay**round_index


@dataclass
class RoundRecord:
    """Per-round provenance: union losses along the chain and which party's
    local iterate became the round output."""

    round: int
    global_loss_before: float
    provider_init_global_loss: float
    global_loss_after: float
    selected_party: str
    selected_iter_index: int
    params: ParamVector
    wall_s: float = 0.0


@dataclass
class RoundMetrics:
    """One reporting row: mean-form training metric plus optional test metrics."""

    round: int
    train_metric: float
    test_metric: float | None = None
    test_metric_2: float | None = None


@dataclass
class AssistResult:
    best_params: ParamVector
    records: list[RoundRecord]
    metrics: list[RoundMetrics]
    config: AssistConfig
    packets: list[tuple[TrajectoryPacket, TrajectoryPacket]] | None = None


def checkpoint_indices(total_iters: int, sample_period: int) -> list[int]:
    """{0} union multiples of the sampling period union {T}."""
    indices = list(range(0, total_iters + 1, sample_period))
    if indices[-1] != total_iters:
        indices.append(total_iters)
    return indices


def _batch_stream(n: int, batch_size: int, rng: np.random.Generator):
    """Without-replacement mini-batch indices, reshuffled every epoch."""
    batch_size = min(batch_size, n)
    while True:
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield order[start : start + batch_size]


def local_train(
    spec: ModelSpec,
    start: ParamVector,
    data: Dataset,
    iters: int,
    eta: float,
    batch_size: int | None,
    sample_period: int,
    rng: np.random.Generator,
    party: str = "learner",
    round_index: int = 1,
    privacy: PrivacySpec | None = None,
) -> TrajectoryPacket:
    """Run ``iters`` SGD steps from ``start`` and sample the trajectory.

    Checkpoints are taken at iteration 0, every ``sample_period`` iterations,
    and at the final iterate; each carries the full-dataset sum loss.  With
    ``batch_size`` None the update is deterministic full-gradient descent.
    When a privacy spec is given, every step's gradient is clipped and
    perturbed before it is applied.
    """
    if iters < 0:
        raise ValueError("iters must be >= 0")
    wanted = set(checkpoint_indices(iters, sample_period))
    theta = np.array(start, dtype=np.float64)
    full_batch = batch_size is None or spec.kind == "quadratic"
    batches = None if full_batch else _batch_stream(data.n, batch_size, rng)

    checkpoints = []
    for t in range(iters + 1):
        if t in wanted:
            checkpoints.append(
                Checkpoint(t, theta.copy(), loss(spec, theta, data, aggregate="sum"))
            )
        if t == iters:
            break
        batch = data if full_batch else data.subset(next(batches))
        grad = gradient(spec, theta, batch)
        if privacy is not None:
            grad = dp_perturb(grad, privacy, rng)
        theta = theta - eta * grad
        if not np.all(np.isfinite(theta)):
            raise DivergenceError(t + 1, party)
    return TrajectoryPacket(party=party, round=round_index, checkpoints=tuple(checkpoints))


def select_best(
    packet: TrajectoryPacket, own_spec: ModelSpec, own_data: Dataset
) -> tuple[Checkpoint, float]:
    """Argmin of the union loss over the received checkpoints.

    The union loss of a checkpoint is its transmitted sum loss plus the
    receiver's own full-dataset sum loss; ties break toward the smallest
    iteration index.
    """
    best = None
    best_loss = np.inf
    for cp in packet.checkpoints:
        global_loss = cp.local_loss + loss(own_spec, cp.params, own_data, aggregate="sum")
        if global_loss < best_loss:
            best, best_loss = cp, global_loss
    return best, best_loss


def _split_iters(config: AssistConfig, n_learner: int, n_provider: int) -> tuple[int, int]:
    if isinstance(config.split, tuple):
        return config.split
    total = config.total_local_iters
    pool = n_learner + n_provider
    learner_iters = round_half_up(total / 2) if pool == 0 else round_half_up(total * n_learner / pool)
    return learner_iters, total - learner_iters


def assist_round(
    theta_prev: ParamVector,
    config: AssistConfig,
    round_index: int,
    learner_spec: ModelSpec,
    learner_data: Dataset,
    provider_spec: ModelSpec,
    provider_data: Dataset,
    learner_rng: np.random.Generator,
    provider_rng: np.random.Generator,
    privacy: PrivacySpec | None = None,
) -> tuple[ParamVector, RoundRecord, tuple[TrajectoryPacket, TrajectoryPacket]]:
    """One full learner -> provider -> learner exchange.

    ``selected_party``/``selected_iter_index`` name the local iterate the
    round output originated from: the provider's trajectory when its
    selected index is positive, otherwise the learner's (index 0 of both
    packets means the round carried theta_prev through unchanged).
    """
    started = time.perf_counter()
    eta = config.eta_at(round_index)
    learner_iters, provider_iters = _split_iters(config, learner_data.n, provider_data.n)

    learner_packet = local_train(
        learner_spec, theta_prev, learner_data, learner_iters, eta,
        config.batch_size, config.sample_period, learner_rng,
        party="learner", round_index=round_index, privacy=privacy,
    )
    before = learner_packet.checkpoints[0].local_loss + loss(
        provider_spec, theta_prev, provider_data, aggregate="sum"
    )
    provider_start, provider_init_loss = select_best(learner_packet, provider_spec, provider_data)

    provider_packet = local_train(
        provider_spec, provider_start.params, provider_data, provider_iters, eta,
        config.batch_size, config.sample_period, provider_rng,
        party="provider", round_index=round_index, privacy=privacy,
    )
    output, after = select_best(provider_packet, learner_spec, learner_data)

    if output.iter_index > 0:
        origin = ("provider", output.iter_index)
    else:
        origin = ("learner", provider_start.iter_index)
    record = RoundRecord(
        round=round_index,
        global_loss_before=before,
        provider_init_global_loss=provider_init_loss,
        global_loss_after=after,
        selected_party=origin[0],
        selected_iter_index=origin[1],
        params=output.params.copy(),
        wall_s=time.perf_counter() - started,
    )
    return output.params, record, (learner_packet, provider_packet)


def _sum_loss(spec: ModelSpec, theta: ParamVector, data: Dataset) -> float:
    # an empty record set contributes zero to a union sum
    if spec.kind != "quadratic" and data.n == 0:
        return 0.0
    return loss(spec, theta, data, aggregate="sum")


def global_mean_loss(
    learner_spec: ModelSpec,
    learner_data: Dataset,
    provider_spec: ModelSpec,
    provider_data: Dataset,
    theta: ParamVector,
) -> float:
    """Union loss in the mean reporting form (plain sum for record-free models)."""
    total = _sum_loss(learner_spec, theta, learner_data) + _sum_loss(
        provider_spec, theta, provider_data
    )
    n = learner_data.n + provider_data.n
    return total / n if n else total


def run_assist_sgd(
    config: AssistConfig,
    spec: ModelSpec,
    learner_data: Dataset,
    provider_data: Dataset,
    test_data: Dataset | None = None,
    provider_spec: ModelSpec | None = None,
    privacy: PrivacySpec | None = None,
    keep_packets: bool = False,
) -> AssistResult:
    """Run the full protocol and return the best round output.

    ``provider_spec`` lets the two parties hold different model instances
    (quadratic centers differ per party); it defaults to the learner's spec.
    The best model is the round output with the smallest union sum loss over
    rounds 1..R, ties toward the earliest round.
    """
    provider_spec = provider_spec or spec
    learner_rng, provider_rng = [
        np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(2)
    ]
    theta = init_params(spec, config.seed)

    def metrics_row(round_index: int, params: ParamVector) -> RoundMetrics:
        train = global_mean_loss(spec, learner_data, provider_spec, provider_data, params)
        test = None
        if test_data is not None and spec.kind != "quadratic":
            test = accuracy(spec, params, test_data)
        return RoundMetrics(round=round_index, train_metric=train, test_metric=test)

    records: list[RoundRecord] = []
    metrics = [metrics_row(0, theta)]
    packets = [] if keep_packets else None
    for r in range(1, config.rounds + 1):
        theta, record, round_packets = assist_round(
            theta, config, r, spec, learner_data, provider_spec, provider_data,
            learner_rng, provider_rng, privacy=privacy,
        )
        records.append(record)
        metrics.append(metrics_row(r, theta))
        if packets is not None:
            packets.append(round_packets)

    best = min(records, key=lambda rec: (rec.global_loss_after, rec.round))
    return AssistResult(
        best_params=best.params.copy(),
        records=records,
        metrics=metrics,
        config=config,
        packets=packets,
    )
