"""Verification of the protocol's theoretical guarantees.

Two checks run on full-batch executions:

* monotonicity -- the union loss of the round outputs never increases,
  because both selection steps consider the round's starting model;
* stationarity -- on the two-center quadratic pair, with the learning rate
  sqrt(delta0 / (3 R L T G^2)), the smallest squared union-gradient norm
  over the first R round outputs stays below sqrt(12 L T G^2 delta0 / R).

For the quadratic pair all constants are analytic: the curvature constant
is L = 2, delta0 is the initial union loss minus its closed-form minimum at
the center midpoint.  G in the reported bound is the largest realized
local/union gradient norm along the full trajectory (measured post hoc from
complete packets); the learning rate is chosen from the initial-iterate
gradient norms, which for this instance is where the maximum occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..models import Dataset, ModelSpec, init_params
from ..protocol import AssistConfig, AssistResult, run_assist_sgd


class VerificationError(RuntimeError):
    """A theory check failed."""


@dataclass
class MonotonicityReport:
    status: str  # "pass" | "fail" | "not_applicable"
    first_violation_round: int | None = None
    max_increase: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status != "fail"


@dataclass
class StationarityReport:
    rounds: int
    local_iters: int
    eta: float
    g_initial: float
    g_realized: float
    delta0: float
    min_grad_sq: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.min_grad_sq <= self.bound


def verify_monotonicity(result: AssistResult, tolerance: float = 1e-12) -> MonotonicityReport:
    """Check the non-increase of the union sum loss across rounds.

    Only meaningful for full-batch runs; mini-batch histories report
    "not_applicable" since stochastic trajectories carry no such guarantee.
    """
    if result.config.batch_size is not None:
        return MonotonicityReport(status="not_applicable")
    previous = None
    for record in result.records:
        for value in (record.global_loss_before, record.global_loss_after):
            if previous is not None and value > previous + tolerance:
                return MonotonicityReport(
                    status="fail",
                    first_violation_round=record.round,
                    max_increase=value - previous,
                )
            previous = value
    return MonotonicityReport(status="pass")


def theorem_eta(rounds: int, lipschitz: float, local_iters: int, grad_bound: float, delta0: float) -> float:
    """The analyzed learning rate sqrt(delta0 / (3 R L T G^2))."""
    if min(rounds, local_iters) < 1 or lipschitz <= 0 or grad_bound <= 0:
        raise ValueError("rounds, local_iters, lipschitz, grad_bound must be positive")
    if delta0 < 0:
        raise ValueError("delta0 must be nonnegative")
    return math.sqrt(delta0 / (3.0 * rounds * lipschitz * local_iters * grad_bound**2))


def theorem_bound(rounds: int, lipschitz: float, local_iters: int, grad_bound: float, delta0: float) -> float:
    """The stationarity bound sqrt(12 L T G^2 delta0 / R) on min ||grad||^2."""
    if min(rounds, local_iters) < 1 or lipschitz <= 0 or grad_bound <= 0:
        raise ValueError("rounds, local_iters, lipschitz, grad_bound must be positive")
    if delta0 < 0:
        raise ValueError("delta0 must be nonnegative")
    return math.sqrt(12.0 * lipschitz * local_iters * grad_bound**2 * delta0 / rounds)


def quadratic_pair_specs(
    center_learner, center_provider
) -> tuple[ModelSpec, ModelSpec]:
    dim = len(center_learner)
    if len(center_provider) != dim:
        raise ValueError("the two centers must share a dimension")
    return (
        ModelSpec(kind="quadratic", input_dim=dim, quadratic_center=tuple(center_learner)),
        ModelSpec(kind="quadratic", input_dim=dim, quadratic_center=tuple(center_provider)),
    )


def run_quadratic_stationarity(
    center_learner,
    center_provider,
    rounds: int,
    local_iters: int,
    seed: int = 0,
    eta_override: float | None = None,
) -> tuple[StationarityReport, AssistResult]:
    """Full-batch assisted gradient descent on the quadratic pair with the
    analyzed learning rate, then both sides of the stationarity inequality.

    ``eta_override`` replaces the analyzed rate (for probing off-schedule
    behaviour); the report always carries both sides of the inequality.
    """
    learner_spec, provider_spec = quadratic_pair_specs(center_learner, center_provider)
    c_l, c_p = learner_spec.center, provider_spec.center
    theta0 = init_params(learner_spec, seed)
    midpoint = 0.5 * (c_l + c_p)
    inf_value = 0.5 * float((midpoint - c_l) @ (midpoint - c_l)) + 0.5 * float(
        (midpoint - c_p) @ (midpoint - c_p)
    )
    lipschitz = 2.0

    def grad_norms(theta: np.ndarray) -> tuple[float, float, float]:
        g_l = theta - c_l
        g_p = theta - c_p
        return (
            float(np.linalg.norm(g_l)),
            float(np.linalg.norm(g_p)),
            float(np.linalg.norm(g_l + g_p)),
        )

    delta0 = (
        0.5 * float((theta0 - c_l) @ (theta0 - c_l))
        + 0.5 * float((theta0 - c_p) @ (theta0 - c_p))
        - inf_value
    )
    g_initial = max(grad_norms(theta0))
    # delta0 = 0 means theta0 already minimizes the union loss; any step
    # size satisfies the bound then, but the config requires eta > 0
    eta = max(theorem_eta(rounds, lipschitz, local_iters, g_initial, delta0), 1e-12)
    if eta_override is not None:
        eta = eta_override

    empty = Dataset.empty(learner_spec.input_dim)
    config = AssistConfig(
        rounds=rounds,
        total_local_iters=2 * local_iters,
        eta=eta,
        sample_period=1,
        batch_size=None,
        split=(local_iters, local_iters),
        seed=seed,
    )
    result = run_assist_sgd(
        config, learner_spec, empty, empty,
        provider_spec=provider_spec, keep_packets=True,
    )

    g_realized = g_initial
    for learner_packet, provider_packet in result.packets:
        for packet in (learner_packet, provider_packet):
            for cp in packet.checkpoints:
                g_realized = max(g_realized, max(grad_norms(cp.params)))

    outputs = [theta0] + [record.params for record in result.records]
    min_grad_sq = min(grad_norms(theta)[2] ** 2 for theta in outputs[:rounds])
    return (
        StationarityReport(
            rounds=rounds,
            local_iters=local_iters,
            eta=eta,
            g_initial=g_initial,
            g_realized=g_realized,
            delta0=delta0,
            min_grad_sq=min_grad_sq,
            bound=theorem_bound(rounds, lipschitz, local_iters, g_realized, delta0),
        ),
        result,
    )
