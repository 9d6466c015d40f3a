"""Two-party assisted learning.

A data-limited learner improves its model by exchanging sampled model
trajectories and scalar local losses (never data) with a data-rich provider
over a small number of assistance rounds.  The package provides the
supervised and policy-gradient protocol variants, comparison baselines,
synthetic data generation and partitioning, a differential-privacy layer,
and an experiment harness with theory-verification checks.
"""

from .baselines import BaselineResult, run_centralized, run_fedavg, run_learner_only
from .data import (
    ClassSpec,
    GaussianMixtureSpec,
    PartitionSpec,
    generate_gaussian,
    load_csv,
    partition,
    split_by_class_fraction,
)
from .models import Dataset, ModelSpec, accuracy, gradient, init_params, loss
from .privacy import CompositionResult, PrivacySpec, compose, dp_perturb
from .protocol import (
    AssistConfig,
    AssistResult,
    Checkpoint,
    DivergenceError,
    RoundMetrics,
    RoundRecord,
    TrajectoryPacket,
    assist_round,
    local_train,
    run_assist_sgd,
    select_best,
)

__version__ = "0.1.0"

__all__ = [
    "AssistConfig",
    "AssistResult",
    "BaselineResult",
    "Checkpoint",
    "ClassSpec",
    "CompositionResult",
    "Dataset",
    "DivergenceError",
    "GaussianMixtureSpec",
    "ModelSpec",
    "PartitionSpec",
    "PrivacySpec",
    "RoundMetrics",
    "RoundRecord",
    "TrajectoryPacket",
    "accuracy",
    "assist_round",
    "compose",
    "dp_perturb",
    "generate_gaussian",
    "gradient",
    "init_params",
    "load_csv",
    "local_train",
    "loss",
    "partition",
    "run_assist_sgd",
    "run_centralized",
    "run_fedavg",
    "run_learner_only",
    "select_best",
    "split_by_class_fraction",
]
