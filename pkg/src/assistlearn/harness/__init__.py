"""Experiment harness: configuration, runner, plots, and theory checks."""

from .config import ConfigError, RunConfig, load_config
from .plotting import emit_plot
from .runner import run_experiment
from .theory import (
    MonotonicityReport,
    StationarityReport,
    VerificationError,
    run_quadratic_stationarity,
    theorem_bound,
    theorem_eta,
    verify_monotonicity,
)

__all__ = [
    "ConfigError",
    "MonotonicityReport",
    "RunConfig",
    "StationarityReport",
    "VerificationError",
    "emit_plot",
    "load_config",
    "run_experiment",
    "run_quadratic_stationarity",
    "theorem_bound",
    "theorem_eta",
    "verify_monotonicity",
]
