"""Experiment execution: every (algorithm, seed) cell of a run config.

One run produces one CSV.  All randomness is derived from the config's
seed list through stable purpose-keyed sub-seeds, rows are written in
canonical (algorithm, seed, round) order, and timing goes to stderr rather
than into the file, so rerunning an identical config reproduces the CSV
byte for byte.
"""

from __future__ import annotations

import sys
import time
from dataclasses import replace
from pathlib import Path

from ..baselines import run_centralized, run_fedavg, run_learner_only
from ..data import (
    ClassSpec,
    GaussianMixtureSpec,
    PartitionSpec,
    generate_gaussian,
    load_csv,
    partition,
    split_by_class_fraction,
)
from ..models import Dataset
from ..privacy import PrivacySpec
from ..protocol import RoundMetrics, run_assist_sgd
from ..rl.assist_pg import RLAssistConfig, run_assist_pg, run_pg_baselines
from ..rl.cartpole import sample_environments
from ..rl.policy import policy_spec
from ..seeding import derive_seed
from .config import DLSettings, RLSettings, RunConfig
from .theory import run_quadratic_stationarity, verify_monotonicity, VerificationError

CSV_COLUMNS = ("algorithm", "seed", "round", "global_train_loss", "test_metric_1", "test_metric_2")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, columns, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(rows, key=lambda row: (str(row[0]), row[1], row[2]))
    lines = [",".join(columns)]
    lines.extend(",".join(_format_cell(cell) for cell in row) for row in ordered)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _metric_rows(algorithm: str, seed: int, metrics: list[RoundMetrics]):
    return [
        (algorithm, seed, m.round, m.train_metric, m.test_metric, m.test_metric_2)
        for m in metrics
    ]


def _basis_means(settings: DLSettings) -> list[tuple[float, ...]]:
    means = []
    for k in range(settings.model.num_classes):
        mean = [0.0] * settings.model.input_dim
        mean[k] = settings.mean_scale
        means.append(tuple(mean))
    return means


def _mixture(settings: DLSettings, per_class: int, seed: int) -> GaussianMixtureSpec:
    means = _basis_means(settings) if settings.means == "basis" else settings.means
    classes = tuple(ClassSpec(mean=m, sigma=settings.sigma, count=per_class) for m in means)
    return GaussianMixtureSpec(classes=classes, seed=seed)


def _dl_cell_data(settings: DLSettings, seed: int) -> tuple[Dataset, Dataset, Dataset, Dataset]:
    if settings.train_csv is not None:
        train = load_csv(settings.train_csv)
        test = load_csv(settings.test_csv)
        if train.dim != settings.model.input_dim:
            raise ValueError(
                f"{settings.train_csv}: {train.dim} feature columns, "
                f"model expects {settings.model.input_dim}"
            )
    else:
        train = generate_gaussian(_mixture(settings, settings.per_class, derive_seed(seed, "train-data")))
        test = generate_gaussian(_mixture(settings, settings.test_per_class, derive_seed(seed, "test-data")))
    if settings.partition_mode == "fractions":
        fractions = {i: f for i, f in enumerate(settings.learner_fractions)}
        learner, provider = split_by_class_fraction(train, fractions, derive_seed(seed, "split"))
    else:
        part = PartitionSpec(
            rho=settings.rho,
            gamma_l=settings.gamma_l,
            primary_class=settings.primary_class,
            seed=derive_seed(seed, "split"),
        )
        learner, provider = partition(train, part)
    return train, test, learner, provider


def run_dl_cell(
    settings: DLSettings,
    seed: int,
    algorithms,
    privacy: PrivacySpec | None = None,
    label_suffix: str = "",
):
    """All requested algorithms on one seed's data; identical inputs per cell."""
    train, test, learner, provider = _dl_cell_data(settings, seed)
    config = replace(settings.assist, seed=seed)
    rows = []
    for algorithm in algorithms:
        started = time.perf_counter()
        if algorithm == "assist":
            metrics = run_assist_sgd(
                config, settings.model, learner, provider, test, privacy=privacy
            ).metrics
        elif algorithm == "centralized":
            metrics = run_centralized(config, settings.model, train, test).metrics
        elif algorithm == "learner_only":
            metrics = run_learner_only(config, settings.model, learner, test).metrics
        elif algorithm == "fedavg":
            metrics = run_fedavg(config, settings.model, learner, provider, test).metrics
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        print(
            f"[dl] {algorithm + label_suffix} seed={seed}: {time.perf_counter() - started:.2f}s",
            file=sys.stderr,
        )
        rows.extend(_metric_rows(algorithm + label_suffix, seed, metrics))
    return rows


def _run_dl(config: RunConfig) -> list[tuple]:
    rows = []
    for seed in config.seeds:
        rows.extend(run_dl_cell(config.dl, seed, config.algorithms, privacy=config.dl.privacy))
    return rows


def _run_dp(config: RunConfig) -> list[tuple]:
    """Private protocol runs, one algorithm label per epsilon."""
    rows = []
    for seed in config.seeds:
        for epsilon in config.dl.epsilons:
            privacy = replace(config.dl.privacy, epsilon=epsilon)
            rows.extend(
                run_dl_cell(
                    config.dl, seed, ["assist"], privacy=privacy,
                    label_suffix=f"_eps{epsilon:g}",
                )
            )
    return rows


def run_rl_cell(settings: RLSettings, seed: int, algorithms):
    spec = policy_spec(settings.hidden)
    learner_envs = sample_environments(
        settings.learner_dist, settings.n_learner, derive_seed(seed, "learner-envs"), settings.parameter
    )
    provider_envs = sample_environments(
        settings.provider_dist, settings.n_provider, derive_seed(seed, "provider-envs"), settings.parameter
    )
    test_sets = [
        sample_environments(dist, settings.n_test, derive_seed(seed, "test-envs", slot), settings.parameter)
        for slot, dist in enumerate(settings.test_dists)
    ]
    rl_config = RLAssistConfig(
        rounds=settings.rounds,
        total_local_iters=settings.total_local_iters,
        eta=settings.eta,
        learner_envs=tuple(learner_envs),
        provider_envs=tuple(provider_envs),
        batch_size=settings.batch_size,
        sample_period=settings.sample_period,
        gamma=settings.gamma,
        eval_episodes=settings.eval_episodes,
        seed=seed,
    )
    rows = []
    baseline_names = [a for a in algorithms if a != "assist"]
    if "assist" in algorithms:
        started = time.perf_counter()
        result = run_assist_pg(rl_config, spec, test_sets)
        print(f"[rl] assist seed={seed}: {time.perf_counter() - started:.2f}s", file=sys.stderr)
        rows.extend(_metric_rows("assist", seed, result.metrics))
    if baseline_names:
        started = time.perf_counter()
        results = run_pg_baselines(rl_config, spec, test_sets, algorithms=baseline_names)
        print(
            f"[rl] {','.join(baseline_names)} seed={seed}: {time.perf_counter() - started:.2f}s",
            file=sys.stderr,
        )
        for name, result in results.items():
            rows.extend(_metric_rows(name, seed, result.metrics))
    return rows


def _run_rl(config: RunConfig) -> list[tuple]:
    rows = []
    for seed in config.seeds:
        rows.extend(run_rl_cell(config.rl, seed, config.algorithms))
    return rows


THEORY_COLUMNS = ("check", "rounds", "eta", "min_grad_sq", "bound", "status")


def _run_theory(config: RunConfig) -> tuple[list[tuple], bool]:
    settings = config.theory
    seed = config.seeds[0]
    rows = []
    all_passed = True
    for rounds in settings.r_values:
        report, result = run_quadratic_stationarity(
            settings.center_learner, settings.center_provider,
            rounds, settings.local_iters, seed=seed,
        )
        rows.append(
            ("stationarity", rounds, report.eta, report.min_grad_sq, report.bound,
             "pass" if report.passed else "fail")
        )
        mono = verify_monotonicity(result)
        rows.append(("monotonicity", rounds, report.eta, None, None, mono.status))
        all_passed = all_passed and report.passed and mono.passed
    return rows, all_passed


def run_experiment(config: RunConfig) -> Path:
    """Execute the configured experiment and write its CSV; returns the path.

    Raises :class:`VerificationError` when a theory check fails (after the
    report file is written) and propagates divergence errors from training.
    """
    out = Path(config.out_dir)
    if config.kind == "dl":
        return _write_csv(out / "dl_metrics.csv", CSV_COLUMNS, _run_dl(config))
    if config.kind == "dp":
        return _write_csv(out / "dp_metrics.csv", CSV_COLUMNS, _run_dp(config))
    if config.kind == "rl":
        return _write_csv(out / "rl_metrics.csv", CSV_COLUMNS, _run_rl(config))
    if config.kind == "theory":
        rows, all_passed = _run_theory(config)
        path = _write_csv(out / "theory_report.csv", THEORY_COLUMNS, rows)
        if not all_passed:
            raise VerificationError(f"theory checks failed; see {path}")
        return path
    raise ValueError(f"unknown experiment kind {config.kind!r}")
