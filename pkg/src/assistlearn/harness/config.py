"""Experiment configuration: a flat key = value text format.

Lines are ``section.key = value`` pairs; ``#`` starts a comment; blank
lines are ignored.  Every key has a default, unknown keys are errors, and
the full schema is listed in the README.  Values use small literal
grammars: integer lists ``4,16,64``, ratios ``1/9``, mean tuples
``(-1,1);(1,-1)`` or the word ``basis`` for scaled standard-basis means,
``full`` for full-batch training, and environment distributions written as
``uniform(a,b)``, ``beta(a,b)``, ``affine_beta(alpha,beta,scale,offset)``,
or ``mix(p, beta(a,b), uniform(lo,hi))``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..models import ModelSpec
from ..privacy import PrivacySpec
from ..protocol import AssistConfig
from ..rl.cartpole import EnvDistribution

EXPERIMENT_KINDS = ("dl", "rl", "theory", "dp")
ALGORITHMS = ("assist", "centralized", "learner_only", "fedavg")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_ratio(raw: str, key: str) -> float:
    if "/" in raw:
        num, _, den = raw.partition("/")
        return _parse_float(num, key) / _parse_float(den, key)
    return _parse_float(raw, key)


def _parse_int_list(raw: str, key: str) -> list[int]:
    return [_parse_int(part.strip(), key) for part in raw.split(",") if part.strip()]


def _parse_float_list(raw: str, key: str) -> list[float]:
    return [_parse_float(part.strip(), key) for part in raw.split(",") if part.strip()]


def _parse_means(raw: str, key: str) -> str | list[tuple[float, ...]]:
    if raw == "basis":
        return "basis"
    means = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise ConfigError(f"{key}: mean tuples must look like (a,b); got {chunk!r}")
        means.append(tuple(_parse_float_list(chunk[1:-1], key)))
    if not means:
        raise ConfigError(f"{key}: no means given")
    return means


def _parse_batch(raw: str, key: str) -> int | None:
    if raw == "full":
        return None
    value = _parse_int(raw, key)
    if value < 1:
        raise ConfigError(f"{key}: batch size must be positive or 'full'")
    return value


def _parse_split(raw: str, key: str):
    if raw == "proportional":
        return "proportional"
    parts = _parse_int_list(raw, key)
    if len(parts) != 2:
        raise ConfigError(f"{key}: explicit split needs exactly two integers")
    return (parts[0], parts[1])


_DIST_CALL = re.compile(r"^(\w+)\((.*)\)$")


def _parse_distribution(raw: str, key: str) -> EnvDistribution:
    raw = raw.strip()
    match = _DIST_CALL.match(raw)
    if not match:
        raise ConfigError(f"{key}: cannot parse distribution {raw!r}")
    name, body = match.group(1), match.group(2)
    try:
        if name == "uniform":
            low, high = _parse_float_list(body, key)
            return EnvDistribution.uniform(low, high)
        if name == "beta":
            alpha, beta = _parse_float_list(body, key)
            return EnvDistribution.affine_beta(alpha, beta, 1.0, 0.0)
        if name == "affine_beta":
            alpha, beta, scale, offset = _parse_float_list(body, key)
            return EnvDistribution.affine_beta(alpha, beta, scale, offset)
        if name == "mix":
            prob_part, rest = body.split(",", 1)
            inner = [chunk.strip() for chunk in re.findall(r"\w+\([^()]*\)", rest)]
            if len(inner) != 2:
                raise ConfigError(f"{key}: mix needs two component distributions")
            beta_part = _DIST_CALL.match(inner[0])
            uniform_part = _DIST_CALL.match(inner[1])
            if beta_part.group(1) != "beta" or uniform_part.group(1) != "uniform":
                raise ConfigError(f"{key}: mix components must be beta(...) then uniform(...)")
            alpha, beta = _parse_float_list(beta_part.group(2), key)
            low, high = _parse_float_list(uniform_part.group(2), key)
            return EnvDistribution.mixture(_parse_float(prob_part, key), alpha, beta, low, high)
    except ConfigError:
        raise
    except (ValueError, AttributeError):
        raise ConfigError(f"{key}: cannot parse distribution {raw!r}") from None
    raise ConfigError(f"{key}: unknown distribution {name!r}")


# Schema: key -> default raw value.  Everything is overridable from file.
DEFAULTS = {
    "experiment": "",
    "seeds": "0",
    "out": "results",
    "algorithms": "all",
    "model.kind": "logistic",
    "model.input_dim": "2",
    "model.num_classes": "2",
    "model.hidden_sizes": "16",
    "data.means": "(-1,1);(1,-1)",
    "data.train_csv": "",
    "data.test_csv": "",
    "data.mean_scale": "1.0",
    "data.sigma": "1.5",
    "data.per_class": "50",
    "data.test_per_class": "1000",
    "partition.mode": "fractions",
    "partition.learner_fractions": "0.9,0.1",
    "partition.rho": "1/9",
    "partition.gamma_l": "1.0",
    "partition.primary_class": "0",
    "assist.rounds": "10",
    "assist.total_local_iters": "200",
    "assist.eta": "0.5",
    "assist.eta_decay": "1.0",
    "assist.sample_period": "20",
    "assist.batch_size": "full",
    "assist.split": "proportional",
    "privacy.enabled": "false",
    "privacy.epsilon": "10",
    "privacy.delta": "1e-5",
    "privacy.clip_norm": "1.0",
    "privacy.epsilons": "1,5,10",
    "policy.hidden": "4",
    "envs.parameter": "pole_length",
    "envs.learner": "uniform(4,5)",
    "envs.provider": "uniform(0,1)",
    "envs.test1": "uniform(0,5)",
    "envs.test2": "mix(0.2, beta(1,5), uniform(0,5))",
    "envs.n_learner": "5",
    "envs.n_provider": "5",
    "envs.n_test": "10",
    "rl.rounds": "10",
    "rl.total_local_iters": "20",
    "rl.eta": "0.005",
    "rl.batch_size": "32",
    "rl.sample_period": "4",
    "rl.gamma": "0.99",
    "rl.eval_episodes": "32",
    "theory.center_learner": "-1,-1",
    "theory.center_provider": "1,-1.25",
    "theory.local_iters": "10",
    "theory.r_values": "4,16,64",
}


@dataclass
class DLSettings:
    model: ModelSpec
    means: str | list[tuple[float, ...]]
    mean_scale: float
    sigma: float
    per_class: int
    test_per_class: int
    train_csv: Path | None
    test_csv: Path | None
    partition_mode: str
    learner_fractions: list[float]
    rho: float
    gamma_l: float
    primary_class: int
    assist: AssistConfig
    privacy: PrivacySpec | None
    epsilons: list[float] = field(default_factory=list)


@dataclass
class RLSettings:
    hidden: int
    parameter: str
    learner_dist: EnvDistribution
    provider_dist: EnvDistribution
    test_dists: list[EnvDistribution]
    n_learner: int
    n_provider: int
    n_test: int
    rounds: int
    total_local_iters: int
    eta: float
    batch_size: int
    sample_period: int
    gamma: float
    eval_episodes: int


@dataclass
class TheorySettings:
    center_learner: tuple[float, ...]
    center_provider: tuple[float, ...]
    local_iters: int
    r_values: list[int]


@dataclass
class RunConfig:
    kind: str
    seeds: list[int]
    out_dir: Path
    algorithms: list[str]
    dl: DLSettings | None = None
    rl: RLSettings | None = None
    theory: TheorySettings | None = None
    source_text: str = ""


def read_key_values(path: str | Path) -> dict[str, str]:
    """Raw key = value pairs from a config file; unknown keys are errors."""
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_num, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {line_num}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"{path}: line {line_num}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}: line {line_num}: duplicate key {key!r}")
        values[key] = raw.strip()
    return values


def _build_model(values: dict[str, str]) -> ModelSpec:
    kind = values["model.kind"]
    if kind not in ("logistic", "mlp"):
        raise ConfigError(f"model.kind: must be logistic or mlp, got {kind!r}")
    hidden = tuple(_parse_int_list(values["model.hidden_sizes"], "model.hidden_sizes"))
    try:
        return ModelSpec(
            kind=kind,
            input_dim=_parse_int(values["model.input_dim"], "model.input_dim"),
            num_classes=_parse_int(values["model.num_classes"], "model.num_classes"),
            hidden_sizes=hidden if kind == "mlp" else (),
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None


def _build_dl(values: dict[str, str], kind: str) -> DLSettings:
    model = _build_model(values)
    means = _parse_means(values["data.means"], "data.means")
    if means != "basis":
        if len(means) != model.num_classes:
            raise ConfigError(
                f"data.means: {len(means)} means for {model.num_classes} classes"
            )
        if any(len(m) != model.input_dim for m in means):
            raise ConfigError("data.means: tuple length must equal model.input_dim")
    elif model.num_classes > model.input_dim:
        raise ConfigError("data.means: basis means need input_dim >= num_classes")

    mode = values["partition.mode"]
    if mode not in ("fractions", "rho_gamma"):
        raise ConfigError(f"partition.mode: must be fractions or rho_gamma, got {mode!r}")
    fractions = _parse_float_list(values["partition.learner_fractions"], "partition.learner_fractions")
    if mode == "fractions" and len(fractions) != model.num_classes:
        raise ConfigError("partition.learner_fractions: one fraction per class required")

    try:
        assist = AssistConfig(
            rounds=_parse_int(values["assist.rounds"], "assist.rounds"),
            total_local_iters=_parse_int(values["assist.total_local_iters"], "assist.total_local_iters"),
            eta=_parse_float(values["assist.eta"], "assist.eta"),
            eta_decay=_parse_float(values["assist.eta_decay"], "assist.eta_decay"),
            sample_period=_parse_int(values["assist.sample_period"], "assist.sample_period"),
            batch_size=_parse_batch(values["assist.batch_size"], "assist.batch_size"),
            split=_parse_split(values["assist.split"], "assist.split"),
        )
    except ValueError as exc:
        raise ConfigError(f"assist: {exc}") from None

    privacy = None
    if kind == "dp" or _parse_bool(values["privacy.enabled"], "privacy.enabled"):
        try:
            privacy = PrivacySpec(
                epsilon=_parse_float(values["privacy.epsilon"], "privacy.epsilon"),
                delta=_parse_float(values["privacy.delta"], "privacy.delta"),
                clip_norm=_parse_float(values["privacy.clip_norm"], "privacy.clip_norm"),
            )
        except ValueError as exc:
            raise ConfigError(f"privacy: {exc}") from None

    train_csv = Path(values["data.train_csv"]) if values["data.train_csv"] else None
    test_csv = Path(values["data.test_csv"]) if values["data.test_csv"] else None
    if (train_csv is None) != (test_csv is None):
        raise ConfigError("data.train_csv and data.test_csv must be given together")
    for key, path in (("data.train_csv", train_csv), ("data.test_csv", test_csv)):
        if path is not None and not path.exists():
            raise ConfigError(f"{key}: file not found: {path}")

    return DLSettings(
        model=model,
        means=means,
        mean_scale=_parse_float(values["data.mean_scale"], "data.mean_scale"),
        sigma=_parse_float(values["data.sigma"], "data.sigma"),
        per_class=_parse_int(values["data.per_class"], "data.per_class"),
        test_per_class=_parse_int(values["data.test_per_class"], "data.test_per_class"),
        train_csv=train_csv,
        test_csv=test_csv,
        partition_mode=mode,
        learner_fractions=fractions,
        rho=_parse_ratio(values["partition.rho"], "partition.rho"),
        gamma_l=_parse_float(values["partition.gamma_l"], "partition.gamma_l"),
        primary_class=_parse_int(values["partition.primary_class"], "partition.primary_class"),
        assist=assist,
        privacy=privacy,
        epsilons=_parse_float_list(values["privacy.epsilons"], "privacy.epsilons"),
    )


def _build_rl(values: dict[str, str]) -> RLSettings:
    parameter = values["envs.parameter"]
    if parameter not in ("pole_length", "force_magnitude"):
        raise ConfigError(f"envs.parameter: unsupported parameter {parameter!r}")
    try:
        return RLSettings(
            hidden=_parse_int(values["policy.hidden"], "policy.hidden"),
            parameter=parameter,
            learner_dist=_parse_distribution(values["envs.learner"], "envs.learner"),
            provider_dist=_parse_distribution(values["envs.provider"], "envs.provider"),
            test_dists=[
                _parse_distribution(values["envs.test1"], "envs.test1"),
                _parse_distribution(values["envs.test2"], "envs.test2"),
            ],
            n_learner=_parse_int(values["envs.n_learner"], "envs.n_learner"),
            n_provider=_parse_int(values["envs.n_provider"], "envs.n_provider"),
            n_test=_parse_int(values["envs.n_test"], "envs.n_test"),
            rounds=_parse_int(values["rl.rounds"], "rl.rounds"),
            total_local_iters=_parse_int(values["rl.total_local_iters"], "rl.total_local_iters"),
            eta=_parse_float(values["rl.eta"], "rl.eta"),
            batch_size=_parse_int(values["rl.batch_size"], "rl.batch_size"),
            sample_period=_parse_int(values["rl.sample_period"], "rl.sample_period"),
            gamma=_parse_float(values["rl.gamma"], "rl.gamma"),
            eval_episodes=_parse_int(values["rl.eval_episodes"], "rl.eval_episodes"),
        )
    except ValueError as exc:
        raise ConfigError(f"rl: {exc}") from None


def _build_theory(values: dict[str, str]) -> TheorySettings:
    center_learner = tuple(_parse_float_list(values["theory.center_learner"], "theory.center_learner"))
    center_provider = tuple(_parse_float_list(values["theory.center_provider"], "theory.center_provider"))
    if len(center_learner) != len(center_provider):
        raise ConfigError("theory centers must share a dimension")
    r_values = _parse_int_list(values["theory.r_values"], "theory.r_values")
    if not r_values or min(r_values) < 1:
        raise ConfigError("theory.r_values: need at least one positive round count")
    return TheorySettings(
        center_learner=center_learner,
        center_provider=center_provider,
        local_iters=_parse_int(values["theory.local_iters"], "theory.local_iters"),
        r_values=r_values,
    )


def load_config(
    path: str | Path | None,
    kind: str | None = None,
    seeds_override: str | None = None,
    out_override: str | None = None,
    algorithms_override: str | None = None,
) -> RunConfig:
    """Assemble a validated RunConfig from a file plus CLI overrides.

    ``path`` may be None to run entirely on defaults.  The experiment kind
    comes from the CLI subcommand and must agree with any ``experiment``
    key present in the file.
    """
    values = dict(DEFAULTS)
    source_text = ""
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"config file not found: {path}")
        file_values = read_key_values(path)
        source_text = Path(path).read_text(encoding="utf-8")
        values.update(file_values)

    file_kind = values["experiment"]
    if kind is None:
        kind = file_kind
    elif file_kind and file_kind != kind:
        raise ConfigError(f"experiment: file says {file_kind!r}, command says {kind!r}")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENT_KINDS}, got {kind!r}")

    if seeds_override is not None:
        values["seeds"] = seeds_override
    if out_override is not None:
        values["out"] = out_override
    if algorithms_override is not None:
        values["algorithms"] = algorithms_override

    seeds = _parse_int_list(values["seeds"], "seeds")
    if not seeds:
        raise ConfigError("seeds: at least one seed required")
    if values["algorithms"] == "all":
        algorithms = list(ALGORITHMS)
    else:
        algorithms = [a.strip() for a in values["algorithms"].split(",") if a.strip()]
        unknown = [a for a in algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"algorithms: unknown algorithm names {unknown}")
        if not algorithms:
            raise ConfigError("algorithms: empty list")

    config = RunConfig(
        kind=kind,
        seeds=seeds,
        out_dir=Path(values["out"]),
        algorithms=algorithms,
        source_text=source_text,
    )
    if kind in ("dl", "dp"):
        config.dl = _build_dl(values, kind)
    elif kind == "rl":
        config.rl = _build_rl(values)
    elif kind == "theory":
        config.theory = _build_theory(values)
    return config
