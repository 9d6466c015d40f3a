"""Command-line entry point.

Subcommands: ``dl``, ``rl``, ``theory``, ``dp`` run experiments from a
config file (or pure defaults); ``plot`` renders curves from a metrics CSV.
Exit codes: 0 success, 2 configuration error, 3 training divergence,
4 theory-verification failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness.config import ConfigError, load_config
from .harness.plotting import emit_plot
from .harness.runner import run_experiment
from .harness.theory import VerificationError
from .protocol import DivergenceError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_VERIFICATION = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assistlearn",
        description="Two-party assisted learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for kind, help_text in (
        ("dl", "assisted deep-learning experiment"),
        ("rl", "assisted reinforcement-learning experiment"),
        ("theory", "monotonicity and stationarity verification"),
        ("dp", "differentially private protocol runs"),
    ):
        cmd = sub.add_parser(kind, help=help_text)
        cmd.add_argument("--config", help="config file (key = value lines)")
        cmd.add_argument("--out", help="output directory (overrides the config)")
        cmd.add_argument("--seeds", help="comma-separated seed list (overrides the config)")
        cmd.add_argument("--algorithms", help="comma list or 'all' (overrides the config)")

    plot = sub.add_parser("plot", help="render curves from a metrics CSV")
    plot.add_argument("--csv", required=True, help="metrics CSV produced by an experiment run")
    plot.add_argument("--out", default="plots", help="output directory for SVG files")
    plot.add_argument("--metrics", help="comma list of metric columns (default: all present)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            metrics = args.metrics.split(",") if args.metrics else None
            written = emit_plot(args.csv, args.out, metrics)
            for path in written:
                print(path)
            return EXIT_OK
        config = load_config(
            args.config,
            kind=args.command,
            seeds_override=args.seeds,
            out_override=args.out,
            algorithms_override=args.algorithms,
        )
        path = run_experiment(config)
        print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
