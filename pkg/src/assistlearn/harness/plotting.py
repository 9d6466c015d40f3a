"""Curve rendering from metrics CSVs.

One SVG per metric column: per-algorithm mean across seeds against the
round index, with a min/max band when more than one seed is present.
Output bytes are deterministic for a fixed input (fixed hash salt, no
embedded creation date).
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

METRIC_COLUMNS = ("global_train_loss", "test_metric_1", "test_metric_2")
METRIC_LABELS = {
    "global_train_loss": "training metric",
    "test_metric_1": "test metric 1",
    "test_metric_2": "test metric 2",
}


def _read_rows(csv_path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(csv_path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValueError(f"{csv_path}: empty file")
        return list(reader.fieldnames), list(reader)


def emit_plot(csv_path, out_dir, metrics=None) -> list[Path]:
    """Render the requested metric columns (default: all non-empty ones)."""
    csv_path = Path(csv_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fieldnames, rows = _read_rows(csv_path)

    requested = list(metrics) if metrics else None
    for name in requested or []:
        if name not in fieldnames:
            raise ValueError(f"{csv_path}: no column named {name!r}")
    candidates = requested or [c for c in METRIC_COLUMNS if c in fieldnames]

    written = []
    for metric in candidates:
        # per algorithm: round -> list of per-seed values
        series: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
        for row in rows:
            raw = row.get(metric, "")
            if raw == "" or raw is None:
                continue
            series[row["algorithm"]][int(row["round"])].append(float(raw))
        if not series:
            if requested:
                raise ValueError(f"{csv_path}: column {metric!r} has no values")
            continue

        plt.rcParams["svg.hashsalt"] = "assistlearn"
        fig, ax = plt.subplots(figsize=(6, 4))
        for algorithm in sorted(series):
            rounds = sorted(series[algorithm])
            values = [series[algorithm][r] for r in rounds]
            mean = [sum(v) / len(v) for v in values]
            ax.plot(rounds, mean, marker="o", markersize=3, label=algorithm)
            if any(len(v) > 1 for v in values):
                ax.fill_between(
                    rounds, [min(v) for v in values], [max(v) for v in values], alpha=0.2
                )
        ax.set_xlabel("assistance round")
        ax.set_ylabel(METRIC_LABELS.get(metric, metric))
        ax.legend()
        fig.tight_layout()
        target = out_dir / f"{csv_path.stem}_{metric}.svg"
        fig.savefig(target, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(target)
    return written
