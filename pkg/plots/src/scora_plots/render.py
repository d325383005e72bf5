"""Figures from experiment result CSVs: mean curves with 95% CI bands.

Consumes only the documented results schema (``b,p_c,metric,mean,ci95,
n_success,n_failed`` plus echo columns) and never mutates its input.  Output
is deterministic for a fixed input: no timestamps or random ids are embedded.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "scora-plots"

import matplotlib.pyplot as plt

REQUIRED_COLUMNS = ("b", "p_c", "metric", "mean", "ci95", "n_success", "n_failed")

KINDS = {
    # kind: (x column, default group-by column, x label, y label, log x)
    "convergence": ("b", "p_c", "budget", "correlation", True),
    "sweetspot": ("p_c", "b", "fraction of budget on comparisons", "weighted correlation", False),
    "baseline_comparison": (
        "p_c",
        "pipeline",
        "fraction of budget on comparisons",
        "weighted correlation",
        False,
    ),
}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str
    output_image: str
    group_by: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {sorted(KINDS)}")

    @property
    def group_column(self) -> str:
        return self.group_by or KINDS[self.kind][1]


def _read_rows(spec: FigureSpec) -> list[dict]:
    path = Path(spec.input_csv)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in columns]
        if missing:
            raise ValueError(f"{path}: missing required columns {missing}")
        if spec.group_column not in columns:
            raise ValueError(f"{path}: missing group-by column {spec.group_column!r}")
        rows = list(reader)
    usable = [
        row
        for row in rows
        if int(row["n_success"]) > 0 and math.isfinite(float(row["mean"]))
    ]
    if not usable:
        raise ValueError(f"{path}: no plottable rows (empty file or all repetitions failed)")
    return usable


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure; separated from ``render`` for tests."""
    x_column, _, x_label, y_label, log_x = KINDS[spec.kind]
    rows = _read_rows(spec)

    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(row[spec.group_column], []).append(row)

    figure, axes = plt.subplots(figsize=(6.0, 4.0))
    for key in sorted(groups, key=_sort_key):
        series = sorted(groups[key], key=lambda row: float(row[x_column]))
        x = [float(row[x_column]) for row in series]
        mean = [float(row["mean"]) for row in series]
        ci = [_finite_or_zero(row["ci95"]) for row in series]
        lower = [m - c for m, c in zip(mean, ci)]
        upper = [m + c for m, c in zip(mean, ci)]
        (line,) = axes.plot(x, mean, marker="o", markersize=3, label=f"{spec.group_column}={key}")
        axes.fill_between(x, lower, upper, alpha=0.2, color=line.get_color())
    if log_x:
        axes.set_xscale("log")
    axes.set_xlabel(x_label)
    axes.set_ylabel(y_label)
    axes.grid(True, alpha=0.3)
    axes.legend()
    figure.tight_layout()
    return figure


def _sort_key(value: str):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


def _finite_or_zero(text: str) -> float:
    value = float(text)
    return value if math.isfinite(value) else 0.0


def render(spec: FigureSpec) -> str:
    """Write the figure; deterministic bytes for a fixed input CSV."""
    figure = build_figure(spec)
    suffix = Path(spec.output_image).suffix.lower()
    # Strip the per-run metadata the backends would otherwise embed.
    metadata = None
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    try:
        figure.savefig(spec.output_image, dpi=150, metadata=metadata)
    finally:
        plt.close(figure)
    return spec.output_image
