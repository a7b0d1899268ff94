"""Render regret/fairness figures from a fair-nrm experiment CSV.

Consumes only the aggregate rows (mean and ci95) that the experiment runner
writes; never re-aggregates and never modifies the CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

# kind -> (csv column, x-axis mode, axis labels)
KINDS = {
    "regret_sqrtT": ("regret", "sqrt", "sqrt(T)", "cumulative regret"),
    "relative_regret": ("relative_regret", "linear", "T", "relative regret"),
    "maxmin_fairness": ("maxmin_fairness", "linear", "T", "max-min fairness"),
    "avg_reward": ("avg_reward", "linear", "T", "average reward"),
}

REQUIRED_COLUMNS = ["trial", "T", "lambda", "gamma_label"]


class SchemaError(ValueError):
    """CSV does not carry the columns a figure needs."""


class EmptySelectionError(ValueError):
    """No aggregate rows match the requested filter."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    gamma_label: Optional[str] = None
    fmt: str = "png"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {sorted(KINDS)}")
        if self.fmt not in ("png", "svg"):
            raise ValueError("output format must be 'png' or 'svg'")


def read_aggregates(csv_path, value_column: str):
    """Mean and ci95 rows keyed by (gamma_label, lambda, T); ci defaults to 0
    for cells the runner aggregated from a single trial."""
    path = Path(csv_path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS + [value_column]:
            if column not in header:
                raise SchemaError(f"CSV is missing required column {column!r}")
        means: dict[tuple[str, float, int], float] = {}
        bands: dict[tuple[str, float, int], float] = {}
        for rec in reader:
            if rec["trial"] not in ("mean", "ci95"):
                continue
            key = (rec["gamma_label"], float(rec["lambda"]), int(rec["T"]))
            target = means if rec["trial"] == "mean" else bands
            target[key] = float(rec[value_column])
    return means, bands


def build_figure(csv_path, spec: FigureSpec):
    """Figure with one CI-banded curve per lambda; returns (figure, gamma)."""
    column, x_mode, x_label, y_label = KINDS[spec.kind]
    means, bands = read_aggregates(csv_path, column)

    labels = []
    for gamma_label, _, _ in means:
        if gamma_label not in labels:
            labels.append(gamma_label)
    gamma = spec.gamma_label if spec.gamma_label is not None else (labels[0] if labels else None)
    selected = {k: v for k, v in means.items() if k[0] == gamma}
    if not selected:
        raise EmptySelectionError(
            f"no aggregate rows for gamma_label={gamma!r} in {csv_path}"
            + (f" (available: {labels})" if labels else " (no aggregate rows at all)")
        )

    lambdas = sorted({lam for _, lam, _ in selected})
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for lam in lambdas:
        ts = sorted(T for g, l, T in selected if l == lam)
        xs = np.sqrt(ts) if x_mode == "sqrt" else np.array(ts, dtype=float)
        ys = np.array([selected[(gamma, lam, T)] for T in ts])
        hw = np.array([bands.get((gamma, lam, T), 0.0) for T in ts])
        (line,) = ax.plot(xs, ys, marker="o", markersize=3, label=f"lambda={lam:g}")
        ax.fill_between(xs, ys - hw, ys + hw, alpha=0.25, color=line.get_color(), linewidth=0)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.set_title(f"{y_label} (gamma {gamma})")
    ax.legend()
    fig.tight_layout()
    return fig, gamma


def render(csv_path, spec: FigureSpec, out_dir) -> Path:
    """Write one figure file; the name is a pure function of the inputs."""
    fig, gamma = build_figure(csv_path, spec)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    safe_gamma = str(gamma).replace("/", "-").replace(" ", "_")
    out = out_dir / f"{spec.kind}__{safe_gamma}.{spec.fmt}"
    save_kwargs = {"dpi": 130}
    if spec.fmt == "svg":
        plt.rcParams["svg.hashsalt"] = "fair-nrm-plots"
        save_kwargs["metadata"] = {"Date": None}
    fig.savefig(out, **save_kwargs)
    plt.close(fig)
    return out


def render_all(csv_path, kinds, out_dir, gamma_label=None, fmt="png") -> list[Path]:
    return [
        render(csv_path, FigureSpec(kind=kind, gamma_label=gamma_label, fmt=fmt), out_dir)
        for kind in kinds
    ]
