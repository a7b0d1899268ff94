"""Multi-trial experiment runner: grid of (gamma, lambda, T, trial) cells,
per-cell metrics against cached fluid solutions, CSV output with aggregates."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, fields
from multiprocessing import Pool
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .config import ExperimentConfig
from .fluid import FluidSolution, metrics, realized_objective, regret_of, solve_fluid
from .policy import run_episode

CSV_COLUMNS = [
    "trial", "T", "lambda", "gamma_label", "regularizer", "seed", "tau",
    "regret", "relative_regret", "maxmin_fairness", "avg_reward",
    "realized_objective", "fluid_per_period",
]

AGGREGATED = [
    "tau", "regret", "relative_regret", "maxmin_fairness", "avg_reward",
    "realized_objective", "fluid_per_period",
]


@dataclass(frozen=True)
class ExperimentRow:
    """One CSV row; `trial` is an index for data rows or 'mean'/'ci95' for
    the per-cell aggregates (ci95 rows hold the 1.96*sd/sqrt(n) half-width)."""

    trial: Union[int, str]
    T: int
    lam: float
    gamma_label: str
    regularizer: str
    seed: Optional[int]
    tau: float
    regret: float
    relative_regret: float
    maxmin_fairness: float
    avg_reward: float
    realized_objective: float
    fluid_per_period: float

    def csv_values(self) -> list[str]:
        out = []
        for name in ("trial", "T", "lam", "gamma_label", "regularizer", "seed",
                     "tau", "regret", "relative_regret", "maxmin_fairness",
                     "avg_reward", "realized_objective", "fluid_per_period"):
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, str):
                out.append(v)
            elif isinstance(v, (int, np.integer)):
                out.append(repr(int(v)))
            else:
                out.append(repr(float(v)))
        return out


def write_rows(rows: list[ExperimentRow], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values())


def read_rows(path) -> list[ExperimentRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}; expected {CSV_COLUMNS}")
        rows = []
        for rec in reader:
            vals = dict(zip(CSV_COLUMNS, rec))
            trial: Union[int, str] = vals["trial"]
            if trial not in ("mean", "ci95"):
                trial = int(trial)
            rows.append(ExperimentRow(
                trial=trial,
                T=int(vals["T"]),
                lam=float(vals["lambda"]),
                gamma_label=vals["gamma_label"],
                regularizer=vals["regularizer"],
                seed=None if vals["seed"] == "" else int(vals["seed"]),
                tau=float(vals["tau"]) if trial in ("mean", "ci95") else int(vals["tau"]),
                regret=float(vals["regret"]),
                relative_regret=float(vals["relative_regret"]),
                maxmin_fairness=float(vals["maxmin_fairness"]),
                avg_reward=float(vals["avg_reward"]),
                realized_objective=float(vals["realized_objective"]),
                fluid_per_period=float(vals["fluid_per_period"]),
            ))
        return rows


def cell_seed(cfg: ExperimentConfig, g_idx: int, l_idx: int, t_idx: int, trial: int) -> int:
    """Stable per-cell seed: base plus the linear index over the grid."""
    idx = ((g_idx * len(cfg.lambdas) + l_idx) * len(cfg.T_grid) + t_idx) * cfg.trials + trial
    return cfg.seed_base + idx


def _run_cell(args) -> ExperimentRow:
    cfg, g_idx, l_idx, t_idx, trial, fluid = args
    gamma = cfg.gammas[g_idx]
    lam = cfg.lambdas[l_idx]
    T = cfg.T_grid[t_idx]
    inst = cfg.make_instance(gamma=gamma, T=T)
    reg = cfg.make_regularizer(lam=lam, gamma=gamma)
    seed = cell_seed(cfg, g_idx, l_idx, t_idx, trial)
    traj = run_episode(inst, reg, cfg.make_policy(seed=seed))
    regret = regret_of(traj, fluid, reg, inst)
    mets = metrics(traj, inst)
    denom = T * fluid.J_D_per_period
    return ExperimentRow(
        trial=trial,
        T=T,
        lam=lam,
        gamma_label=cfg.gamma_labels[g_idx],
        regularizer=cfg.reg_variant,
        seed=seed,
        tau=traj.tau,
        regret=regret,
        relative_regret=regret / denom if denom != 0 else float("nan"),
        maxmin_fairness=mets["maxmin_fairness"],
        avg_reward=mets["avg_reward"],
        realized_objective=realized_objective(traj, reg, inst),
        fluid_per_period=fluid.J_D_per_period,
    )


def fluid_solutions(cfg: ExperimentConfig) -> dict[tuple[int, int], FluidSolution]:
    """One fluid solve per (gamma, lambda); the horizon does not enter."""
    out = {}
    for g_idx, gamma in enumerate(cfg.gammas):
        inst = cfg.make_instance(gamma=gamma, T=max(cfg.T_grid))
        for l_idx, lam in enumerate(cfg.lambdas):
            reg = cfg.make_regularizer(lam=lam, gamma=gamma)
            out[(g_idx, l_idx)] = solve_fluid(inst, reg, resolution=cfg.fluid_resolution)
    return out


def max_workers(requested: Optional[int]) -> int:
    cap = os.environ.get("FAIR_NRM_THREADS")
    limit = os.cpu_count() or 1
    if cap is not None:
        try:
            limit = min(limit, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"FAIR_NRM_THREADS must be an integer, got {cap!r}") from None
    if requested is not None:
        limit = min(limit, max(1, requested))
    return limit


def aggregate(rows: list[ExperimentRow]) -> list[ExperimentRow]:
    """Append mean and 95% CI half-width rows for every (gamma, lambda, T)."""
    groups: dict[tuple, list[ExperimentRow]] = {}
    for row in rows:
        groups.setdefault((row.gamma_label, row.lam, row.T), []).append(row)
    out = []
    for (label, lam, T), members in groups.items():
        n = len(members)
        template = members[0]
        stats = {}
        for col in AGGREGATED:
            vals = np.array([getattr(r, col) for r in members], dtype=float)
            mean = float(vals.mean())
            half = 1.96 * float(vals.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
            stats[col] = (mean, half)
        kinds = (("mean", 0), ("ci95", 1)) if n > 1 else (("mean", 0),)
        for kind, pick in kinds:
            out.append(ExperimentRow(
                trial=kind, T=T, lam=lam, gamma_label=label,
                regularizer=template.regularizer, seed=None,
                **{col: stats[col][pick] for col in AGGREGATED},
            ))
    return out


def run_experiment(
    cfg: ExperimentConfig,
    out_path=None,
    trials: Optional[int] = None,
    seed_base: Optional[int] = None,
    parallel: Optional[int] = None,
) -> Path:
    """Run the full grid and write data rows followed by aggregate rows.

    Rows are emitted in grid order regardless of worker scheduling, so a
    rerun with the same seeds is byte-identical.
    """
    if trials is not None:
        cfg = _replace(cfg, trials=trials)
    if seed_base is not None:
        cfg = _replace(cfg, seed_base=seed_base)
    out = Path(out_path) if out_path is not None else Path(cfg.output)

    fluids = fluid_solutions(cfg)
    cells = [
        (cfg, g, l, t, trial, fluids[(g, l)])
        for g in range(len(cfg.gammas))
        for l in range(len(cfg.lambdas))
        for t in range(len(cfg.T_grid))
        for trial in range(cfg.trials)
    ]
    workers = max_workers(parallel)
    if workers > 1 and len(cells) > 1:
        with Pool(workers) as pool:
            rows = pool.map(_run_cell, cells, chunksize=1)
    else:
        rows = [_run_cell(c) for c in cells]
    rows = sorted(rows, key=lambda r: (r.gamma_label, r.lam, r.T, r.trial))
    rows += aggregate(rows)

    out.parent.mkdir(parents=True, exist_ok=True)
    write_rows(rows, out)
    return out


def _replace(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    data = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    data.update(kw)
    return ExperimentConfig(**data)
