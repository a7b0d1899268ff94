"""TOML experiment configuration: instance, regularizer, policy, and grids."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .env import Instance, ModelParams, NoiseSpec
from .policy import PolicyConfig
from .regularizers import Regularizer, make_regularizer


class ConfigError(Exception):
    """Invalid configuration; message names the offending field."""


def _need(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"missing required field {path}.{key}")
    return table[key]


def _number(value, path: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{path} must be a number, got {value!r}")
    return float(value)


def _int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    return value


def _vector(value, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a numeric list") from None
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError(f"{path} must be a nonempty flat list")
    return arr


def _matrix(value, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a numeric list of rows") from None
    if arr.ndim != 2:
        raise ConfigError(f"{path} must be a list of equal-length rows")
    return arr


@dataclass
class ExperimentConfig:
    """Parsed configuration; builders stamp out per-cell objects."""

    alpha: np.ndarray
    B: np.ndarray
    A: np.ndarray
    base_gamma: np.ndarray
    price_lo: float
    price_hi: float
    base_T: int
    sigma: float
    clip: float
    d_bar: Optional[float]
    reg_variant: str
    reg_lambda: float
    reg_w: Optional[np.ndarray]
    reg_U: Optional[np.ndarray]
    reg_gamma_ref: Optional[np.ndarray]
    mode: str
    ucb_coefficient: Optional[float]
    reg_weight: Optional[float]
    dual_C: Optional[float]
    dual_eta: Optional[float]
    T_grid: list[int]
    lambdas: list[float]
    gammas: list[np.ndarray]
    gamma_labels: list[str]
    trials: int
    seed_base: int
    output: str
    fluid_resolution: float

    def make_instance(self, gamma=None, T: Optional[int] = None) -> Instance:
        return Instance(
            A=self.A,
            gamma=self.base_gamma if gamma is None else np.asarray(gamma, dtype=float),
            price_lo=self.price_lo,
            price_hi=self.price_hi,
            T=self.base_T if T is None else T,
            params=ModelParams(alpha=self.alpha, B=self.B),
            noise=NoiseSpec(sigma=self.sigma, clip=self.clip),
            d_bar=self.d_bar,
        )

    def make_regularizer(self, lam: Optional[float] = None, gamma=None) -> Regularizer:
        return make_regularizer(
            self.reg_variant,
            self.reg_lambda if lam is None else lam,
            self.base_gamma if gamma is None else gamma,
            w=self.reg_w,
            U=self.reg_U,
            gamma_ref=self.reg_gamma_ref,
        )

    def make_policy(self, seed: int) -> PolicyConfig:
        return PolicyConfig(
            mode=self.mode,
            seed=seed,
            ucb_coefficient=self.ucb_coefficient,
            reg_weight=self.reg_weight,
            C=self.dual_C,
            eta=self.dual_eta,
        )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    return parse_config(raw)


def parse_config(raw: dict[str, Any]) -> ExperimentConfig:
    inst = raw.get("instance")
    if not isinstance(inst, dict):
        raise ConfigError("missing [instance] table")
    alpha = _vector(_need(inst, "alpha", "instance"), "instance.alpha")
    B = _matrix(_need(inst, "B", "instance"), "instance.B")
    A = _matrix(_need(inst, "A", "instance"), "instance.A")
    gamma = _vector(_need(inst, "gamma", "instance"), "instance.gamma")
    price_lo = _number(_need(inst, "price_lo", "instance"), "instance.price_lo")
    price_hi = _number(_need(inst, "price_hi", "instance"), "instance.price_hi")
    base_T = _int(inst.get("T", 1000), "instance.T")
    sigma = _number(inst.get("sigma", 1.0), "instance.sigma")
    clip = _number(inst.get("clip", 1.0), "instance.clip")
    d_bar = inst.get("d_bar")
    if d_bar is not None:
        d_bar = _number(d_bar, "instance.d_bar")

    reg = raw.get("regularizer", {})
    if not isinstance(reg, dict):
        raise ConfigError("[regularizer] must be a table")
    variant = reg.get("variant", "weighted_max_min")
    if not isinstance(variant, str):
        raise ConfigError("regularizer.variant must be a string")
    reg_lambda = _number(reg.get("lambda", 1.0), "regularizer.lambda")
    reg_w = _vector(reg["w"], "regularizer.w") if "w" in reg else None
    reg_U = _matrix(reg["U"], "regularizer.U") if "U" in reg else None
    reg_ref = _vector(reg["gamma_ref"], "regularizer.gamma_ref") if "gamma_ref" in reg else None

    pol = raw.get("policy", {})
    if not isinstance(pol, dict):
        raise ConfigError("[policy] must be a table")
    mode = pol.get("mode", "experiment")
    if mode not in ("theory", "experiment"):
        raise ConfigError("policy.mode must be 'theory' or 'experiment'")
    ucb = pol.get("ucb_coefficient")
    ucb = _number(ucb, "policy.ucb_coefficient") if ucb is not None else None
    rw = pol.get("reg_weight")
    rw = _number(rw, "policy.reg_weight") if rw is not None else None
    d_C = pol.get("C")
    d_C = _number(d_C, "policy.C") if d_C is not None else None
    d_eta = pol.get("eta")
    d_eta = _number(d_eta, "policy.eta") if d_eta is not None else None

    exp = raw.get("experiment", {})
    if not isinstance(exp, dict):
        raise ConfigError("[experiment] must be a table")
    t_grid = exp.get("T_grid", [base_T])
    if not isinstance(t_grid, list) or not t_grid:
        raise ConfigError("experiment.T_grid must be a nonempty list")
    t_grid = [_int(t, "experiment.T_grid") for t in t_grid]
    if any(t < 1 for t in t_grid):
        raise ConfigError("experiment.T_grid entries must be >= 1")
    lambdas = exp.get("lambdas", [reg_lambda])
    if not isinstance(lambdas, list) or not lambdas:
        raise ConfigError("experiment.lambdas must be a nonempty list")
    lambdas = [_number(v, "experiment.lambdas") for v in lambdas]
    gammas_raw = exp.get("gammas", [gamma.tolist()])
    if not isinstance(gammas_raw, list) or not gammas_raw:
        raise ConfigError("experiment.gammas must be a nonempty list")
    gammas = [_vector(g, "experiment.gammas") for g in gammas_raw]
    labels = exp.get("gamma_labels")
    if labels is None:
        labels = ["-".join(_fmt_num(x) for x in g) for g in gammas]
    if not isinstance(labels, list) or len(labels) != len(gammas):
        raise ConfigError("experiment.gamma_labels must match experiment.gammas in length")
    trials = _int(exp.get("trials", 10), "experiment.trials")
    if trials < 1:
        raise ConfigError("experiment.trials must be >= 1")
    seed_base = _int(exp.get("seed_base", 0), "experiment.seed_base")
    output = exp.get("output", "results.csv")
    if not isinstance(output, str):
        raise ConfigError("experiment.output must be a string path")
    resolution = _number(exp.get("fluid_resolution", 0.01), "experiment.fluid_resolution")
    if resolution <= 0:
        raise ConfigError("experiment.fluid_resolution must be positive")

    cfg = ExperimentConfig(
        alpha=alpha, B=B, A=A, base_gamma=gamma,
        price_lo=price_lo, price_hi=price_hi, base_T=base_T,
        sigma=sigma, clip=clip, d_bar=d_bar,
        reg_variant=variant, reg_lambda=reg_lambda,
        reg_w=reg_w, reg_U=reg_U, reg_gamma_ref=reg_ref,
        mode=mode, ucb_coefficient=ucb, reg_weight=rw,
        dual_C=d_C, dual_eta=d_eta,
        T_grid=t_grid, lambdas=lambdas, gammas=gammas, gamma_labels=list(labels),
        trials=trials, seed_base=seed_base, output=output,
        fluid_resolution=resolution,
    )
    validate_config(cfg)
    return cfg


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)


def validate_config(cfg: ExperimentConfig) -> None:
    """Construct every instance/regularizer the grids imply, surfacing
    domain violations as field-level config errors."""
    try:
        for g in cfg.gammas:
            inst = cfg.make_instance(gamma=g, T=min(cfg.T_grid))
            for lam in cfg.lambdas:
                reg = cfg.make_regularizer(lam=lam, gamma=g)
                reg.metadata(inst.gamma)
        cfg.make_policy(seed=cfg.seed_base)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
