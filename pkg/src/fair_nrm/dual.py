"""Dual side: split-weight exponentiated gradient over the l1-ball of
resource prices, plus the estimated dual subgradient."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DualState:
    """Nonnegative positive/negative weight vectors representing mu = mu+ - mu-.

    Initialized with mass C in each vector (so mu = 0); every update
    renormalizes the combined mass to exactly C.
    """

    mu_plus: np.ndarray
    mu_minus: np.ndarray
    C: float
    eta: float
    t: int = 0

    @property
    def mu(self) -> np.ndarray:
        return self.mu_plus - self.mu_minus


def init_dual(n_resources: int, C: float, eta: float) -> DualState:
    if C <= 0 or eta <= 0:
        raise ValueError("C and eta must be positive")
    w = np.full(n_resources, C / n_resources)
    return DualState(mu_plus=w, mu_minus=w.copy(), C=C, eta=eta)


@dataclass(frozen=True)
class DualConfig:
    """Radius, step size, and gradient bound for the mirror descent solver."""

    C: float
    eta: float
    G: float

    @staticmethod
    def theory(
        L: float,
        phi_bar: float,
        r_bar: float,
        gamma: np.ndarray,
        p_bar: float,
        L_B: float,
        A_inf_norm: float,
        n_products: int,
        T: int,
        n_resources: int,
    ) -> "DualConfig":
        gamma = np.asarray(gamma, dtype=float)
        C = L + (r_bar + phi_bar) / float(gamma.min())
        G = 2.0 * max(p_bar, 1.0) * (n_products + 1) * L_B * A_inf_norm + float(gamma.max())
        c1 = math.log(2 * n_resources)
        c2 = C * C * G * G / 2.0
        return DualConfig(C=C, eta=math.sqrt(c1 / (c2 * T)), G=G)

    @staticmethod
    def experiment(T: int, C: float = 5.0) -> "DualConfig":
        return DualConfig(C=C, eta=0.01 / math.sqrt(T), G=float("nan"))


def estimated_subgradient(d_check_at_pt: np.ndarray, A: np.ndarray, s_t: np.ndarray) -> np.ndarray:
    """Subgradient estimate -A D(p_t) + s_t of the dual objective."""
    return s_t - A @ d_check_at_pt


def eg_pm_update(state: DualState, g_check: np.ndarray) -> DualState:
    """One multiplicative-weights step on the split vectors.

    Exponents are shifted by their maximum before exponentiation; the shift
    cancels in the normalization, which rescales total mass to C.
    """
    z = state.eta * state.C * np.asarray(g_check, dtype=float)
    shift = float(np.max(np.abs(z)))
    w_plus = state.mu_plus * np.exp(-z - shift)
    w_minus = state.mu_minus * np.exp(z - shift)
    total = float(w_plus.sum() + w_minus.sum())
    if not (total > 0.0 and math.isfinite(total)):
        raise ValueError("dual weights collapsed to zero mass")
    scale = state.C / total
    return DualState(
        mu_plus=w_plus * scale,
        mu_minus=w_minus * scale,
        C=state.C,
        eta=state.eta,
        t=state.t + 1,
    )


def benchmark_grid(n_resources: int, C: float, size: int, seed: int = 0) -> np.ndarray:
    """Points in the l1-ball of radius C: all signed corners (the extreme
    points, so a linear benchmark attains its optimum on the grid), the
    center, and seeded random fill."""
    corners = np.concatenate([C * np.eye(n_resources), -C * np.eye(n_resources)])
    pts = [corners, np.zeros((1, n_resources))]
    fill = size - corners.shape[0] - 1
    if fill > 0:
        rng = np.random.default_rng(seed)
        raw = rng.dirichlet(np.ones(n_resources), size=fill)
        signs = rng.choice([-1.0, 1.0], size=(fill, n_resources))
        radii = C * rng.uniform(0.0, 1.0, size=(fill, 1))
        pts.append(radii * signs * raw)
    return np.concatenate(pts)[:size]


def online_regret_check(
    g_sequence: np.ndarray, C: float, eta: float, grid_size: int = 1000, seed: int = 0
) -> float:
    """Worst-case gap sum_t <mu_t - mu, g_t> over a benchmark grid in the
    l1-ball, for the trajectory the split-weight update produces on the
    given gradient sequence. Test instrumentation only."""
    g_sequence = np.asarray(g_sequence, dtype=float)
    m = g_sequence.shape[1]
    state = init_dual(m, C, eta)
    played = 0.0
    for g in g_sequence:
        played += float(state.mu @ g)
        state = eg_pm_update(state, g)
    totals = g_sequence.sum(axis=0)
    grid = benchmark_grid(m, C, grid_size, seed)
    return played - float(np.min(grid @ totals))
