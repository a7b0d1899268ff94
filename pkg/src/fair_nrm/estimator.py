"""Demand learning: ridge regression, sup-norm confidence radii, and the
bounded negative-semidefinite projection of the fitted sensitivity matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .ellipsoid import EllipsoidProblem, find_feasible


def augment(p: np.ndarray) -> np.ndarray:
    """Price feature (p, 1): the trailing 1 carries the demand intercept."""
    return np.append(np.asarray(p, dtype=float), 1.0)


@dataclass(frozen=True)
class EstimatorState:
    """Ridge-regression state for the linear demand model.

    Bhat and Bcheck are N x (N+1) blocks [B | alpha]; Lambda is the
    regularized information matrix over augmented prices and Lambda_chol its
    cached lower Cholesky factor. kappa is the confidence-radius scale.
    """

    Lambda: np.ndarray
    Lambda_chol: np.ndarray
    Bhat: np.ndarray
    Bcheck: np.ndarray
    kappa: float
    reg_weight: float
    history_count: int
    moments: np.ndarray  # accumulated sum of outer(p_tilde, d), (N+1) x N

    @property
    def n_products(self) -> int:
        return self.Bhat.shape[0]


def new_state(n_products: int, reg_weight: float, kappa: float) -> EstimatorState:
    if reg_weight <= 0:
        raise ValueError("reg_weight must be positive")
    dim = n_products + 1
    lam = reg_weight * np.eye(dim)
    return EstimatorState(
        Lambda=lam,
        Lambda_chol=math.sqrt(reg_weight) * np.eye(dim),
        Bhat=np.zeros((n_products, dim)),
        Bcheck=np.zeros((n_products, dim)),
        kappa=kappa,
        reg_weight=reg_weight,
        history_count=0,
        moments=np.zeros((dim, n_products)),
    )


def observe(state: EstimatorState, p: np.ndarray, d: np.ndarray) -> EstimatorState:
    """Fold one (price, demand) pair into the moments and refit the ridge."""
    pt = augment(p)
    lam = state.Lambda + np.outer(pt, pt)
    moments = state.moments + np.outer(pt, np.asarray(d, dtype=float))
    chol = np.linalg.cholesky(lam)
    bhat = np.linalg.solve(lam, moments).T
    return replace(
        state,
        Lambda=lam,
        Lambda_chol=chol,
        Bhat=bhat,
        moments=moments,
        history_count=state.history_count + 1,
    )


def rls_fit(history, reg_weight: float, n_products: int | None = None):
    """Batch ridge fit; returns ([B | alpha], Lambda) for the given history.

    An empty history needs n_products to size the pure-ridge minimizer.
    """
    if reg_weight <= 0:
        raise ValueError("reg_weight must be positive")
    if not history:
        if n_products is None:
            raise ValueError("empty history requires n_products")
        dim = n_products + 1
        return np.zeros((n_products, dim)), reg_weight * np.eye(dim)
    n = len(history[0][0])
    dim = n + 1
    lam = reg_weight * np.eye(dim)
    moments = np.zeros((dim, n))
    for p, d in history:
        pt = augment(p)
        lam += np.outer(pt, pt)
        moments += np.outer(pt, np.asarray(d, dtype=float))
    bhat = np.linalg.solve(lam, moments).T
    return bhat, lam


def kappa_value(n_products: int, T: int, d_bar: float, L_B: float, p_bar: float) -> float:
    """Scale of the per-row confidence ellipsoid in the information norm."""
    if min(n_products, T) < 1 or min(d_bar, L_B, p_bar) <= 0:
        raise ValueError("all arguments must be positive, T >= 1")
    dim = n_products + 1
    log_term = math.log(n_products * T * (1.0 + p_bar**2 * T))
    return 2.0 * math.sqrt(2.0 * d_bar**2 * dim * log_term + 2.0 * dim * L_B**2)


class Radii(NamedTuple):
    delta_D: float
    delta_r: float
    delta_f: float


def whitened_feature(state: EstimatorState, p: np.ndarray) -> np.ndarray:
    """Lambda^{-1/2} p_tilde computed with the cached Cholesky factor."""
    pt = augment(p)
    return np.linalg.solve(state.Lambda_chol, pt)


def confidence_radii(
    state: EstimatorState,
    p: np.ndarray,
    mu_l1: float,
    A_inf_norm: float,
    n_products: int,
    p_bar: float,
) -> Radii:
    """Sup-norm confidence radii for demand, revenue, and adjusted reward."""
    scale = float(np.max(np.abs(whitened_feature(state, p))))
    delta_d = math.sqrt(n_products + 1) * state.kappa * scale
    delta_r = n_products * p_bar * delta_d
    return Radii(delta_d, delta_r, delta_r + mu_l1 * A_inf_norm * delta_d)


@dataclass(frozen=True)
class SeparationResult:
    """Membership verdict; when violated, `normal` strictly separates the
    query block from the feasible set and `which` labels the constraint."""

    inside: bool
    normal: Optional[np.ndarray] = None
    which: str = ""


def separation_oracle(query: np.ndarray, state: EstimatorState, L_B: float) -> SeparationResult:
    """Check the three constraint families on an [B | alpha] query block:
    per-row information-norm distance to the ridge fit, per-row magnitude,
    and negative semidefiniteness of the symmetrized square part."""
    n = state.n_products
    diff = query - state.Bhat
    whitened = diff @ state.Lambda_chol  # row i holds (L^T diff_i)^T
    dists = np.sqrt(np.einsum("ij,ij->i", whitened, whitened))
    over = np.nonzero(dists > state.kappa)[0]
    if over.size:
        i = int(over[0])
        normal = np.zeros_like(query)
        normal[i] = state.Lambda_chol @ (whitened[i] / dists[i])
        return SeparationResult(False, normal, f"confidence_row_{i}")
    norms = np.sqrt(np.einsum("ij,ij->i", query, query))
    over = np.nonzero(norms > 2.0 * L_B)[0]
    if over.size:
        i = int(over[0])
        normal = np.zeros_like(query)
        normal[i] = query[i] / norms[i]
        return SeparationResult(False, normal, f"row_norm_{i}")
    square = query[:, :n]
    sym = square + square.T
    top, vec = _top_eigenpair(sym)
    if top > 0.0:
        normal = np.zeros_like(query)
        normal[:, :n] = np.outer(vec, vec)
        return SeparationResult(False, normal, "nsd")
    return SeparationResult(True)


def _top_eigenpair(sym: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and eigenvector of a symmetric matrix; the 2x2
    case is closed-form to keep the per-period membership check cheap."""
    if sym.shape[0] == 2:
        a, b, d = sym[0, 0], sym[0, 1], sym[1, 1]
        half_gap = 0.5 * (a - d)
        radius = math.hypot(half_gap, b)
        top = 0.5 * (a + d) + radius
        if radius == 0.0:
            return float(top), np.array([1.0, 0.0])
        vec = np.array([half_gap + radius, b])
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:  # a - d = -2*radius, b = 0: top direction is e2
            return float(top), np.array([0.0, 1.0])
        return float(top), vec / norm
    vals, vecs = np.linalg.eigh(sym)
    return float(vals[-1]), vecs[:, -1]


def fallback_point(state: EstimatorState, L_B: float) -> np.ndarray:
    """Zero sensitivity block with the fitted intercept clamped row-wise."""
    out = np.zeros_like(state.Bhat)
    out[:, -1] = np.clip(state.Bhat[:, -1], -2.0 * L_B, 2.0 * L_B)
    return out


def solve_Mt(state: EstimatorState, L_B: float, T: int) -> np.ndarray:
    """Find a block near the ridge fit that is row-bounded and has a
    negative-semidefinite symmetric part; fall back to a zeroed block when
    the feasibility search fails."""
    n = state.n_products
    if separation_oracle(state.Bhat, state, L_B).inside:
        return state.Bhat.copy()

    shape = state.Bhat.shape
    if state.kappa * math.sqrt(n) <= float(T) ** -4:
        return fallback_point(state, L_B)

    def oracle(flat: np.ndarray):
        res = separation_oracle(flat.reshape(shape), state, L_B)
        return None if res.inside else res.normal.ravel()

    problem = EllipsoidProblem(
        dim=n * (n + 1),
        center0=state.Bhat.ravel(),
        R=state.kappa * math.sqrt(n),
        r=float(T) ** -4,
        oracle=oracle,
    )
    result = find_feasible(problem)
    if result.feasible:
        return result.x.reshape(shape)
    return fallback_point(state, L_B)
