"""Price update: concave box-constrained quadratic programs, one per signed
coordinate of the whitened feature, followed by a sup-norm selection step."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import EstimatorState, augment


@dataclass(frozen=True)
class BoxQP:
    """Maximize p.(c_lin + Q p) + affine_term.(p, 1) over [lo, hi]^N.

    Concave by contract: the symmetrized Q must be negative semidefinite.
    """

    c_lin: np.ndarray
    Q: np.ndarray
    affine_term: np.ndarray
    lo: float
    hi: float

    def value(self, p: np.ndarray) -> float:
        return float(p @ (self.c_lin + self.Q @ p) + self.affine_term @ augment(p))


def _pgd_batch(c_eff, q_sym, consts, affine_norms, q_norm, lo, hi, x0, tol, max_iters):
    """Projected gradient ascent with per-row backtracking on a batch of
    box QPs sharing the quadratic part.

    Rows maximize c_eff[k] . p + p . (Q p) + consts[k]; gradients use the
    symmetrized quadratic. Steps start at 1/(2||Q||_F + ||affine|| + 1),
    double after an accepted Armijo step, halve on rejection. A row stops
    when its unit-step projected-gradient residual falls below tol.
    """
    P = np.clip(x0, lo, hi).astype(float)
    half_q = 0.5 * q_sym

    def values(M):
        return np.einsum("kn,kn->k", M, M @ half_q) + (M * c_eff).sum(axis=1) + consts

    seeded = _kkt_seed(c_eff, q_sym, lo, hi)
    if seeded is not None:
        f_seed = values(seeded)
        better = f_seed > values(P)
        P[better] = seeded[better]

    F = values(P)
    steps = 1.0 / (2.0 * q_norm + affine_norms + 1.0)
    active = np.ones(P.shape[0], dtype=bool)

    for _ in range(max_iters):
        G = c_eff + P @ q_sym
        resid = np.max(np.abs(P - np.clip(P + G, lo, hi)), axis=1)
        active &= resid >= tol
        if not active.any():
            break
        trying = active.copy()
        while trying.any():
            cand = np.clip(P + steps[:, None] * G, lo, hi)
            moved = np.max(np.abs(cand - P), axis=1)
            # a step below float resolution cannot make progress: converged
            stalled = trying & (moved == 0.0)
            if stalled.any():
                active &= ~stalled
                trying &= ~stalled
            f_cand = values(cand)
            gain = ((cand - P) * G).sum(axis=1)
            ok = trying & (f_cand >= F + 1e-4 * gain)
            if ok.any():
                # value stagnation at float resolution means the remaining
                # ascent direction is numerically flat: count as converged
                flat = ok & (f_cand - F <= 1e-12 * (1.0 + np.abs(F)))
                P[ok] = cand[ok]
                F[ok] = f_cand[ok]
                steps[ok] = np.minimum(steps[ok] * 2.0, 1e9)
                trying &= ~ok
                if flat.any():
                    active &= ~flat
            steps[trying] *= 0.5
            dead = trying & (steps < 1e-18)
            if dead.any():
                active &= ~dead
                trying &= ~dead
    return P, F


def _kkt_seed(c_eff, q_sym, lo, hi):
    """Best feasible stationary candidate per row over all active-set
    configurations (each coordinate free, at lo, or at hi).

    A strictly concave quadratic attains its box maximum at one of these
    points, so seeding the ascent here lets the projected-gradient check
    terminate immediately; singular reduced systems are skipped and left to
    the iteration. Enumeration is exponential in N, hence the small-N guard.
    """
    k, n = c_eff.shape
    if n > 3:
        return None
    if n == 2:
        return _kkt_seed_2d(c_eff, q_sym, lo, hi)
    candidates = []
    for config in np.ndindex(*([3] * n)):
        free = [i for i in range(n) if config[i] == 0]
        x = np.empty((k, n))
        for i in range(n):
            if config[i] == 1:
                x[:, i] = lo
            elif config[i] == 2:
                x[:, i] = hi
        if free:
            fixed = [i for i in range(n) if config[i] != 0]
            rhs = -c_eff[:, free]
            if fixed:
                rhs = rhs - x[:, fixed] @ q_sym[np.ix_(fixed, free)]
            sub = q_sym[np.ix_(free, free)]
            try:
                sol = np.linalg.solve(sub, rhs.T).T
            except np.linalg.LinAlgError:
                continue
            if not np.isfinite(sol).all():
                continue
            x[:, free] = sol
        candidates.append(x)
    if not candidates:
        return None
    stack = np.stack(candidates)
    feasible = ((stack >= lo) & (stack <= hi)).all(axis=2)
    half_q = 0.5 * q_sym
    vals = (
        np.einsum("ckn,ckn->ck", stack, stack @ half_q)
        + np.einsum("ckn,kn->ck", stack, c_eff)
    )
    vals[~feasible] = -np.inf
    best = np.argmax(vals, axis=0)
    if not np.isfinite(vals[best, np.arange(k)]).all():
        return None
    return np.clip(stack[best, np.arange(k)], lo, hi)


def _kkt_seed_2d(c_eff, q_sym, lo, hi):
    """Closed-form candidate enumeration for the two-product case."""
    k = c_eff.shape[0]
    a, b, d = q_sym[0, 0], q_sym[0, 1], q_sym[1, 1]
    c0, c1 = c_eff[:, 0], c_eff[:, 1]
    det = a * d - b * b
    cand = np.empty((9, k, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        cand[0, :, 0] = (-d * c0 + b * c1) / det
        cand[0, :, 1] = (-a * c1 + b * c0) / det
        for j, v in enumerate((lo, hi)):
            cand[1 + j, :, 0] = v
            cand[1 + j, :, 1] = -(c1 + b * v) / d
            cand[3 + j, :, 0] = -(c0 + b * v) / a
            cand[3 + j, :, 1] = v
    cand[5] = (lo, lo)
    cand[6] = (lo, hi)
    cand[7] = (hi, lo)
    cand[8] = (hi, hi)

    np.nan_to_num(cand, copy=False, nan=np.inf)
    feasible = ((cand >= lo) & (cand <= hi)).all(axis=2)
    flat = np.clip(cand.reshape(-1, 2), lo, hi)
    vals = 0.5 * np.einsum("kn,kn->k", flat, flat @ q_sym) + np.einsum(
        "kn,kn->k", flat, np.tile(c_eff, (9, 1))
    )
    vals = vals.reshape(9, k)
    vals[~feasible] = -np.inf
    best = np.argmax(vals, axis=0)
    if not np.isfinite(vals[best, np.arange(k)]).all():
        return None
    return np.clip(cand[best, np.arange(k)], lo, hi)


def maximize_box_qp(
    qp: BoxQP,
    tol: float = 1e-8,
    max_iters: int = 100_000,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize one concave box QP to within tol stationarity.

    Raises on non-concave input (largest symmetrized eigenvalue above tol).
    """
    q_sym = qp.Q + qp.Q.T
    top = float(np.linalg.eigvalsh(q_sym)[-1])
    if top > tol:
        raise ValueError(f"BoxQP is not concave: lambda_max(Q + Q^T) = {top:.3g}")
    n = qp.c_lin.shape[0]
    start = x0 if x0 is not None else np.full(n, 0.5 * (qp.lo + qp.hi))
    P, F = _pgd_batch(
        c_eff=(qp.c_lin + qp.affine_term[:n])[None, :],
        q_sym=q_sym,
        consts=np.array([qp.affine_term[n]]),
        affine_norms=np.array([float(np.linalg.norm(qp.affine_term))]),
        q_norm=float(np.linalg.norm(qp.Q)),
        lo=qp.lo,
        hi=qp.hi,
        x0=np.asarray(start, dtype=float)[None, :],
        tol=tol,
        max_iters=max_iters,
    )
    return P[0], float(F[0])


def candidate_directions(linv: np.ndarray) -> np.ndarray:
    """Signed rows of the inverse Cholesky factor, interleaved +row, -row:
    the affine maps (p, 1) -> each signed whitened-feature component."""
    dim = linv.shape[0]
    rows = np.empty((2 * dim, dim))
    rows[0::2] = linv
    rows[1::2] = -linv
    return rows


def primal_price_update(
    est: EstimatorState,
    mu: np.ndarray,
    inst,
    coeff: float,
    warm_start: np.ndarray | None = None,
    tol: float = 1e-8,
    return_candidates: bool = False,
    trust_concavity: bool = False,
) -> np.ndarray:
    """Maximize the optimistic adjusted reward over the price box.

    The exploration bonus coeff * ||Lambda^{-1/2} (p, 1)||_inf splits the
    problem into 2(N+1) concave programs, one per signed whitened
    coordinate; the winner under the true sup-norm objective is returned,
    ties resolved to the lowest candidate index.
    """
    n = est.n_products
    bcheck = est.Bcheck
    square = bcheck[:, :n]
    q_sym = square + square.T
    if not trust_concavity:
        top = float(np.linalg.eigvalsh(q_sym)[-1])
        if top > tol:
            raise ValueError(f"Bcheck is not negative semidefinite: {top:.3g}")

    a_mu = inst.A.T @ mu
    c_lin = bcheck[:, n] - square.T @ a_mu
    const = -float(a_mu @ bcheck[:, n])
    linv = np.linalg.inv(est.Lambda_chol)
    directions = candidate_directions(linv)

    affine = coeff * directions
    affine[:, n] += const
    k = directions.shape[0]
    if warm_start is None:
        x0 = np.full((k, n), 0.5 * (inst.price_lo + inst.price_hi))
    else:
        warm = np.asarray(warm_start, dtype=float)
        x0 = warm.copy() if warm.ndim == 2 else np.tile(warm, (k, 1))
    P, _ = _pgd_batch(
        c_eff=c_lin + affine[:, :n],
        q_sym=q_sym,
        consts=affine[:, n],
        affine_norms=np.linalg.norm(affine, axis=1),
        q_norm=float(np.linalg.norm(square)),
        lo=inst.price_lo,
        hi=inst.price_hi,
        x0=x0,
        tol=tol,
        max_iters=100_000,
    )

    ones = np.ones((k, 1))
    pt = np.hstack([P, ones])
    demand = pt @ bcheck.T
    objective = ((P - a_mu) * demand).sum(axis=1) + coeff * np.max(np.abs(pt @ linv.T), axis=1)
    if return_candidates:
        return P[int(np.argmax(objective))], P
    return P[int(np.argmax(objective))]
