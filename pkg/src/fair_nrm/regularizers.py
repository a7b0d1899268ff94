"""Fairness regularizers on the average resource-consumption vector.

Four concave, bounded, sup-norm-Lipschitz variants, each exposing a closed
form, Lipschitz/bound metadata, and the conjugate-argmax oracle
max {phi(s) + mu.s : -gamma <= s <= gamma} used by the primal s-update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class RegMetadata(NamedTuple):
    L: float
    phi_bar: float


@dataclass(frozen=True)
class Regularizer:
    """Common interface; `lam` scales the whole regularizer."""

    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")

    def eval(self, s: np.ndarray) -> float:
        return float(self.eval_batch(np.asarray(s, dtype=float)[None, :])[0])

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over rows of an (K, M) array."""
        raise NotImplementedError

    def metadata(self, gamma: np.ndarray) -> RegMetadata:
        raise NotImplementedError

    def conjugate_argmax(self, mu: np.ndarray, gamma: np.ndarray) -> tuple[np.ndarray, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class WeightedMaxMin(Regularizer):
    """lam * min_i(w_i s_i): rewards lifting the worst weighted consumption."""

    w: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        w = np.asarray(self.w, dtype=float)
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "w", w)

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        return self.lam * np.min(self.w * s, axis=-1)

    def metadata(self, gamma: np.ndarray) -> RegMetadata:
        return RegMetadata(
            L=self.lam * float(np.max(self.w)),
            phi_bar=self.lam * float(np.max(self.w * gamma)),
        )

    def conjugate_argmax(self, mu, gamma):
        mu = np.asarray(mu, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        y, _ = _maxmin_singleton_max(
            self.lam, mu / self.w, -self.w * gamma, self.w * gamma
        )
        s = y / self.w
        return s, self.eval(s) + float(mu @ s)


@dataclass(frozen=True)
class GroupMaxMin(Regularizer):
    """lam * min over groups of the summed weighted consumption.

    U is a 0-1 grouping matrix: one nonzero per column, at least one per row.
    """

    w: np.ndarray = None
    U: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        w = np.asarray(self.w, dtype=float)
        U = np.asarray(self.U, dtype=float)
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if U.ndim != 2 or U.shape[1] != w.shape[0]:
            raise ValueError("U must be K x M with M matching w")
        if not np.all((U == 0) | (U == 1)):
            raise ValueError("U must be a 0-1 matrix")
        if np.any(U.sum(axis=0) != 1):
            raise ValueError("each U column must have exactly one nonzero")
        if np.any(U.sum(axis=1) < 1):
            raise ValueError("each U row must have at least one nonzero")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "U", U)

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        return self.lam * np.min((self.w * s) @ self.U.T, axis=-1)

    def metadata(self, gamma: np.ndarray) -> RegMetadata:
        u_inf = float(np.max(self.U.sum(axis=1)))
        return RegMetadata(
            L=self.lam * u_inf * float(np.max(self.w)),
            phi_bar=self.lam * float(np.max(self.U @ (self.w * gamma))),
        )

    def conjugate_argmax(self, mu, gamma):
        mu = np.asarray(mu, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        groups = [list(np.nonzero(row)[0]) for row in self.U]
        y, _ = _maxmin_linear_max(
            self.lam, mu / self.w, -self.w * gamma, self.w * gamma, groups
        )
        s = y / self.w
        return s, self.eval(s) + float(mu @ s)


@dataclass(frozen=True)
class RangeFairness(Regularizer):
    """lam * (min_i(w_i s_i) - max_i(w_i s_i) + max_i(w_i gamma_ref_i)).

    Penalizes the spread of the weighted consumption vector; the constant
    offset keeps the value nonnegative on the feasible range.
    """

    w: np.ndarray = None
    gamma_ref: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        w = np.asarray(self.w, dtype=float)
        gamma_ref = np.asarray(self.gamma_ref, dtype=float)
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if np.any(gamma_ref <= 0):
            raise ValueError("gamma_ref must be positive")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "gamma_ref", gamma_ref)

    @property
    def offset(self) -> float:
        return float(np.max(self.w * self.gamma_ref))

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        y = self.w * s
        return self.lam * (np.min(y, axis=-1) - np.max(y, axis=-1) + self.offset)

    def metadata(self, gamma: np.ndarray) -> RegMetadata:
        return RegMetadata(
            L=2.0 * self.lam * float(np.max(self.w)),
            phi_bar=self.lam * self.offset,
        )

    def conjugate_argmax(self, mu, gamma):
        mu = np.asarray(mu, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        y, _ = _range_linear_max(self.lam, mu / self.w, -self.w * gamma, self.w * gamma)
        s = y / self.w
        return s, self.eval(s) + float(mu @ s)


@dataclass(frozen=True)
class LoadBalancing(Regularizer):
    """lam * min_i((gamma_ref_i - s_i) / gamma_ref_i): relative headroom."""

    gamma_ref: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        gamma_ref = np.asarray(self.gamma_ref, dtype=float)
        if np.any(gamma_ref <= 0):
            raise ValueError("gamma_ref must be positive")
        object.__setattr__(self, "gamma_ref", gamma_ref)

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        return self.lam * np.min((self.gamma_ref - s) / self.gamma_ref, axis=-1)

    def metadata(self, gamma: np.ndarray) -> RegMetadata:
        return RegMetadata(
            L=self.lam / float(np.min(self.gamma_ref)),
            phi_bar=self.lam,
        )

    def conjugate_argmax(self, mu, gamma):
        # Substitute y_i = (ref_i - s_i)/ref_i; the box -gamma <= s <= gamma
        # maps to 1 - gamma/ref <= y <= 1 + gamma/ref and the linear term
        # becomes -(mu*ref) . y plus a constant.
        mu = np.asarray(mu, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        ref = self.gamma_ref
        y, _ = _maxmin_singleton_max(
            self.lam, -mu * ref, 1.0 - gamma / ref, 1.0 + gamma / ref
        )
        s = ref * (1.0 - y)
        return s, self.eval(s) + float(mu @ s)


def _maxmin_singleton_max(lam, c, lo, hi):
    """Specialized `_maxmin_linear_max` for singleton groups (plain min).

    The parametric maximum G(v) = lam*v + sum_i max{c_i y_i : y_i in
    [max(lo_i, v), hi_i]} kinks only at lower bounds of negative-coefficient
    coordinates, so one vectorized sweep over those kinks is exact.
    """
    v_max = float(hi.min())
    neg = c < 0
    cand = np.append(lo[neg][lo[neg] <= v_max], v_max)
    pos_part = float(c[~neg] @ hi[~neg])
    vals = lam * cand + pos_part
    if neg.any():
        vals = vals + (np.maximum(lo[neg][None, :], cand[:, None]) @ c[neg])
    v_star = float(cand[int(np.argmax(vals))])
    y = np.where(neg, np.maximum(lo, v_star), hi)
    return y, float(np.max(vals))


def _greedy_group_max(c, lo, hi, t):
    """max sum(c*y) over lo <= y <= hi with sum(y) >= t, or None if infeasible.

    The slack-free case is a continuous knapsack: raise the cheapest-to-raise
    coordinates (largest c first) from the unconstrained choice.
    """
    if t > hi.sum() + 1e-12:
        return None
    y = np.where(c >= 0, hi, lo)
    deficit = t - y.sum()
    if deficit > 0:
        order = np.argsort(-c)
        for i in order:
            if deficit <= 0:
                break
            room = hi[i] - y[i]
            bump = min(room, deficit)
            y[i] += bump
            deficit -= bump
    return y


def _maxmin_linear_max(lam, c, lo, hi, groups):
    """Maximize lam * min_k(sum_{i in k} y_i) + c.y over the box [lo, hi].

    The objective is concave piecewise-linear in the scalar t = min over
    groups, so it suffices to evaluate the partial maximum G(t) at the kink
    candidates: per-group knapsack breakpoints and the feasibility cap.
    """
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    t_cap = min(hi[g].sum() for g in groups)

    candidates = {t_cap}
    for g in groups:
        cg, log, hig = c[g], lo[g], hi[g]
        base = np.where(cg >= 0, hig, log)
        t0 = base.sum()
        candidates.add(min(t0, t_cap))
        order = np.argsort(-cg)
        run = t0
        for i in order:
            run += hig[i] - base[i]
            candidates.add(min(run, t_cap))

    best_val = -np.inf
    best_y = None
    for t in sorted(candidates):
        y = np.empty_like(c)
        ok = True
        for g in groups:
            yg = _greedy_group_max(c[g], lo[g], hi[g], t)
            if yg is None:
                ok = False
                break
            y[g] = yg
        if not ok:
            continue
        val = lam * min(y[g].sum() for g in groups) + float(c @ y)
        if val > best_val + 1e-15:
            best_val = val
            best_y = y
    return best_y, best_val


def _range_linear_max(lam, c, lo, hi):
    """Maximize lam * (min_i y_i - max_i y_i) + c.y over the box [lo, hi].

    Parametrize by (a, b) = (lower, upper) envelope of y; the partial maximum
    is concave piecewise-linear with kinks on the box bounds, so scanning
    bound pairs is exact.
    """
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    zs = np.unique(np.concatenate([lo, hi]))
    a_max = float(hi.min())
    b_min = float(lo.max())

    best_val = -np.inf
    best_y = None
    for a in zs:
        if a > a_max + 1e-12:
            continue
        for b in zs:
            if b < b_min - 1e-12 or b < a:
                continue
            y = np.where(c >= 0, np.minimum(hi, b), np.maximum(lo, a))
            val = lam * (a - b) + float(c @ y)
            if val > best_val + 1e-15:
                best_val = val
                best_y = y
    # report the attained objective of the reconstructed point (its envelope
    # can be strictly inside [a, b], which only improves the range term)
    val = lam * (best_y.min() - best_y.max()) + float(c @ best_y)
    return best_y, max(best_val, val)


def grid_conjugate_oracle(reg: Regularizer, mu, gamma, resolution: float) -> float:
    """Brute-force grid maximum of phi(s) + mu.s over the box; test oracle.

    Refuses more than 4 resources: the grid size is exponential in M.
    """
    mu = np.asarray(mu, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    m = gamma.shape[0]
    if m > 4:
        raise ValueError("grid oracle only supports up to 4 resources")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    axes = [
        np.linspace(-g, g, int(np.ceil(2 * g / resolution)) + 1) for g in gamma
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m_.ravel() for m_ in mesh], axis=1)
    vals = reg.eval_batch(pts) + pts @ mu
    return float(vals.max())


_VARIANTS = {
    "weighted_max_min": WeightedMaxMin,
    "group_max_min": GroupMaxMin,
    "range": RangeFairness,
    "load_balancing": LoadBalancing,
}


def make_regularizer(variant: str, lam: float, gamma, w=None, U=None, gamma_ref=None) -> Regularizer:
    """Build a regularizer by name, defaulting w to ones and refs to gamma."""
    gamma = np.asarray(gamma, dtype=float)
    if variant not in _VARIANTS:
        raise ValueError(f"unknown regularizer variant {variant!r}; "
                         f"expected one of {sorted(_VARIANTS)}")
    w = np.ones_like(gamma) if w is None else np.asarray(w, dtype=float)
    ref = gamma if gamma_ref is None else np.asarray(gamma_ref, dtype=float)
    if variant == "weighted_max_min":
        return WeightedMaxMin(lam=lam, w=w)
    if variant == "group_max_min":
        if U is None:
            raise ValueError("group_max_min requires a grouping matrix U")
        return GroupMaxMin(lam=lam, w=w, U=np.asarray(U, dtype=float))
    if variant == "range":
        return RangeFairness(lam=lam, w=w, gamma_ref=ref)
    return LoadBalancing(lam=lam, gamma_ref=ref)
