"""Market environment: linear demand, truncated noise, inventory dynamics."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np


def _as_float_array(x, ndim: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Linear demand model D(p) = alpha + B p.

    B must be negative definite (checked via the largest eigenvalue of the
    symmetrized matrix), which makes the revenue p . D(p) strictly concave.
    """

    alpha: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        alpha = _as_float_array(self.alpha, 1, "alpha")
        B = _as_float_array(self.B, 2, "B")
        n = alpha.shape[0]
        if B.shape != (n, n):
            raise ValueError(f"B must be {n}x{n}, got {B.shape}")
        sym_top = float(np.linalg.eigvalsh(B + B.T)[-1])
        if sym_top >= 0.0:
            raise ValueError(
                f"B must be negative definite; lambda_max(B + B^T) = {sym_top:.3g} >= 0"
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "B", B)

    @property
    def n_products(self) -> int:
        return self.alpha.shape[0]

    def row_bound(self) -> float:
        """Smallest admissible per-row magnitude bound (floored at 1).

        Bound on sqrt(alpha_i^2 + ||i-th row of B||_2^2) over rows.
        """
        norms = np.sqrt(self.alpha**2 + np.sum(self.B**2, axis=1))
        return max(1.0, float(norms.max()))


@dataclass(frozen=True)
class NoiseSpec:
    """Demand noise: Normal(0, sigma) truncated to [-clip, clip] per component."""

    sigma: float = 1.0
    clip: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.clip <= 0:
            raise ValueError("clip must be positive")


@dataclass(frozen=True)
class Instance:
    """Full problem description for one selling season.

    Initial inventory is T * gamma. d_bar is an almost-sure upper bound on
    any realized demand component; when omitted it is computed as the largest
    clipped expected demand over the price-box corners plus the noise clip.
    """

    A: np.ndarray
    gamma: np.ndarray
    price_lo: float
    price_hi: float
    T: int
    params: ModelParams
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    d_bar: float | None = None

    def __post_init__(self):
        A = _as_float_array(self.A, 2, "A")
        gamma = _as_float_array(self.gamma, 1, "gamma")
        if A.shape != (gamma.shape[0], self.params.n_products):
            raise ValueError(
                f"A must be {gamma.shape[0]}x{self.params.n_products}, got {A.shape}"
            )
        if np.any(A < 0):
            raise ValueError("A must be entry-wise nonnegative")
        if np.any(gamma <= 0):
            raise ValueError("gamma must be entry-wise positive")
        if not (0 < self.price_lo <= self.price_hi):
            raise ValueError("need 0 < price_lo <= price_hi")
        if self.T < 1:
            raise ValueError("T must be a positive integer")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "gamma", gamma)
        d_bar = self.d_bar
        default = demand_bound(self.params, self.price_lo, self.price_hi, self.noise.clip)
        if d_bar is None:
            d_bar = default
        elif d_bar < default - 1e-12:
            raise ValueError(
                f"d_bar={d_bar} cannot bound realizable demand (needs >= {default:.6g})"
            )
        object.__setattr__(self, "d_bar", float(d_bar))

    @property
    def n_products(self) -> int:
        return self.params.n_products

    @property
    def n_resources(self) -> int:
        return self.gamma.shape[0]

    @property
    def initial_inventory(self) -> np.ndarray:
        return self.T * self.gamma

    def with_horizon(self, T: int) -> "Instance":
        return replace(self, T=T)

    def with_gamma(self, gamma) -> "Instance":
        return replace(self, gamma=np.asarray(gamma, dtype=float))


def demand_bound(params: ModelParams, price_lo: float, price_hi: float, clip: float) -> float:
    """Largest achievable realized demand component over the price box.

    Expected demand is affine so its maximum over the box sits at a corner;
    realized demand adds at most `clip` on top of the clamped expectation.
    """
    best = 0.0
    for corner in itertools.product([price_lo, price_hi], repeat=params.n_products):
        d = expected_demand(params, np.array(corner, dtype=float))
        best = max(best, float(np.max(np.maximum(d, 0.0))))
    return best + clip


@dataclass(frozen=True)
class InventoryState:
    """Remaining resource units and the current period index."""

    levels: np.ndarray
    t: int = 0


def expected_demand(params: ModelParams, p: np.ndarray) -> np.ndarray:
    """Exact (unclipped) expected demand alpha + B p; may be negative."""
    p = np.asarray(p, dtype=float)
    if p.shape != (params.n_products,):
        raise ValueError(f"price vector must have shape ({params.n_products},)")
    return params.alpha + params.B @ p


def sample_demand(inst: Instance, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Realized demand max(0, D(p) + eps) with eps ~ clip(Normal(0, sigma), clip)."""
    mean = expected_demand(inst.params, p)
    eps = rng.normal(0.0, inst.noise.sigma, size=inst.n_products) if inst.noise.sigma > 0 else 0.0
    eps = np.clip(eps, -inst.noise.clip, inst.noise.clip)
    return np.maximum(mean + eps, 0.0)


def consume(state: InventoryState, A: np.ndarray, d: np.ndarray) -> InventoryState:
    """Advance one period: subtract A d from the levels (may go negative)."""
    return InventoryState(levels=state.levels - A @ d, t=state.t + 1)


def is_depleted(state: InventoryState) -> bool:
    return bool(np.min(state.levels) <= 0.0)
