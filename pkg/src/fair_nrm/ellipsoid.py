"""Central-cut ellipsoid method for convex feasibility via a separation oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


def default_iteration_budget(dim: int, R: float, r: float) -> int:
    """Standard volume-argument budget for finding a ball of radius r in Ball(R)."""
    return int(math.ceil(2.0 * dim * (dim + 1) * math.log(R / r))) + dim


@dataclass
class EllipsoidProblem:
    """Feasibility instance: the target set contains Ball(x1, r) for some x1
    and is contained in Ball(center0, R)."""

    dim: int
    center0: np.ndarray
    R: float
    r: float
    oracle: Callable[[np.ndarray], Optional[np.ndarray]]
    """Returns None if the query is feasible, else a separating normal c with
    c.query > c.y for all feasible y."""
    max_iters: int = 0

    def __post_init__(self):
        if not (self.R > self.r > 0):
            raise ValueError("need R > r > 0")
        self.center0 = np.asarray(self.center0, dtype=float)
        if self.center0.shape != (self.dim,):
            raise ValueError("center0 must match dim")
        if self.max_iters <= 0:
            self.max_iters = default_iteration_budget(self.dim, self.R, self.r)


@dataclass
class EllipsoidResult:
    feasible: bool
    x: Optional[np.ndarray]
    oracle_calls: int
    reason: str = ""


def find_feasible(problem: EllipsoidProblem, trace: Optional[list] = None) -> EllipsoidResult:
    """Run central cuts until the oracle accepts or the budget is exhausted.

    P is maintained as the ellipsoid shape matrix {y : (y-x)' P^-1 (y-x) <= 1},
    re-symmetrized every step; a non-positive c'Pc signals numerical collapse
    and is reported as infeasible. When `trace` is a list, the log-det of P
    after every cut is appended to it.
    """
    n = problem.dim
    x = problem.center0.copy()
    P = (problem.R**2) * np.eye(n)
    shrink = n * n / (n * n - 1.0) if n > 1 else 1.0

    for k in range(problem.max_iters):
        c = problem.oracle(x)
        if c is None:
            return EllipsoidResult(True, x, k + 1)
        c = np.asarray(c, dtype=float).ravel()
        Pc = P @ c
        cPc = float(c @ Pc)
        if cPc <= 0.0 or not np.isfinite(cPc):
            return EllipsoidResult(False, None, k + 1, "numerical collapse: c'Pc <= 0")
        step = Pc / math.sqrt(cPc)
        x = x - step / (n + 1.0)
        P = shrink * (P - (2.0 / (n + 1.0)) * np.outer(step, step))
        P = 0.5 * (P + P.T)
        if trace is not None:
            trace.append(float(np.linalg.slogdet(P)[1]))
    return EllipsoidResult(False, None, problem.max_iters, "iteration budget exhausted")
