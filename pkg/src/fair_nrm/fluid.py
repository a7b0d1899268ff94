"""Static-price fluid benchmark, regret, and fairness/reward metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import Instance, expected_demand
from .policy import TrajectoryRecord
from .regularizers import Regularizer


class InfeasibleFluidError(RuntimeError):
    """No price in the box keeps expected consumption within gamma."""


@dataclass(frozen=True)
class FluidSolution:
    """Best static price: per-period value r(p*) + phi(A D(p*)) subject to
    A D(p*) <= gamma, plus the resources that sit on the constraint."""

    p_star: np.ndarray
    J_D_per_period: float
    binding: list[int]


def _grid_axes(lo: float, hi: float, resolution: float, n: int) -> list[np.ndarray]:
    count = max(2, int(np.ceil((hi - lo) / resolution)) + 1) if hi > lo else 1
    return [np.linspace(lo, hi, count) for _ in range(n)]


def _evaluate(inst: Instance, reg: Regularizer, pts: np.ndarray, slack: float = 1e-9):
    demand = pts @ inst.params.B.T + inst.params.alpha
    cons = demand @ inst.A.T
    feasible = np.all(cons <= inst.gamma + slack, axis=1)
    objective = np.einsum("kn,kn->k", pts, demand) + reg.eval_batch(cons)
    return objective, feasible


def _grid_best(inst, reg, axes) -> tuple[np.ndarray, float] | None:
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    objective, feasible = _evaluate(inst, reg, pts)
    if not feasible.any():
        return None
    objective = np.where(feasible, objective, -np.inf)
    best = int(np.argmax(objective))
    return pts[best], float(objective[best])


def solve_fluid(
    inst: Instance,
    reg: Regularizer,
    resolution: float = 0.01,
    method: str = "grid",
    binding_tol: float = 0.05,
) -> FluidSolution:
    """Grid-search the price box for the fluid optimum, then refine once at
    a tenth of the resolution around the incumbent.

    method='pgd' switches to penalized projected subgradient ascent for
    boxes too large to grid (not used by the reproduction runs).
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if method == "pgd":
        p_star = _fluid_pgd(inst, reg)
        obj, feas = _evaluate(inst, reg, p_star[None, :])
        if not feas[0]:
            raise InfeasibleFluidError("projected search ended infeasible")
        return _solution(inst, reg, p_star, float(obj[0]), binding_tol)
    n = inst.n_products
    if n > 3:
        raise ValueError("grid mode supports at most 3 products; use method='pgd'")

    coarse = _grid_best(inst, reg, _grid_axes(inst.price_lo, inst.price_hi, resolution, n))
    if coarse is None:
        raise InfeasibleFluidError(
            "no grid price satisfies A D(p) <= gamma; inventory too tight for the box"
        )
    incumbent, value = coarse
    fine_axes = [
        np.unique(
            np.clip(
                np.linspace(x - resolution, x + resolution, 21),
                inst.price_lo,
                inst.price_hi,
            )
        )
        for x in incumbent
    ]
    refined = _grid_best(inst, reg, fine_axes)
    if refined is not None and refined[1] > value:
        incumbent, value = refined
    return _solution(inst, reg, incumbent, value, binding_tol)


def _solution(inst, reg, p_star, value, binding_tol) -> FluidSolution:
    cons = inst.A @ expected_demand(inst.params, p_star)
    binding = [i for i in range(inst.n_resources) if cons[i] >= inst.gamma[i] - binding_tol]
    return FluidSolution(p_star=p_star, J_D_per_period=value, binding=binding)


def _fluid_pgd(inst, reg, iters: int = 5000, penalty: float = 1e3) -> np.ndarray:
    """Projected subgradient ascent on the penalized objective; the fairness
    term uses a minimizing-coordinate subgradient via finite differences."""
    n = inst.n_products
    p = np.full(n, 0.5 * (inst.price_lo + inst.price_hi))
    h = 1e-6
    for k in range(1, iters + 1):
        step = (inst.price_hi - inst.price_lo) / np.sqrt(k)

        def penalized(q):
            d = expected_demand(inst.params, q)
            cons = inst.A @ d
            return float(q @ d) + reg.eval(cons) - penalty * float(
                np.maximum(cons - inst.gamma, 0.0).sum()
            )

        base = penalized(p)
        grad = np.array([(penalized(p + h * e) - base) / h for e in np.eye(n)])
        p = np.clip(p + step * grad / (np.linalg.norm(grad) + 1e-12),
                    inst.price_lo, inst.price_hi)
    return p


def regret_of(
    traj: TrajectoryRecord, fluid: FluidSolution, reg: Regularizer, inst: Instance
) -> float:
    """Gap to the fluid benchmark over the horizon.

    Revenue enters through the expected revenue at the charged prices (the
    realized per-step revenue stays in the record for diagnostics); the
    fairness term applies to the realized average consumption.
    """
    expected_rev = _expected_revenue_per_step(traj, inst).sum()
    realized = expected_rev + inst.T * reg.eval(traj.consumption_total / inst.T)
    return inst.T * fluid.J_D_per_period - float(realized)


def realized_objective(traj: TrajectoryRecord, reg: Regularizer, inst: Instance) -> float:
    """Expected-revenue total plus the horizon-scaled fairness value."""
    return float(
        _expected_revenue_per_step(traj, inst).sum()
        + inst.T * reg.eval(traj.consumption_total / inst.T)
    )


def _expected_revenue_per_step(traj: TrajectoryRecord, inst: Instance) -> np.ndarray:
    prices = traj.prices[: traj.tau]
    demand = prices @ inst.params.B.T + inst.params.alpha
    return np.einsum("tn,tn->t", prices, demand)


def metrics(traj: TrajectoryRecord, inst: Instance) -> dict[str, float]:
    """Max-min fairness of average consumption and average expected reward."""
    avg_consumption = traj.consumption_total / inst.T
    return {
        "maxmin_fairness": float(avg_consumption.min()),
        "avg_reward": float(_expected_revenue_per_step(traj, inst).sum() / inst.T),
    }
