"""One selling-season episode: learn, price, observe, consume, update duals."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dual import DualConfig, eg_pm_update, estimated_subgradient, init_dual
from .env import Instance, sample_demand
from .estimator import augment, kappa_value, new_state, observe, solve_Mt
from .primal import primal_price_update
from .regularizers import Regularizer


@dataclass(frozen=True)
class PolicyConfig:
    """Mode selects the parameter defaults; explicit fields override them.

    theory: ridge weight N+1, dual radius/step and exploration coefficient
    from the worst-case constants. experiment: ridge weight 1e-3, C=5,
    eta=0.01/sqrt(T), exploration coefficient 20*sqrt(ln T).
    """

    mode: str = "experiment"
    seed: int = 0
    ucb_coefficient: Optional[float] = None
    reg_weight: Optional[float] = None
    C: Optional[float] = None
    eta: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("theory", "experiment"):
            raise ValueError("mode must be 'theory' or 'experiment'")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Episode log. Row t of inventory_path is the stock available when
    period t starts; rows freeze once the episode stops, so the identity
    inventory_path[t+1] = inventory_path[t] - A d_t holds along the whole
    log. tau is the number of executed periods (pricing stops after the
    period whose consumption depletes a resource)."""

    prices: np.ndarray
    demands: np.ndarray
    inventory_path: np.ndarray
    tau: int
    revenue_per_step: np.ndarray
    consumption_total: np.ndarray
    mu_path: np.ndarray


def theory_ucb_coefficient(n_products: int, kappa: float, p_bar: float,
                           mu_l1: float, a_inf: float) -> float:
    """Coefficient of the whitened-feature sup-norm in the primal objective."""
    return 2.0 * math.sqrt(n_products + 1) * kappa * (n_products * p_bar + mu_l1 * a_inf)


def episode_parameters(inst: Instance, reg: Regularizer, cfg: PolicyConfig):
    """Resolve (reg_weight, dual config, kappa, L_B) for an episode."""
    n, m, T = inst.n_products, inst.n_resources, inst.T
    l_b = inst.params.row_bound()
    kappa = kappa_value(n, T, inst.d_bar, l_b, inst.price_hi)
    a_inf = float(np.abs(inst.A).sum(axis=1).max())
    if cfg.mode == "theory":
        reg_weight = float(n + 1)
        meta = reg.metadata(inst.gamma)
        r_bar = n * inst.price_hi * inst.d_bar
        dual_cfg = DualConfig.theory(
            L=meta.L, phi_bar=meta.phi_bar, r_bar=r_bar, gamma=inst.gamma,
            p_bar=inst.price_hi, L_B=l_b, A_inf_norm=a_inf,
            n_products=n, T=T, n_resources=m,
        )
    else:
        reg_weight = 1e-3
        dual_cfg = DualConfig.experiment(T)
    if cfg.reg_weight is not None:
        reg_weight = cfg.reg_weight
    if cfg.C is not None or cfg.eta is not None:
        dual_cfg = DualConfig(
            C=cfg.C if cfg.C is not None else dual_cfg.C,
            eta=cfg.eta if cfg.eta is not None else dual_cfg.eta,
            G=dual_cfg.G,
        )
    return reg_weight, dual_cfg, kappa, l_b, a_inf


def run_episode(
    inst: Instance,
    reg: Regularizer,
    cfg: PolicyConfig,
    rng: Optional[np.random.Generator] = None,
) -> TrajectoryRecord:
    """Run one episode of the primal-dual pricing policy.

    Per period: refit the ridge estimator on the history, project it onto
    the bounded negative-semidefinite set, price by maximizing the
    optimistic adjusted reward, draw demand, consume, then update the dual
    weights from the estimated subgradient. Stops at depletion or T.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n, m, T = inst.n_products, inst.n_resources, inst.T
    reg_weight, dual_cfg, kappa, l_b, a_inf = episode_parameters(inst, reg, cfg)

    if cfg.mode == "experiment":
        fixed_coeff = (
            cfg.ucb_coefficient
            if cfg.ucb_coefficient is not None
            else 20.0 * math.sqrt(math.log(T))
        )
    else:
        fixed_coeff = cfg.ucb_coefficient

    est = new_state(n, reg_weight, kappa)
    dual = init_dual(m, dual_cfg.C, dual_cfg.eta)

    prices = np.zeros((T, n))
    demands = np.zeros((T, n))
    inventory_path = np.zeros((T, m))
    revenue = np.zeros(T)
    mu_path = np.zeros((T, m))
    consumption = np.zeros(m)

    inventory = inst.initial_inventory.copy()
    warm = None
    tau = T
    for t in range(T):
        bcheck = solve_Mt(est, l_b, T)
        est = replace(est, Bcheck=bcheck)
        mu = dual.mu
        mu_l1 = float(np.abs(mu).sum())
        coeff = (
            fixed_coeff
            if fixed_coeff is not None
            else theory_ucb_coefficient(n, kappa, inst.price_hi, mu_l1, a_inf)
        )
        # solve_Mt certified Bcheck, so the concavity recheck can be skipped
        p, warm = primal_price_update(est, mu, inst, coeff, warm_start=warm,
                                      return_candidates=True, trust_concavity=True)
        s, _ = reg.conjugate_argmax(mu, inst.gamma)
        d = sample_demand(inst, p, rng)

        prices[t] = p
        demands[t] = d
        inventory_path[t] = inventory
        revenue[t] = float(p @ d)
        mu_path[t] = mu

        used = inst.A @ d
        consumption += used
        inventory = inventory - used
        if float(inventory.min()) <= 0.0:
            tau = t + 1
            inventory_path[t + 1 :] = inventory
            break

        g = estimated_subgradient(bcheck @ augment(p), inst.A, s)
        dual = eg_pm_update(dual, g)
        est = observe(est, p, d)

    return TrajectoryRecord(
        prices=prices,
        demands=demands,
        inventory_path=inventory_path,
        tau=tau,
        revenue_per_step=revenue,
        consumption_total=consumption,
        mu_path=mu_path,
    )
