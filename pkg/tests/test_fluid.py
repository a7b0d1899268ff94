import numpy as np
import pytest

from fair_nrm import (
    InfeasibleFluidError,
    Instance,
    ModelParams,
    make_regularizer,
    metrics,
    regret_of,
    solve_fluid,
)
from fair_nrm.fluid import realized_objective
from fair_nrm.policy import TrajectoryRecord
from helpers import make_demo_instance

P_UNCONSTRAINED = np.array([8 / 3, 1.5])
P_CONSTRAINED = np.array([115 / 33, 39 / 22])


def fluid_following_record(inst, p_star, T=None):
    """Trajectory that charges p_star every period with expected demand."""
    T = inst.T if T is None else T
    d = inst.params.alpha + inst.params.B @ p_star
    prices = np.tile(p_star, (T, 1))
    demands = np.tile(d, (T, 1))
    inventory = inst.initial_inventory - np.cumsum(
        np.vstack([np.zeros(3), np.tile(inst.A @ d, (T - 1, 1))]), axis=0
    )
    return TrajectoryRecord(
        prices=prices,
        demands=demands,
        inventory_path=inventory,
        tau=T,
        revenue_per_step=np.einsum("tn,tn->t", prices, demands),
        consumption_total=T * (inst.A @ d),
        mu_path=np.zeros((T, 3)),
    )


class TestSolveFluid:
    def test_slack_inventory_recovers_revenue_maximizer(self):
        inst = make_demo_instance(gamma=(1000.0, 1000.0, 1000.0))
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        sol = solve_fluid(inst, reg, resolution=0.01)
        assert np.max(np.abs(sol.p_star - P_UNCONSTRAINED)) <= 0.01
        assert sol.binding == []

    def test_demo_constrained_optimum(self):
        inst = make_demo_instance()
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        sol = solve_fluid(inst, reg, resolution=0.01)
        assert np.max(np.abs(sol.p_star - P_CONSTRAINED)) <= 0.01
        assert sol.binding == [1]
        assert sol.J_D_per_period == pytest.approx(16.18939393939394, abs=1e-3)
        demand = inst.params.alpha + inst.params.B @ sol.p_star
        assert np.all(inst.A @ demand <= inst.gamma + 1e-6)

    def test_collapsed_box_returns_the_point(self):
        inst = Instance(
            A=[[1.0, 1.0], [3.0, 1.0], [0.0, 5.0]],
            gamma=[1000.0, 1000.0, 1000.0],
            price_lo=2.0,
            price_hi=2.0,
            T=100,
            params=ModelParams(alpha=[8.0, 9.0], B=[[-1.5, 0.0], [0.0, -3.0]]),
        )
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        sol = solve_fluid(inst, reg, resolution=0.1)
        assert np.allclose(sol.p_star, [2.0, 2.0])
        p = np.array([2.0, 2.0])
        want = float(p @ (inst.params.alpha + inst.params.B @ p))
        assert sol.J_D_per_period == pytest.approx(want)

    def test_infeasible_inventory_raises(self):
        # cap prices low enough that expected demand stays positive, making
        # the tiny inventory impossible to respect
        inst = Instance(
            A=[[1.0, 1.0], [3.0, 1.0], [0.0, 5.0]],
            gamma=[0.1, 0.1, 0.1],
            price_lo=1.0,
            price_hi=2.0,
            T=100,
            params=ModelParams(alpha=[8.0, 9.0], B=[[-1.5, 0.0], [0.0, -3.0]]),
        )
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        with pytest.raises(InfeasibleFluidError):
            solve_fluid(inst, reg, resolution=0.05)

    def test_finer_resolution_never_worse(self):
        inst = make_demo_instance()
        reg = make_regularizer("weighted_max_min", 1.0, inst.gamma)
        vals = [solve_fluid(inst, reg, resolution=r).J_D_per_period for r in (0.4, 0.2, 0.1)]
        assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9

    def test_regularized_optimum_dominates_plain_value(self):
        inst = make_demo_instance()
        plain = solve_fluid(inst, make_regularizer("weighted_max_min", 0.0, inst.gamma), 0.02)
        lam = 1.5
        fair = solve_fluid(inst, make_regularizer("weighted_max_min", lam, inst.gamma), 0.02)
        assert fair.J_D_per_period >= plain.J_D_per_period

    def test_pgd_mode_close_to_grid(self):
        inst = make_demo_instance(gamma=(1000.0, 1000.0, 1000.0))
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        grid = solve_fluid(inst, reg, resolution=0.01)
        pgd = solve_fluid(inst, reg, method="pgd")
        assert pgd.J_D_per_period >= grid.J_D_per_period - 0.05

    def test_grid_mode_rejects_many_products(self):
        rng = np.random.default_rng(0)
        B = -np.eye(4) * 2.0
        inst = Instance(
            A=np.ones((2, 4)),
            gamma=[100.0, 100.0],
            price_lo=1.0,
            price_hi=2.0,
            T=10,
            params=ModelParams(alpha=np.full(4, 5.0), B=B),
        )
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        with pytest.raises(ValueError, match="pgd"):
            solve_fluid(inst, reg, resolution=0.1)


class TestRegretAndMetrics:
    def test_fluid_follower_has_zero_regret(self):
        inst = make_demo_instance(T=200)
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        sol = solve_fluid(inst, reg, resolution=0.002)
        traj = fluid_following_record(inst, sol.p_star)
        assert regret_of(traj, sol, reg, inst) == pytest.approx(0.0, abs=1e-6)

    def test_zero_lambda_reduces_to_revenue_regret(self):
        inst = make_demo_instance(T=150)
        reg = make_regularizer("weighted_max_min", 0.0, inst.gamma)
        sol = solve_fluid(inst, reg, resolution=0.01)
        p_off = np.array([2.0, 2.0])
        traj = fluid_following_record(inst, p_off)
        d = inst.params.alpha + inst.params.B @ p_off
        want = inst.T * (sol.J_D_per_period - float(p_off @ d))
        assert regret_of(traj, sol, reg, inst) == pytest.approx(want, abs=1e-9)

    def test_realized_objective_complements_regret(self):
        inst = make_demo_instance(T=150)
        reg = make_regularizer("weighted_max_min", 1.0, inst.gamma)
        sol = solve_fluid(inst, reg, resolution=0.01)
        traj = fluid_following_record(inst, np.array([3.0, 1.8]))
        total = regret_of(traj, sol, reg, inst) + realized_objective(traj, reg, inst)
        assert total == pytest.approx(inst.T * sol.J_D_per_period, abs=1e-9)

    def test_metrics_zero_demand(self):
        inst = make_demo_instance(T=10)
        traj = TrajectoryRecord(
            prices=np.zeros((10, 2)),
            demands=np.zeros((10, 2)),
            inventory_path=np.tile(inst.initial_inventory, (10, 1)),
            tau=10,
            revenue_per_step=np.zeros(10),
            consumption_total=np.zeros(3),
            mu_path=np.zeros((10, 3)),
        )
        out = metrics(traj, inst)
        assert out["maxmin_fairness"] == 0.0
        assert out["avg_reward"] == 0.0

    def test_metrics_constant_unit_demand(self):
        inst = make_demo_instance(T=25)
        prices = np.tile([2.0, 2.0], (25, 1))
        demands = np.ones((25, 2))
        traj = TrajectoryRecord(
            prices=prices,
            demands=demands,
            inventory_path=np.tile(inst.initial_inventory, (25, 1)),
            tau=25,
            revenue_per_step=np.full(25, 4.0),
            consumption_total=25 * (inst.A @ np.ones(2)),
            mu_path=np.zeros((25, 3)),
        )
        out = metrics(traj, inst)
        assert out["maxmin_fairness"] == pytest.approx(2.0)

    def test_maxmin_bounded_by_inventory_rate(self):
        inst = make_demo_instance(T=120)
        reg = make_regularizer("weighted_max_min", 1.5, inst.gamma)
        from fair_nrm import PolicyConfig, run_episode

        traj = run_episode(inst, reg, PolicyConfig(seed=5))
        out = metrics(traj, inst)
        assert out["maxmin_fairness"] <= float(inst.gamma.min()) + 1e-9
