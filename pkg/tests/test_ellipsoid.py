import math

import numpy as np
import pytest

from fair_nrm import EllipsoidProblem, find_feasible
from fair_nrm.ellipsoid import default_iteration_budget


def ball_oracle(center, radius):
    center = np.asarray(center, dtype=float)

    def oracle(x):
        gap = x - center
        if float(np.linalg.norm(gap)) <= radius:
            return None
        return gap

    return oracle


def box_oracle(lo, hi):
    def oracle(x):
        if np.all(x >= lo) and np.all(x <= hi):
            return None
        i = int(np.argmax(np.maximum(lo - x, x - hi)))
        normal = np.zeros_like(x)
        normal[i] = 1.0 if x[i] > hi else -1.0
        return normal

    return oracle


def test_feasible_center_returns_immediately():
    problem = EllipsoidProblem(
        dim=3, center0=np.zeros(3), R=10.0, r=0.5, oracle=ball_oracle(np.zeros(3), 1.0)
    )
    result = find_feasible(problem)
    assert result.feasible
    assert result.oracle_calls == 1
    assert np.allclose(result.x, 0.0)


def test_box_in_six_dimensions():
    n = 6
    problem = EllipsoidProblem(
        dim=n,
        center0=np.full(n, 0.5),
        R=math.sqrt(n),
        r=0.1,
        oracle=box_oracle(0.4, 0.6),
    )
    # start the search away from the target box
    problem.center0 = np.zeros(n)
    result = find_feasible(problem)
    assert result.feasible
    assert np.all(result.x >= 0.4) and np.all(result.x <= 0.6)
    assert result.oracle_calls <= problem.max_iters


def test_empty_intersection_exhausts_budget():
    def oracle(x):
        # two disjoint halfspaces: x0 <= -1 and x0 >= 1
        return np.array([1.0, 0.0]) if x[0] > -1.0 else np.array([-1.0, 0.0])

    problem = EllipsoidProblem(dim=2, center0=np.zeros(2), R=4.0, r=0.05, oracle=oracle)
    result = find_feasible(problem)
    assert not result.feasible
    assert result.x is None
    assert "budget" in result.reason


def test_returned_point_always_passes_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        center = rng.normal(size=n)
        oracle = ball_oracle(center, 0.3)
        problem = EllipsoidProblem(
            dim=n, center0=np.zeros(n), R=float(np.linalg.norm(center)) + 1.0, r=0.1,
            oracle=oracle,
        )
        result = find_feasible(problem)
        assert result.feasible
        assert oracle(result.x) is None


def test_volume_contraction_rate():
    n = 4

    def oracle(x):  # never satisfied: forces cuts every step
        return np.array([1.0, 0.0, 0.0, 0.0]) if x[0] > -100 else None

    problem = EllipsoidProblem(
        dim=n, center0=np.zeros(n), R=2.0, r=0.01, oracle=oracle, max_iters=50
    )
    trace = []
    find_feasible(problem, trace=trace)
    start = n * math.log(problem.R**2)
    logdets = [start] + trace
    drops = -np.diff(logdets)
    assert np.all(drops >= 1.0 / (2.0 * (n + 1)) - 1e-9)


def test_budget_default():
    assert default_iteration_budget(6, 208.0, 1e-16) == math.ceil(
        2 * 6 * 7 * math.log(208.0 / 1e-16)
    ) + 6


def test_invalid_radii_rejected():
    with pytest.raises(ValueError, match="R > r > 0"):
        EllipsoidProblem(dim=2, center0=np.zeros(2), R=1.0, r=2.0, oracle=lambda x: None)
