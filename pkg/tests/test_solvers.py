import numpy as np
import pytest

from bellsim.core import SimConfig, SolverError
from bellsim.engine.simplex import phase_one
from bellsim.engine.divergence import (
    MinimaxProblem, kl_bits, project_simplex, floor_weights, projected_subgradient, mirror_descent,
    multi_restart,
)


def test_phase_one_feasible():
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 1, size=(3, 6))
    x0 = rng.uniform(0, 1, size=6)
    b = a @ x0
    ret = phase_one(a, b)
    assert ret.feasible
    assert ret.x.min() >= 0
    assert np.abs(a @ ret.x - b).max() < 1e-8


def test_phase_one_farkas_certificate():
    # x ≥ 0, x1 + x2 = -1 은 불가능
    a = np.array([[1.0, 1.0], [1.0, -1.0]])
    b = np.array([-1.0, 0.0])
    ret = phase_one(a, b)
    assert not ret.feasible
    assert np.all(ret.dual @ a <= 1e-9)
    assert ret.dual @ b > 0


def test_phase_one_pivot_limit():
    rng = np.random.default_rng(1)
    a = rng.uniform(0, 1, size=(4, 8))
    b = a @ rng.uniform(0, 1, size=8)
    with pytest.raises(SolverError):
        phase_one(a, b, max_pivots=0)


def test_kl_bits():
    p = np.array([0.5, 0.5, 0.0])
    assert abs(kl_bits(p, p)) < 1e-15
    assert abs(kl_bits(p, np.array([0.25, 0.25, 0.5])) - 1.0) < 1e-12
    assert kl_bits(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == float("inf")


def test_project_simplex():
    rng = np.random.default_rng(2)
    for _ in range(10):
        v = rng.normal(size=7) * 3
        w = project_simplex(v)
        assert w.min() >= 0
        assert abs(w.sum() - 1) < 1e-12
    w = np.array([0.2, 0.3, 0.5])
    assert np.abs(project_simplex(w) - w).max() < 1e-15
    assert floor_weights(np.array([1.0, 0.0])).min() > 0


def _toy_problem():
    # 두 입력 s, 꼭짓점 2개: 목표는 두 꼭짓점의 반반 혼합
    vertices = np.array([
        [[1.0, 0.0], [0.0, 1.0]],
        [[0.0, 1.0], [1.0, 0.0]],
    ])
    target = np.array([[0.5, 0.5], [0.5, 0.5]])
    return MinimaxProblem(target=target, vertices=vertices)


def test_solvers_reach_interior_optimum():
    problem = _toy_problem()
    w0 = np.array([0.9, 0.1])
    for solver in (projected_subgradient, mirror_descent):
        run = solver(problem, w0, max_iters=500)
        assert run.value < 1e-6
        assert abs(run.weights[0] - 0.5) < 1e-3


def test_multi_restart_first_start_is_uniform():
    problem = _toy_problem()
    with SimConfig.override(MEASURE_MAX_ITERS=50):
        run = multi_restart(problem, projected_subgradient, restarts=3, seed=0)
    assert run.value < 1e-6
