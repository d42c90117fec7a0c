import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from excoupling.errors import IntegrationError
from excoupling.integrator import IntegratorConfig, solve


def test_exponential_decay_matches_exact():
    sol = solve(lambda x, y: -y, 0.0, [1.0], 5.0, IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14))
    assert abs(sol.y[-1, 0] - math.exp(-5)) < 1e-12


def test_backward_integration_reaches_target():
    sol = solve(lambda x, y: np.array([y[1], -y[0]]), 0.0, [0.0, 1.0], -3.0)
    assert sol.x[-1] == -3.0
    assert np.all(np.diff(sol.x) < 0)
    assert np.allclose(sol.y[-1], [math.sin(-3.0), math.cos(-3.0)], atol=1e-9)


def test_eval_points_hit_exactly_and_dense_output():
    xs = np.linspace(0, 2, 7)
    sol = solve(lambda x, y: np.cos(x) * np.ones(1), 0.0, [0.0], 2.0, x_eval=xs)
    for x in xs:
        assert x in sol.x
    q = np.linspace(0.05, 1.95, 33)
    assert np.max(np.abs(sol(q)[:, 0] - np.sin(q))) < 1e-9


def test_agrees_with_scipy_on_van_der_pol():
    def f(x, y):
        return np.array([y[1], 2.0 * (1 - y[0] ** 2) * y[1] - y[0]])

    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    mine = solve(f, 0.0, [2.0, 0.0], 6.0, cfg)
    ref = solve_ivp(f, (0, 6), [2.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-14)
    assert np.allclose(mine.y[-1], ref.y[:, -1], atol=1e-7)


def test_step_guard_limits_step_growth():
    guard_hits = []

    def guard(y0, y1):
        ok = abs(y1[0] - y0[0]) < 0.1
        if not ok:
            guard_hits.append(1)
        return ok

    sol = solve(lambda x, y: np.ones(1), 0.0, [0.0], 10.0, IntegratorConfig(max_step=5.0), step_guard=guard)
    assert np.max(np.abs(np.diff(sol.y[:, 0]))) < 0.1
    assert guard_hits


def test_step_budget_exhaustion_raises():
    with pytest.raises(IntegrationError):
        solve(lambda x, y: -y, 0.0, [1.0, 1.0], 100.0, IntegratorConfig(max_step=0.01, max_steps=10))


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=-1)
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")


def test_scalar_fast_path_matches_array_path():
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    a = solve(lambda x, y: math.sin(x * y[0]), 0.0, [1.0], 4.0, cfg, scalar_rhs=True)
    b = solve(lambda x, y: np.sin(x * y), 0.0, [1.0], 4.0, cfg)
    assert abs(len(a.x) - len(b.x)) <= 2
    assert abs(a.y[-1, 0] - b.y[-1, 0]) < 1e-9
