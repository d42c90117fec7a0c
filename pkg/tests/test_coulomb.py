import math
from dataclasses import replace

import numpy as np
import pytest

from excoupling.closed_form import exceptional_values
from excoupling.coulomb import (
    BOUNDARY,
    ModelParams,
    ShootingConfig,
    angle_curves,
    asymptotic_angles,
    find_exceptional_numeric,
    interval_index,
    mismatch,
    riccati_series,
    shooting_trajectory,
    theta0,
    theta0_reference,
    theta_inf,
)
from excoupling.errors import DomainError
from excoupling.factorization import angle_phi

CFG = ShootingConfig()
SQ3 = math.sqrt(3)


def lattice_distance(x):
    return abs(x - math.pi * round(x / math.pi))


def test_params_validated():
    with pytest.raises(DomainError):
        ModelParams(2, 0.5)
    with pytest.raises(DomainError):
        ModelParams(-1, -0.5)


@pytest.mark.parametrize("k, c, lo, hi", [
    (5.0, -5.0, math.pi / 4, math.pi / 4),
    (1.0, -0.5, math.pi / 12, 5 * math.pi / 12),
    (2.0, -SQ3, math.pi / 6, math.pi / 3),
])
def test_asymptotic_angles(k, c, lo, hi):
    a = asymptotic_angles(k, c)
    assert a.theta_minus == pytest.approx(lo, abs=1e-12)
    assert a.theta_plus == pytest.approx(hi, abs=1e-12)
    assert a.theta_minus + a.theta_plus == pytest.approx(math.pi / 2, abs=1e-15)
    assert math.sin(2 * a.theta_minus) == pytest.approx(-c / k, abs=1e-12)


def test_theta0_start_matches_first_order_asymptotics():
    # theta0 - pi = (c/2) e^t + O(e^{2t}); halving e^t quarters the remainder
    k, c = 2.0, -1.0
    r = [abs(theta0(ModelParams(k, c), t) - math.pi - 0.5 * c * math.exp(t)) for t in (-10, -10 - math.log(2))]
    assert r[0] / r[1] == pytest.approx(4, rel=0.01)


def test_series_against_stiff_reference():
    p = ModelParams(4.7, -4.5)
    assert abs(theta0(p, -1.0) - theta0_reference(p, -1.0)) < 1e-9


def test_riccati_series_leading_term():
    w, err = riccati_series(2.0, -1.0, 1e-6)
    assert w == pytest.approx(-0.5e-6, rel=1e-5)
    assert err < 1e-20


def test_theta_inf_initialized_at_theta_minus():
    p = ModelParams(2.0, -1.0)
    assert theta_inf(p, CFG.t_max) == asymptotic_angles(2.0, -1.0).theta_minus


def test_exceptional_matching_k2():
    p = ModelParams(2.0, -SQ3)
    t_mid = CFG.matching_point(2.0)
    assert lattice_distance(theta0(p, t_mid) - theta_inf(p, t_mid)) < 1e-6


def test_generic_c_does_not_match():
    p = ModelParams(2.0, -1.0)
    assert lattice_distance(mismatch(p)) > 0.01


def test_theta0_exceptional_terminal_value():
    t = np.linspace(-40, 40, 201)
    _, theta, _ = shooting_trajectory(ModelParams(2.0, -SQ3), t_eval=t)
    assert theta[-1] == pytest.approx(math.pi / 6, abs=1e-4)


def test_theta0_generic_terminal_value():
    for k, c in ((2.0, -0.1), (2.5, -1.0), (2.5, -2.3)):
        th = theta0(ModelParams(k, c), CFG.t_max)
        plus = asymptotic_angles(k, c).theta_plus
        assert lattice_distance(th - plus) < 1e-4


def test_no_root_for_small_k():
    # roots need mismatch = -m pi with m >= 0; the value pi is only reached at c = 0
    cs = np.linspace(-0.5 + 1e-4, -1e-4, 25)
    d = np.array([mismatch(ModelParams(0.5, c)) for c in cs])
    assert np.all(d > 1e-3) and np.all(d < math.pi)
    assert len(find_exceptional_numeric(0.5)) == 0


def test_mismatch_monotone():
    cs = np.linspace(-2 + 1e-4, -1e-4, 50)
    d = [mismatch(ModelParams(2.0, c)) for c in cs]
    assert np.all(np.diff(d) >= -1e-8)


def test_find_k2():
    r = find_exceptional_numeric(2.0)
    assert [e.m for e in r] == [0]
    assert r.values[0] == pytest.approx(-SQ3, abs=1e-6)
    lo, hi = r.entries[0].bracket
    f = lambda c: mismatch(ModelParams(2.0, c))
    assert f(lo) < 0 <= f(hi) or f(lo) <= 0 < f(hi)


def test_find_k1_empty():
    assert len(find_exceptional_numeric(1.0)) == 0


def test_find_k25():
    r = find_exceptional_numeric(2.5)
    assert [e.m for e in r] == [0, 1]
    assert r.values == pytest.approx([-2.0, -math.sqrt(6)], abs=1e-6)
    assert all(-2.5 < c < 0 for c in r.values)


def test_truncation_robustness():
    wide = replace(CFG, t_min=-80.0, t_max=80.0)
    a = find_exceptional_numeric(2.5).values
    b = find_exceptional_numeric(2.5, wide).values
    assert np.max(np.abs(np.subtract(a, b))) < CFG.bisect_tol


def test_dichotomy_sampled():
    k = 2.5
    cj = exceptional_values(k).values
    for c in np.linspace(-2.45, -0.05, 9):
        if min(abs(c - x) for x in cj) < 1e-5:
            continue
        th = theta0(ModelParams(k, c), CFG.t_max)
        a = asymptotic_angles(k, c)
        assert lattice_distance(th - a.theta_plus) < 1e-3
        assert lattice_distance(th - a.theta_minus) > 1e-3


@pytest.mark.parametrize("c, expected", [(-1.0, 0), (-1.9, 1), (-SQ3, BOUNDARY)])
def test_interval_index(c, expected):
    assert interval_index(2.0, c) == expected


def test_margin_enforced():
    with pytest.raises(DomainError):
        theta0(ModelParams(2.0, -1e-6), 0.0)


def test_shooting_curve_matches_closed_form_angle():
    t = np.linspace(-30, 30, 121)
    _, theta, _ = shooting_trajectory(ModelParams(3.0, -math.sqrt(8)), t_eval=t)
    phi = np.array([angle_phi(2, 1, x) for x in t])
    d = theta - phi
    assert np.max(np.abs(d - math.pi * round(np.median(d) / math.pi))) < 1e-4


def test_angle_curves_generic_and_exceptional():
    tm = CFG.matching_point(2.0)
    _, a, b = angle_curves(ModelParams(2.0, -SQ3), t_eval=[tm])
    assert lattice_distance(a[0] - b[0]) < 1e-4
    t, a, b = angle_curves(ModelParams(2.0, -1.0), t_eval=np.linspace(-40, 40, 41))
    assert lattice_distance(a[-1] - asymptotic_angles(2.0, -1.0).theta_plus) < 1e-4
    assert b[-1] == pytest.approx(asymptotic_angles(2.0, -1.0).theta_minus)
