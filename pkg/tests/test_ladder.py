import dataclasses
import math
from fractions import Fraction as F

import numpy as np
import pytest

from excoupling import ladder
from excoupling.errors import DomainError, LadderTermination
from excoupling.verification import morse_ratio_spread, schrodinger_residual

X = np.linspace(-6, 6, 241)
XM = np.linspace(-2.5, 12, 241)


def test_a1_must_vanish():
    with pytest.raises(DomainError):
        dataclasses.replace(ladder.harmonic_spec(), a=lambda n: 1.0)


@pytest.mark.parametrize("spec", [ladder.harmonic_spec(), ladder.morse_spec(F(7, 3)), ladder.morse_spec(0)])
def test_chain_exact(spec):
    rep = ladder.validate_chain(spec, n_max=10)
    assert rep.exact and rep.passed and rep.max_violation == 0


def test_chain_numeric_and_broken():
    spec = ladder.harmonic_spec()
    assert ladder.validate_chain(spec, X).passed
    bad = dataclasses.replace(spec, a=lambda n: -2 * (n - 1) + (1e-3 if n == 2 else 0.0))
    rep = ladder.validate_chain(bad, X)
    assert not rep.passed
    assert rep.max_violation == pytest.approx(1e-3, rel=1e-6)
    sym = ladder.validate_chain(bad)
    assert not sym.passed and sym.max_violation == pytest.approx(1e-3, rel=1e-9)


def test_grid_outside_interval_rejected():
    spec = dataclasses.replace(ladder.harmonic_spec(), interval=(-1.0, 1.0))
    with pytest.raises(DomainError):
        ladder.validate_chain(spec, X)


@pytest.mark.parametrize("n, poly", [
    (1, lambda x: 1.0),
    (2, lambda x: 2 * x),
    (3, lambda x: 4 * x * x - 2),
    (4, lambda x: 8 * x ** 3 - 12 * x),
])
def test_harmonic_closed_forms(n, poly):
    st, lam = ladder.harmonic_example(n)
    assert lam == 2 * n - 1
    expected = np.array([poly(x) for x in X]) * np.exp(-X ** 2 / 2)
    assert np.allclose(st.value(X), expected, atol=1e-13)


def test_build_ladder_orientation():
    states = ladder.build_ladder(ladder.harmonic_spec(), 8)
    assert [s.n for s in states] == list(range(1, 9))
    with pytest.raises(LadderTermination) as info:
        ladder.build_ladder(ladder.harmonic_spec(), 3, orientation=1)
    assert info.value.level == 2 and len(info.value.states) == 1


def test_ground_state_solves_minus_form_only_for_minus_orientation():
    spec = ladder.harmonic_spec()
    good = ladder.LadderState(1, spec, 0.0, -1)
    assert ladder.sl_residual(good, spec, "minus", X) < 1e-8


def test_quadrature_and_closed_antiderivative_agree():
    spec = ladder.morse_spec(F(1, 2))
    quad = dataclasses.replace(spec, antiderivative=None)
    x = XM[::12]
    a = ladder.LadderState(4, spec, 0.0).value(x)
    b = ladder.LadderState(4, quad, 0.0).value(x)
    assert np.allclose(a, b, rtol=1e-11, atol=0)


@pytest.mark.parametrize("n", range(1, 9))
def test_harmonic_contract(n):
    spec = ladder.harmonic_spec()
    st, _ = ladder.harmonic_example(n)
    assert ladder.sl_residual(st, spec, "minus", X) <= 1e-8
    assert ladder.sl_residual(st, spec, "plus", X) <= 1e-8
    assert schrodinger_residual(n) <= 1e-8
    if n > 1:
        assert max(ladder.dirac_residual(ladder.harmonic_example(n - 1)[0], st, spec, X)) <= 1e-8


@pytest.mark.parametrize("kap", [0, F(1, 2), 2])
def test_morse_contract(kap):
    spec = ladder.morse_spec(kap)
    states = ladder.build_ladder(spec, 8, 0.0, XM)
    for s in states:
        assert ladder.sl_residual(s, spec, "minus", XM) <= 1e-8
        assert ladder.sl_residual(s, spec, "plus", XM) <= 1e-8
    for a, b in zip(states, states[1:]):
        assert max(ladder.dirac_residual(a, b, spec, XM)) <= 1e-8


@pytest.mark.parametrize("kap, n", [(0, 1), (0, 2), (F(1, 2), 3), (2, 8)])
def test_morse_matches_factorization(kap, n):
    spread, mean = morse_ratio_spread(kap, n)
    assert spread < 1e-10
    assert mean == pytest.approx(math.e, rel=1e-12)  # v_1(0) = 1 versus exp(-1)


def test_sl_residual_detects_wrong_equation():
    spec = ladder.harmonic_spec()
    st, _ = ladder.harmonic_example(3)
    shifted = dataclasses.replace(spec, a=lambda n: -2 * (n - 1) + (0.5 if n == 3 else 0))
    assert ladder.sl_residual(st, shifted, "minus", X) > 1e-3


def test_dirac9_rejects_zero_d():
    spec = ladder.harmonic_spec()
    with pytest.raises(DomainError):
        ladder.dirac_residual(ladder.harmonic_example(1)[0], ladder.harmonic_example(2)[0], spec, X, d=0)


def test_dirac9_with_other_d():
    spec = dataclasses.replace(ladder.harmonic_spec(), d=lambda n: -2.5)
    a, b = ladder.harmonic_example(2)[0], ladder.harmonic_example(3)[0]
    assert max(ladder.dirac_residual(a, b, spec, X)) <= 1e-8


@pytest.mark.parametrize("state", [ladder.harmonic_example(5)[0], ladder.morse_example(F(1, 2), 4)])
def test_fd_convergence_second_order(state):
    assert ladder.derivative_convergence(state, np.linspace(-2, 3, 21)) >= 3.5


def test_harmonic_orthogonality():
    h = [ladder.harmonic_example(n)[0] for n in range(1, 7)]
    norm = [math.sqrt(ladder.inner(s, s, -8, 8)) for s in h]
    for i in range(6):
        for j in range(6):
            if i != j:
                assert abs(ladder.inner(h[i], h[j], -8, 8)) <= 1e-6 * norm[i] * norm[j]
    assert norm[0] ** 2 == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_never_simultaneously_zero():
    for n in range(1, 8):
        v, dv = ladder.harmonic_example(n)[0](X)
        assert np.all(np.hypot(v, dv) > 0)
