import math

import pytest
from hypothesis import given, strategies as st

from excoupling.closed_form import count_exceptional, coupling, exceptional_values, stability_bound_check
from excoupling.errors import DomainError


def test_k2_single_value():
    vals = exceptional_values(2).values
    assert vals == [-math.sqrt(3)]


def test_k1_empty():
    assert len(exceptional_values(1)) == 0


def test_k3_values_ordered():
    vals = exceptional_values(3).values
    assert vals == pytest.approx([-math.sqrt(5), -math.sqrt(8)], abs=1e-15)
    assert vals[0] > vals[1]


@pytest.mark.parametrize("k, n", [(1, 0), (3, 2), (3.0001, 3)])
def test_count(k, n):
    assert count_exceptional(k) == n


def test_new_value_enters_at_minus_k():
    vals = exceptional_values(3.0001).values
    assert vals[-1] == pytest.approx(-math.sqrt(2 * 3.0001 * 3 - 9), rel=1e-15)
    assert -3.0001 < vals[-1] < -3


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_edge_emergence(N):
    assert abs(exceptional_values(N + 1e-6).values[-1] + N) < 1e-3


def test_count_law_grid():
    for i in range(1, 101):
        k = 0.1 * i
        assert len(exceptional_values(k)) == count_exceptional(k) == math.ceil(k) - 1


@given(st.floats(0.01, 60))
def test_order_and_range(k):
    vals = exceptional_values(k).values
    assert all(-k < c < 0 for c in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert [e.m for e in exceptional_values(k)] == list(range(len(vals)))


def test_coupling_correctly_rounded():
    assert coupling(2, 1) == -math.sqrt(3)
    assert coupling(4, 2) == -math.sqrt(12)


@pytest.mark.parametrize("k, c, expected", [(2, -1, True), (2, -1.8, False), (1, -0.999, True)])
def test_stability_bound(k, c, expected):
    assert stability_bound_check(k, c) is expected


def test_stability_bound_k1_consistent_with_empty_set():
    assert stability_bound_check(1, -0.999) and len(exceptional_values(1)) == 0


@given(st.floats(1.001, 20), st.floats(0.001, 0.999))
def test_bound_equivalent_to_first_coupling(k, frac):
    c = -frac * k
    assert stability_bound_check(k, c) == (c * c < 2 * k - 1)


def test_rejects_bad_input():
    with pytest.raises(DomainError):
        exceptional_values(0)
    with pytest.raises(DomainError):
        stability_bound_check(2, 0.5)
