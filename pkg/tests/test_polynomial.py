from fractions import Fraction as F

from hypothesis import given, strategies as st

from excoupling import polynomial as P

rat = st.fractions(min_value=-5, max_value=5, max_denominator=7)
poly = st.lists(rat, min_size=1, max_size=6).map(P.trim)


def test_basic_arithmetic():
    assert P.mul((1, 1), (-1, 1)) == (-1, 0, 1)
    assert P.derivative((3, 2, 5)) == (2, 10)
    assert P.evaluate((1, -2), F(1, 2)) == 0
    assert P.degree(()) == -1
    assert P.shift_up((1, 2)) == (0, 1, 2)


@given(poly, poly.filter(lambda q: len(q) > 0))
def test_division_identity(p, q):
    quo, rem = P.divmod_poly(p, q)
    assert P.add(P.mul(quo, q), rem) == P.trim(p)
    assert P.degree(rem) < P.degree(q)


def test_gcd_of_shared_factor():
    a = P.mul((1, -1), (2, 1))   # (x-1)... times (2+x)
    b = P.mul((1, -1), (3, 0, 1))
    assert P.gcd(a, b) == (-1, 1)


def test_sturm_counts_known_roots():
    # roots 1/4, 1/2, 3
    p = P.mul(P.mul((-F(1, 4), 1), (-F(1, 2), 1)), (-3, 1))
    assert P.count_roots_above(p, 0) == 3
    assert P.count_roots_above(p, F(1, 2)) == 1
    assert P.count_roots_between(p, 0, 1) == 2
    assert P.count_roots_above((1, 0, 1), -10) == 0


@given(st.lists(st.fractions(min_value=F(1, 9), max_value=10, max_denominator=9), min_size=1, max_size=5, unique=True))
def test_sturm_matches_constructed_positive_roots(roots):
    p = (1,)
    for r in roots:
        p = P.mul(p, (-r, 1))
    assert P.count_roots_above(p, 0) == len(roots)
