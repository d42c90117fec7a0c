"""Univariate polynomials as ascending coefficient tuples, exact with Fractions.

Only what the recursion checks need: arithmetic, derivative, evaluation,
Euclidean division, gcd and Sturm-sequence root counting.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Tuple

Poly = Tuple


def trim(p: Sequence) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def degree(p: Poly) -> int:
    """Degree, with -1 for the zero polynomial."""
    return len(trim(p)) - 1


def add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def scale(p: Poly, a) -> Poly:
    return trim([a * c for c in p])


def sub(p: Poly, q: Poly) -> Poly:
    return add(p, scale(q, -1))


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def shift_up(p: Poly) -> Poly:
    """Multiply by the variable."""
    return trim([0] + list(p)) if p else ()


def derivative(p: Poly) -> Poly:
    return trim([i * p[i] for i in range(1, len(p))])


def evaluate(p: Poly, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def divmod_poly(p: Poly, q: Poly):
    q = trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(trim(p))
    dq = len(q) - 1
    lead = q[-1]
    quot = [0] * max(len(r) - dq, 1)
    while len(r) - 1 >= dq and r:
        shift = len(r) - 1 - dq
        coef = Fraction(r[-1]) / Fraction(lead) if not isinstance(r[-1], float) else r[-1] / lead
        quot[shift] = coef
        for i, b in enumerate(q):
            r[i + shift] -= coef * b
        r.pop()
        r = list(trim(r))
    return trim(quot), trim(r)


def gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd (exact for Fraction coefficients)."""
    a, b = trim(p), trim(q)
    while b:
        _, r = divmod_poly(a, b)
        a, b = b, r
    if not a:
        return ()
    return scale(a, Fraction(1) / Fraction(a[-1]))


def sturm_sequence(p: Poly) -> list:
    seq = [trim(p), derivative(trim(p))]
    while seq[-1]:
        _, r = divmod_poly(seq[-2], seq[-1])
        if not r:
            break
        seq.append(scale(r, -1))
    return seq


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _variations(signs) -> int:
    nz = [s for s in signs if s]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def variations_at(seq, x) -> int:
    return _variations(_sign(evaluate(s, x)) for s in seq)


def variations_at_infinity(seq) -> int:
    return _variations(_sign(s[-1]) if s else 0 for s in seq)


def count_roots_above(p: Poly, a, seq=None) -> int:
    """Distinct real roots in ``(a, inf)`` (exact for rational coefficients and ``a``)."""
    seq = sturm_sequence(p) if seq is None else seq
    return variations_at(seq, a) - variations_at_infinity(seq)


def count_roots_between(p: Poly, a, b, seq=None) -> int:
    """Distinct real roots in ``(a, b]``."""
    seq = sturm_sequence(p) if seq is None else seq
    return variations_at(seq, a) - variations_at(seq, b)
