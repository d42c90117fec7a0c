"""Explicit exceptional couplings ``c_{n-1}(k) = -sqrt(2kn - n^2)`` for ``1 <= n < k``."""
from __future__ import annotations

import math
from fractions import Fraction

from .coulomb import ExceptionalValue, ExceptionalValues
from .errors import DomainError


def _positive_k(k):
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")


def coupling(k, n: int) -> float:
    """``-sqrt(n (2k - n))``.

    The radicand is formed exactly (a float ``k`` is taken at its binary value)
    and the float square root gets one Newton step with an exact residual.
    """
    x = Fraction(n) * (2 * Fraction(k) - n)
    if x < 0:
        raise DomainError(f"n={n} exceeds 2k={2 * k}")
    r = math.sqrt(float(x))
    if r > 0:
        r += float(x - Fraction(r) ** 2) / (2 * r)
    return -r


def exceptional_values(k) -> ExceptionalValues:
    """All exceptional couplings for ``k``, ordered by index ``m = n - 1``."""
    _positive_k(k)
    out = ExceptionalValues(float(k))
    n = 1
    while n < k:
        out.entries.append(ExceptionalValue(n - 1, coupling(k, n), "closed_form"))
        n += 1
    return out


def count_exceptional(k) -> int:
    """N with k in (N, N + 1]."""
    _positive_k(k)
    return math.ceil(k) - 1


def stability_bound_check(k, c) -> bool:
    """True iff ``c^2 < 2k - 1``.

    For k > 1 this is the same statement as ``|c| < |c_0(k)|``; the two are
    compared and a disagreement away from rounding level raises.
    """
    _positive_k(k)
    if not c < 0:
        raise DomainError(f"c must be negative, got {c}")
    inside = c * c < 2 * k - 1
    if k > 1:
        c0 = coupling(k, 1)
        other = abs(c) < abs(c0)
        if other != inside and abs(abs(c) - abs(c0)) > 1e-12 * abs(c0):
            raise AssertionError(f"bound check inconsistent for k={k}, c={c}")
    return inside
