"""Recursive closed-form solutions of the Morse-type equation

    v'' = (exp(-2t) - (2 kappa + 2j - 1) exp(-t) + kappa^2) v

and the Dirac solutions and Prufer angles built from them.

Every level is stored as a polynomial in ``s = exp(-t)``:

    v_j(t) = p_j(s) * exp(-s - kappa t).

Differentiation in t acts on the polynomial factor as
``p -> -s p'(s) + (s - kappa) p(s)``, so the raising step
``v_{j+1} = (kappa + j - exp(-t)) v_j - v_j'`` becomes
``p_{j+1} = (2 kappa + j - 2s) p_j + s p_j'`` and all identities reduce to
finite coefficient algebra.  With rational ``kappa`` that algebra is exact.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Tuple

from . import polynomial as P
from .coulomb import asymptotic_angles
from .errors import DomainError, RecursionCheckError


@dataclass(frozen=True)
class WeightedPolynomial:
    """Level ``j`` solution ``p_j(exp(-t)) exp(-exp(-t) - kappa t)``."""

    kappa: object
    j: int
    coeffs: Tuple
    exact: bool

    @property
    def degree(self) -> int:
        return P.degree(self.coeffs)

    def __call__(self, t: float) -> float:
        sign, log_abs = evaluate_v(self, t)
        return 0.0 if sign == 0 else sign * math.exp(log_abs)


def _kappa(kappa, exact):
    if exact is None:
        exact = not isinstance(kappa, float)
    if isinstance(kappa, str):
        kappa = Fraction(kappa)
    if exact:
        kappa = Fraction(kappa)
    else:
        kappa = float(kappa)
    if kappa < 0:
        raise DomainError(f"kappa must be nonnegative, got {kappa}")
    return kappa, exact


def ground(kappa, exact=None) -> WeightedPolynomial:
    """Level 1: ``v_1 = exp(-exp(-t) - kappa t)``, i.e. ``p_1 = 1``.

    ``exact`` defaults to True unless ``kappa`` is a float; strings such as
    ``"7/3"`` are parsed as fractions.
    """
    kappa, exact = _kappa(kappa, exact)
    one = Fraction(1) if exact else 1.0
    return WeightedPolynomial(kappa, 1, (one,), exact)


def raise_level(p: WeightedPolynomial) -> WeightedPolynomial:
    """One raising step ``p_{j+1} = (2 kappa + j - 2s) p_j + s p_j'``."""
    factor = (2 * p.kappa + p.j, -2)
    new = P.add(P.mul(factor, p.coeffs), P.shift_up(P.derivative(p.coeffs)))
    return WeightedPolynomial(p.kappa, p.j + 1, new, p.exact)


@lru_cache(maxsize=256)
def _levels(kappa, exact: bool, j_max: int):
    out = [ground(kappa, exact)]
    while out[-1].j < j_max:
        out.append(raise_level(out[-1]))
    return tuple(out)


def level(kappa, j: int, exact=None) -> WeightedPolynomial:
    """The level-``j`` weighted polynomial for ``kappa``."""
    if j < 1:
        raise DomainError(f"level must be >= 1, got {j}")
    kappa, exact = _kappa(kappa, exact)
    return _levels(kappa, exact, j)[j - 1]


def t_derivative(coeffs, kappa):
    """Polynomial factor of ``d/dt [p(s) exp(-s - kappa t)]``."""
    return P.add(P.scale(P.shift_up(P.derivative(coeffs)), -1), P.mul((-kappa, 1), coeffs))


def ode_residual(p: WeightedPolynomial):
    """Polynomial factor of ``v'' - (s^2 - (2kappa + 2j - 1) s + kappa^2) v``.

    Identically zero (empty tuple) when the recursion is right.
    """
    k = p.kappa
    second = t_derivative(t_derivative(p.coeffs, k), k)
    potential = (k * k, -(2 * k + 2 * p.j - 1), 1)
    return P.sub(second, P.mul(potential, p.coeffs))


def _float_coeffs(coeffs):
    return [float(c) for c in coeffs]


def log_abs_poly(coeffs, s: float, log_s: float):
    """(sign, log|p(s)|) without overflow for large ``s``."""
    c = _float_coeffs(coeffs)
    if not c:
        return 0, -math.inf
    if s <= 1.0:
        val = P.evaluate(c, s)
        if val == 0:
            return 0, -math.inf
        return (1 if val > 0 else -1), math.log(abs(val))
    d = len(c) - 1
    inv = math.exp(-log_s)
    val = P.evaluate(c[::-1], inv)  # p(s) / s^d
    if val == 0:
        return 0, -math.inf
    return (1 if val > 0 else -1), math.log(abs(val)) + d * log_s


def evaluate_v(p: WeightedPolynomial, t: float):
    """``(sign, log|v_j(t)|)`` with ``log|v| = log|p(s)| - s - kappa t``."""
    log_s = -t
    s = math.exp(log_s) if log_s < 709.0 else math.inf
    if math.isinf(s):
        # only the leading coefficient matters; s itself dominates the weight
        sign = 1 if float(p.coeffs[-1]) > 0 else -1
        return sign, -math.inf
    sign, lp = log_abs_poly(p.coeffs, s, log_s)
    if sign == 0:
        return 0, -math.inf
    return sign, lp - s - float(p.kappa) * t


def _exact_coeffs(p: WeightedPolynomial):
    return tuple(Fraction(c) for c in p.coeffs)


def count_zeros(p: WeightedPolynomial) -> int:
    """Number of distinct zeros of ``v_j`` on the real line (roots of p_j with s > 0).

    Floating-mode coefficients are converted to their exact binary rational
    values first, so the count is exact for the polynomial actually stored.
    Raises :class:`RecursionCheckError` on a repeated positive root.
    """
    coeffs = _exact_coeffs(p)
    seq = P.sturm_sequence(coeffs)
    n = P.count_roots_above(coeffs, Fraction(0), seq)
    g = P.gcd(coeffs, P.derivative(coeffs))
    if P.degree(g) > 0 and P.count_roots_above(g, Fraction(0)) > 0:
        raise RecursionCheckError(f"level {p.j} has a repeated zero")
    return n


def constant_term(p: WeightedPolynomial):
    return p.coeffs[0] if p.coeffs else 0


def ratio_limits(j: int, kappa, exact=None):
    """Limits of ``v_j / v_{j+1}`` at ``t -> +inf`` and ``t -> -inf``.

    At ``+inf`` (``s -> 0``) the weights cancel and the ratio tends to
    ``p_j(0) / p_{j+1}(0)``, asserted equal to ``1 / (2 kappa + j)``.  At
    ``-inf`` the degree grows by one per level with leading-coefficient
    ratio ``-1/2``, so the ratio tends to 0.
    """
    if j < 1:
        raise DomainError(f"level must be >= 1, got {j}")
    pj = level(kappa, j, exact)
    pn = level(kappa, j + 1, exact)
    limit_plus = constant_term(pj) / constant_term(pn)
    expected = 1 / (2 * pj.kappa + j)
    if pj.exact:
        ok = limit_plus == expected
    else:
        ok = abs(limit_plus - expected) <= 1e-10 * abs(expected)
    if not ok:
        raise RecursionCheckError(f"p_j(0)/p_(j+1)(0) = {limit_plus}, expected {expected}")
    lead_ratio = pj.coeffs[-1] / pn.coeffs[-1]
    if pn.degree != pj.degree + 1 or lead_ratio != Fraction(-1, 2):
        raise RecursionCheckError(f"degree/leading-coefficient pattern broken at level {j}")
    return limit_plus, 0


@dataclass(frozen=True)
class DiracSolution:
    """``u = (v_{j+1} / sqrt(2kj - j^2), v_j)`` at ``kappa = k - j``.

    Solves ``u1' = (exp(-t) - k) u1 - c u2``, ``u2' = c u1 + (k - exp(-t)) u2``
    with ``c = -sqrt(2kj - j^2)``.
    """

    k: float
    j: int
    c: float
    norm: float
    lower: WeightedPolynomial
    upper: WeightedPolynomial

    def log_components(self, t: float):
        """((sign, log|u1|), (sign, log|u2|)) at ``t``."""
        s1, l1 = evaluate_v(self.upper, t)
        s2, l2 = evaluate_v(self.lower, t)
        return (s1, l1 - math.log(self.norm)), (s2, l2)

    def __call__(self, t: float):
        (s1, l1), (s2, l2) = self.log_components(t)
        return s1 * math.exp(l1), s2 * math.exp(l2)

    def residual(self, t: float) -> float:
        """Largest relative residual of the two component equations at ``t``.

        The common weight is divided out; derivatives are exact polynomial
        algebra, so the residual measures rounding only.
        """
        s = math.exp(-t)
        kap = self.lower.kappa
        q1 = P.scale(self.upper.coeffs, 1 / Fraction(self.norm))
        q2 = self.lower.coeffs
        d1, d2 = t_derivative(q1, kap), t_derivative(q2, kap)
        u1, u2 = float(P.evaluate(q1, Fraction(s))), float(P.evaluate(q2, Fraction(s)))
        du1, du2 = float(P.evaluate(d1, Fraction(s))), float(P.evaluate(d2, Fraction(s)))
        k, c = self.k, self.c
        r1 = du1 - ((s - k) * u1 - c * u2)
        r2 = du2 - (c * u1 + (k - s) * u2)
        sc1 = abs(du1) + abs((s - k) * u1) + abs(c * u2)
        sc2 = abs(du2) + abs(c * u1) + abs((k - s) * u2)
        return max(abs(r1) / sc1, abs(r2) / sc2)


def dirac_solution(k, j: int) -> DiracSolution:
    """Closed-form solution of the model Dirac system at ``c = -sqrt(2kj - j^2)``."""
    if j < 1:
        raise DomainError(f"j must be >= 1, got {j}")
    if j > k:
        raise DomainError(f"need j <= k, got j={j}, k={k}")
    if j == k:
        warnings.warn("j = k gives the degenerate coupling c = -k", RuntimeWarning, stacklevel=2)
    # float k is taken at its exact binary value
    kap = Fraction(k) - j
    lower = level(kap, j, True)
    upper = level(kap, j + 1, True)
    norm = math.sqrt(float(2 * Fraction(k) * j - j * j))
    return DiracSolution(float(k), j, -norm, norm, lower, upper)


def angle_phi(j: int, kappa, t: float, exact=None) -> float:
    """Continuous decreasing Prufer angle of the level-``j`` Dirac solution.

    ``arctan(sqrt(2 kappa j + j^2) v_j / v_{j+1}) + pi``, unwound so that it
    drops by pi at every zero of ``v_{j+1}`` already passed; tends to pi at
    ``-inf`` and to ``theta_minus(-sqrt(2 kappa j + j^2), kappa + j) - (j-1) pi``
    at ``+inf``.
    """
    lo = level(kappa, j, exact)
    hi = level(kappa, j + 1, exact)
    scale = math.sqrt(float(2 * lo.kappa * j + j * j))
    log_s = -t
    if log_s >= 709.0:
        return math.pi
    s = math.exp(log_s)
    exact_hi = _exact_coeffs(hi)
    s_q = Fraction(s)
    passed = P.count_roots_above(exact_hi, s_q, _sturm(hi))
    if P.evaluate(exact_hi, s_q) == 0:
        return math.pi - 0.5 * math.pi - passed * math.pi
    ratio = _ratio(lo.coeffs, hi.coeffs, s, log_s)
    return math.pi + math.atan(scale * ratio) - passed * math.pi


@lru_cache(maxsize=256)
def _sturm_cached(coeffs):
    return P.sturm_sequence(coeffs)


def _sturm(p: WeightedPolynomial):
    return _sturm_cached(_exact_coeffs(p))


def _ratio(num, den, s, log_s):
    a, b = _float_coeffs(num), _float_coeffs(den)
    if s <= 1.0:
        return P.evaluate(a, s) / P.evaluate(b, s)
    inv = math.exp(-log_s)
    # deg den = deg num + 1
    return inv * P.evaluate(a[::-1], inv) / P.evaluate(b[::-1], inv)


def angle_limit_plus(j: int, kappa) -> float:
    """``theta_minus(-sqrt(2 kappa j + j^2), kappa + j) - (j - 1) pi``."""
    kap = float(Fraction(kappa)) if not isinstance(kappa, float) else kappa
    k = kap + j
    c = -math.sqrt(2 * kap * j + j * j)
    return asymptotic_angles(k, max(c, -k)).theta_minus - (j - 1) * math.pi
