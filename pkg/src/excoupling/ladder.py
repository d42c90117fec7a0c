"""Factorization chains and the solutions they generate.

A chain is a sequence of constants ``a_n`` (``a_1 = 0``) and functions
``l_n`` with

    l_{n+1}^2 + l_{n+1}' + a_{n+1} = l_n^2 - l_n' + a_n .

Starting from ``v_1 = exp(-int l_1)`` the raising step
``v_n = l_n v_{n-1} - v_{n-1}'`` yields solutions of both

    minus form:  u'' = (a + l^2 - l') u    with a = a_n,     l = l_n
    plus form:   u'' = (a + l^2 + l') u    with a = a_{n+1}, l = l_{n+1}

and the pair ``u = (-v_n / d_n, v_{n-1})`` solves the first-order system
``u1' = -l_n u1 + (a_n / d_n) u2``, ``u2' = d_n u1 + l_n u2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import DomainError, LadderTermination

TRIVIAL_RATIO = 1e-13
MASK_RATIO = 1e-12
FD_STEP = 1e-3


def _one(n):
    return 1


@dataclass(frozen=True)
class LadderSpec:
    """A factorization chain.

    ``l(n, x)`` and ``dl(n, x)`` must accept numpy arrays.  ``l_expr(n)``
    optionally returns a sympy expression in :data:`X` for the exact chain
    check; ``antiderivative`` is a closed form of ``int l_1`` (quadrature is
    used otherwise).
    """

    a: Callable[[int], object]
    l: Callable[[int, np.ndarray], np.ndarray]
    dl: Callable[[int, np.ndarray], np.ndarray]
    interval: Tuple[float, float] = (-math.inf, math.inf)
    d: Callable[[int], float] = _one
    antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    l_expr: Optional[Callable[[int], object]] = None
    name: str = "custom"

    def __post_init__(self):
        if self.a(1) != 0:
            raise DomainError(f"a_1 must be 0, got {self.a(1)}")
        lo, hi = self.interval
        if not lo < hi:
            raise DomainError(f"empty interval {self.interval}")

    def q_minus(self, n, x):
        """Minus-form coefficient at level n: ``a_n + l_n^2 - l_n'``."""
        l = self.l(n, x)
        return float(self.a(n)) + l * l - self.dl(n, x)

    def q_plus(self, n, x):
        """Plus-form coefficient with ``a = a_n``, ``l = l_n``."""
        l = self.l(n, x)
        return float(self.a(n)) + l * l + self.dl(n, x)

    def check_grid(self, grid):
        g = np.asarray(grid, dtype=float)
        lo, hi = self.interval
        if g.size and (g.min() < lo or g.max() > hi):
            raise DomainError(f"grid leaves the interval {self.interval}")
        return g


# ----------------------------------------------------------------------------
# chain identity

@dataclass
class ChainReport:
    levels: List[Tuple[int, float]]
    tol: float
    exact: bool
    passed: bool

    @property
    def max_violation(self) -> float:
        return max((v for _, v in self.levels), default=0.0)


def validate_chain(spec: LadderSpec, grid=None, tol: float = 1e-12, n_max: int = 8) -> ChainReport:
    """Check the chain identity for levels ``1 .. n_max - 1``.

    With ``grid=None`` the identity is checked exactly on ``spec.l_expr``
    (sympy); a level passes only if the difference simplifies to zero.
    Otherwise the maximum pointwise violation on the grid is compared to tol.
    """
    if grid is None:
        return _validate_symbolic(spec, n_max)
    x = spec.check_grid(grid)
    levels = []
    for n in range(1, n_max):
        lhs = spec.q_plus(n + 1, x)
        rhs = spec.q_minus(n, x)
        levels.append((n, float(np.max(np.abs(lhs - rhs))) if x.size else 0.0))
    return ChainReport(levels, tol, False, all(v <= tol for _, v in levels))


X = None


def _symbol():
    global X
    if X is None:
        import sympy

        X = sympy.Symbol("x", real=True)
    return X


def _validate_symbolic(spec, n_max):
    import sympy

    if spec.l_expr is None:
        raise DomainError("exact chain check needs l_expr")
    x = _symbol()

    def side(n, sign):
        l = spec.l_expr(n)
        return sympy.sympify(spec.a(n)) + l ** 2 + sign * sympy.diff(l, x)

    levels = []
    for n in range(1, n_max):
        diff = sympy.simplify(sympy.expand(side(n + 1, 1) - side(n, -1)))
        if diff == 0:
            v = 0.0
        elif diff.is_number:
            v = abs(float(diff))
        else:
            v = math.inf
        levels.append((n, v))
    return ChainReport(levels, 0.0, True, all(v == 0 for _, v in levels))


# ----------------------------------------------------------------------------
# ladder states

@dataclass(frozen=True)
class LadderState:
    """Level ``n`` of a built ladder; calling it returns ``(v_n, v_n')``.

    Values are recomputed from ``v_1`` on each call, propagating the
    derivative through the minus form so only ``l`` and ``l'`` are evaluated.
    """

    n: int
    spec: LadderSpec
    x0: float
    orientation: int = -1
    _quad_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def ground(self, x):
        x = np.asarray(x, dtype=float)
        s = self.spec
        if s.antiderivative is not None:
            F = s.antiderivative(x) - s.antiderivative(np.float64(self.x0))
        else:
            F = np.vectorize(self._integral)(x)
        v = np.exp(self.orientation * F)
        return v, self.orientation * s.l(1, x) * v

    def _integral(self, xi):
        if xi not in self._quad_cache:
            val, _ = integrate.quad(lambda t: float(self.spec.l(1, np.float64(t))), self.x0, xi,
                                    epsabs=1e-14, epsrel=1e-13, limit=200)
            self._quad_cache[xi] = val
        return self._quad_cache[xi]

    def __call__(self, x):
        s = self.spec
        x = np.asarray(x, dtype=float)
        v, dv = self.ground(x)
        for m in range(2, self.n + 1):
            l = s.l(m, x)
            ddv = s.q_minus(m - 1, x) * v
            v, dv = l * v - dv, s.dl(m, x) * v + l * dv - ddv
        return v, dv

    def value(self, x):
        return self(x)[0]


def default_grid(spec: LadderSpec, num: int = 401):
    lo, hi = spec.interval
    lo = max(lo, -8.0)
    hi = min(hi, 8.0)
    return np.linspace(lo, hi, num)


def build_ladder(spec: LadderSpec, n_max: int, x0: float = 0.0, grid=None,
                 orientation: int = -1) -> List[LadderState]:
    """States for levels ``1 .. n_max``.

    ``orientation=-1`` gives ``v_1 = exp(-int l_1)``, the branch that solves
    the minus form with ``a_1 = 0``; ``+1`` is accepted so the other branch can be
    shown to terminate.  Raises :class:`LadderTermination` when some ``v_n``
    is trivial on the grid.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    if orientation not in (-1, 1):
        raise DomainError("orientation must be -1 or +1")
    if not spec.interval[0] <= x0 <= spec.interval[1]:
        raise DomainError(f"x0={x0} outside {spec.interval}")
    x = spec.check_grid(default_grid(spec) if grid is None else grid)
    states = []
    prev = None
    for n in range(1, n_max + 1):
        st = LadderState(n, spec, float(x0), orientation)
        peak = float(np.max(np.abs(st.value(x))))
        if prev is not None and peak < TRIVIAL_RATIO * prev:
            raise LadderTermination(n, states)
        states.append(st)
        prev = peak
    return states


# ----------------------------------------------------------------------------
# residuals

def _second_derivative(state, x, h):
    """Richardson-extrapolated central difference of the propagated ``v'``."""
    def d(hh):
        return (state(x + hh)[1] - state(x - hh)[1]) / (2 * hh)
    return (4 * d(h / 2) - d(h)) / 3


def _relative(res, scale, mask):
    if not np.any(mask):
        return 0.0
    denom = float(np.max(scale[mask]))
    if denom == 0:
        return float(np.max(np.abs(res[mask])))
    return float(np.max(np.abs(res[mask]))) / denom


def sl_residual(state: LadderState, spec: LadderSpec, which: str = "minus", grid=None,
                h: float = FD_STEP) -> float:
    """Max relative residual of the minus form at level n (``which="minus"``)
    or the plus form at level n+1 (``which="plus"``).

    Only points with ``|v| > 1e-12 max|v|`` count; the scale is the larger of
    ``max|v''|`` and ``max|q v|`` over those points.
    """
    x = spec.check_grid(default_grid(spec) if grid is None else grid)
    v = state.value(x)
    if which == "minus":
        q = spec.q_minus(state.n, x)
    elif which == "plus":
        q = spec.q_plus(state.n + 1, x)
    else:
        raise DomainError(f"unknown equation {which!r}")
    ddv = _second_derivative(state, x, h)
    mask = np.abs(v) > MASK_RATIO * np.max(np.abs(v))
    scale = np.maximum(np.abs(ddv), np.abs(q * v))
    return _relative(ddv - q * v, scale, mask)


def _fd(fun, x, h):
    def d(hh):
        return (fun(x + hh) - fun(x - hh)) / (2 * hh)
    return (4 * d(h / 2) - d(h)) / 3


def dirac_residual(lower: LadderState, upper: LadderState, spec: LadderSpec, grid=None,
                    d: Optional[float] = None, h: float = FD_STEP) -> Tuple[float, float]:
    """Relative residuals of both components of the first-order system.

    ``u = (-v_n / d_n, v_{n-1})`` with ``n = upper.n``; derivatives are taken
    by finite differences of the values, independent of the propagation.
    """
    n = upper.n
    if n < 2 or lower.n != n - 1:
        raise DomainError("need consecutive levels n-1, n with n >= 2")
    dn = spec.d(n) if d is None else d
    if dn == 0:
        raise DomainError("d_n must be nonzero")
    x = spec.check_grid(default_grid(spec) if grid is None else grid)
    u1 = -upper.value(x) / dn
    u2 = lower.value(x)
    du1 = _fd(lambda y: -upper.value(y) / dn, x, h)
    du2 = _fd(lower.value, x, h)
    l = spec.l(n, x)
    an = float(spec.a(n))
    r1 = du1 - (-l * u1 + an / dn * u2)
    r2 = du2 - (dn * u1 + l * u2)
    mask = (np.abs(u1) > MASK_RATIO * np.max(np.abs(u1))) | (np.abs(u2) > MASK_RATIO * np.max(np.abs(u2)))
    s1 = np.maximum(np.abs(du1), np.abs(l * u1) + np.abs(an / dn * u2))
    s2 = np.maximum(np.abs(du2), np.abs(dn * u1) + np.abs(l * u2))
    return _relative(r1, s1, mask), _relative(r2, s2, mask)


def derivative_convergence(state: LadderState, grid, h: float = 1e-2) -> float:
    """Error ratio ``E(h) / E(h/2)`` of plain central differences against the
    propagated derivative; close to 4 for a correct propagation."""
    x = np.asarray(grid, dtype=float)
    dv = state(x)[1]

    def err(hh):
        return float(np.max(np.abs((state.value(x + hh) - state.value(x - hh)) / (2 * hh) - dv)))
    return err(h) / err(h / 2)


def inner(first: LadderState, second: LadderState, lo: float, hi: float, nodes: int = 200) -> float:
    """Gauss-Legendre approximation of the integral of ``v_m v_n`` over [lo, hi]."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.sum(w * first.value(x) * second.value(x)))


# ----------------------------------------------------------------------------
# built-in families

def harmonic_spec() -> LadderSpec:
    def l_expr(n):
        return _symbol()

    return LadderSpec(
        a=lambda n: -2 * (n - 1),
        l=lambda n, x: np.asarray(x, dtype=float),
        dl=lambda n, x: np.ones_like(np.asarray(x, dtype=float)),
        antiderivative=lambda x: 0.5 * np.asarray(x) ** 2,
        l_expr=l_expr,
        name="harmonic",
    )


def harmonic_example(n: int):
    """``(v_n, 2n - 1)`` with ``v_n = (-d/dx + x)^{n-1} exp(-x^2/2)``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return LadderState(n, harmonic_spec(), 0.0), 2 * n - 1


def morse_a(kappa, n):
    # telescoped chain identity: a_{n+1} - a_n = -(2 kappa + 2n - 1)
    return -(n - 1) * (2 * kappa + n - 1)


def morse_spec(kappa) -> LadderSpec:
    if isinstance(kappa, str):
        kappa = Fraction(kappa)
    if kappa < 0:
        raise DomainError(f"kappa must be nonnegative, got {kappa}")
    kf = float(kappa)

    def l_expr(n):
        import sympy

        return sympy.sympify(kappa) + n - 1 - sympy.exp(-_symbol())

    return LadderSpec(
        a=lambda n: morse_a(kappa, n),
        l=lambda n, x: kf + n - 1 - np.exp(-np.asarray(x, dtype=float)),
        dl=lambda n, x: np.exp(-np.asarray(x, dtype=float)),
        antiderivative=lambda x: kf * np.asarray(x) + np.exp(-np.asarray(x)),
        l_expr=l_expr,
        name="morse",
    )


def morse_example(kappa, n: int) -> LadderState:
    """Level n of the chain ``l_n = kappa + n - 1 - exp(-x)``, normalized ``v_1(0) = 1``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return LadderState(n, morse_spec(kappa), 0.0)
