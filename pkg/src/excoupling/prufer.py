"""Prufer transformation for one-dimensional Dirac systems.

A real solution ``u = (u1, u2)`` of

    u1' = -l u1 + (m - q) u2
    u2' = (m + q) u1 + l u2

is written as ``u = |u| (cos theta, sin theta)``.  The angle obeys the scalar
equation ``theta' = m cos 2theta + l sin 2theta + q`` and the amplitude is
recovered from ``d log|u| / dx = m sin 2theta - l cos 2theta``.

Angles are integrated as an offset ``delta`` from a fixed multiple of pi/2
(the anchor's nearest one).  The right-hand side is pi-periodic and changes
sign under a pi/2 shift, so this is exact, and it keeps offsets far below the
resolution of ``theta`` itself (e.g. ``pi + 1e-18``) representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, IntegrationError, RefinementError
from .integrator import IntegratorConfig, solve

HALF_PI = 0.5 * math.pi
# per-step rotation cap; keeps consecutive samples well inside one branch
MAX_ANGLE_STEP = 0.25 * math.pi

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class DiracCoefficients:
    """Coefficient functions (m, l, q) of a real 2x2 Dirac system.

    ``m`` multiplies sigma_3, ``l`` multiplies sigma_1 and ``q`` is the scalar
    (potential plus spectral parameter).  ``domain`` is the truncated interval
    on which the functions may be queried.
    """

    m: Callable[[float], float]
    l: Callable[[float], float]
    q: Callable[[float], float]
    domain: tuple = (-math.inf, math.inf)

    def check(self, x: float) -> None:
        lo, hi = self.domain
        if not lo <= x <= hi:
            raise DomainError(f"x={x} outside coefficient domain {self.domain}")

    def values(self, x: float) -> tuple:
        try:
            vals = (float(self.m(x)), float(self.l(x)), float(self.q(x)))
        except (ArithmeticError, ValueError) as exc:
            raise DomainError(f"coefficient evaluation failed at x={x}") from exc
        if not all(map(math.isfinite, vals)):
            raise DomainError(f"non-finite coefficient at x={x}")
        return vals

    @classmethod
    def constant(cls, m=0.0, l=0.0, q=0.0, domain=(-math.inf, math.inf)):
        return cls(lambda x: m, lambda x: l, lambda x: q, domain)


@dataclass
class AngleTrajectory:
    """Continuous branch of a Prufer angle sampled at the integrator's steps.

    ``theta = base + delta``; ``base`` is a multiple of pi/2 fixed by the
    anchor.  Consecutive samples differ by less than pi.
    """

    x: np.ndarray
    delta: np.ndarray
    base: float
    direction: str
    tolerance_used: float
    branch_anchor: tuple
    dense: Optional[Callable] = None
    coeffs: Optional[DiracCoefficients] = None

    @property
    def theta(self) -> np.ndarray:
        return self.base + self.delta

    def at(self, xq):
        """Angle at arbitrary points inside the covered interval."""
        if self.dense is None:
            return self.base + np.interp(xq, *_ascending(self.x, self.delta))
        val = self.dense(xq)
        return self.base + (val[..., 0] if np.ndim(xq) else float(val[0]))

    def shifted(self, offset: float) -> "AngleTrajectory":
        return AngleTrajectory(
            self.x, self.delta, self.base + offset, self.direction,
            self.tolerance_used,
            (self.branch_anchor[0], self.branch_anchor[1] + offset),
            self.dense, self.coeffs,
        )


@dataclass
class VectorTrajectory:
    """Samples (x, u1, u2) of a solution of the Dirac system."""

    x: np.ndarray
    u: np.ndarray  # shape (n, 2)
    dense: Optional[Callable] = None

    @property
    def norm(self) -> np.ndarray:
        return np.hypot(self.u[:, 0], self.u[:, 1])

    def angle(self, anchor: float) -> np.ndarray:
        """Prufer angle of the samples, unwound from the branch nearest ``anchor``."""
        raw = np.arctan2(self.u[:, 1], self.u[:, 0])
        return unwind(raw, anchor)


def unwind(raw: np.ndarray, anchor: float, period: float = 2 * math.pi) -> np.ndarray:
    """Pick for every raw angle the branch nearest the previous sample."""
    out = np.empty_like(raw, dtype=float)
    prev = anchor
    for i, a in enumerate(raw):
        prev = a + period * round((prev - a) / period)
        out[i] = prev
    return out


def _ascending(x, y):
    if len(x) > 1 and x[-1] < x[0]:
        return x[::-1], y[::-1]
    return x, y


def prufer_rhs(coeffs: DiracCoefficients, x: float, theta: float) -> float:
    """Right-hand side of the Prufer equation at (x, theta)."""
    coeffs.check(x)
    m, l, q = coeffs.values(x)
    return m * math.cos(2 * theta) + l * math.sin(2 * theta) + q


def _reduced_rhs(coeffs: DiracCoefficients, sign: float):
    def f(x, y):
        m, l, q = coeffs.values(x)
        d2 = 2.0 * y[0]
        return sign * (m * math.cos(d2) + l * math.sin(d2)) + q
    return f


def _reduced_jac(coeffs: DiracCoefficients, sign: float):
    def jac(x, y):
        m, l, _ = coeffs.values(x)
        d2 = 2.0 * y[0]
        return [[sign * 2.0 * (l * math.cos(d2) - m * math.sin(d2))]]
    return jac


def _angle_guard(y_old, y_new):
    return abs(y_new[0] - y_old[0]) < MAX_ANGLE_STEP


def split_angle(theta0: float) -> tuple:
    """Split an angle into (multiple of pi/2, offset) with |offset| <= pi/4."""
    n = round(theta0 / HALF_PI)
    return n, theta0 - n * HALF_PI


def integrate_prufer(
    coeffs: DiracCoefficients,
    x0: float,
    theta0: float,
    x1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    x_eval: Optional[Sequence[float]] = None,
    base: Optional[int] = None,
    delta0: Optional[float] = None,
) -> AngleTrajectory:
    """Integrate the Prufer equation from ``(x0, theta0)`` to ``x1``.

    ``x1 < x0`` integrates backwards.  ``base``/``delta0`` give the anchor as
    ``base * pi/2 + delta0`` directly, for offsets too small to survive being
    added to ``theta0``.
    """
    coeffs.check(x0)
    coeffs.check(x1)
    if base is None:
        base, delta0 = split_angle(theta0)
    elif delta0 is None:
        delta0 = theta0 - base * HALF_PI
    sign = -1.0 if base % 2 else 1.0
    f = _reduced_rhs(coeffs, sign)

    if cfg.method == "radau":
        sol = _solve_radau(f, _reduced_jac(coeffs, sign), x0, delta0, x1, cfg, x_eval)
    else:
        sol = solve(f, x0, [delta0], x1, cfg, x_eval=x_eval, step_guard=_angle_guard, scalar_rhs=True)
    delta = sol.y[:, 0]
    if len(delta) > 1 and np.max(np.abs(np.diff(delta))) >= math.pi:
        raise IntegrationError("branch continuity lost (|d theta| >= pi between samples)")
    return AngleTrajectory(
        x=sol.x,
        delta=delta,
        base=base * HALF_PI,
        direction="forward" if x1 >= x0 else "backward",
        tolerance_used=cfg.rel_tol,
        branch_anchor=(x0, base * HALF_PI + delta0),
        dense=sol,
        coeffs=coeffs,
    )


def _solve_radau(f, jac, x0, y0, x1, cfg, x_eval):
    from scipy.integrate import solve_ivp

    res = solve_ivp(
        lambda x, y: [f(x, y)], (x0, x1), [y0], method="Radau", jac=jac,
        rtol=max(cfg.rel_tol, 1e-13), atol=cfg.abs_tol,
        max_step=min(cfg.max_step, 0.25 * math.pi), dense_output=True,
    )
    if res.status != 0:
        raise IntegrationError(f"Radau integration failed: {res.message}")
    xs = res.t
    ys = res.y.T
    if x_eval is not None:
        extra = np.asarray([v for v in x_eval if min(x0, x1) <= v <= max(x0, x1)], dtype=float)
        xs = np.concatenate([xs, extra])
        order = np.argsort(xs if x1 >= x0 else -xs, kind="stable")
        xs = xs[order]
        xs = xs[np.concatenate([[True], np.diff(xs) != 0])]
        ys = res.sol(xs).T
    if len(xs) > cfg.max_steps:
        raise IntegrationError(f"step budget of {cfg.max_steps} exhausted")

    def dense(xq):
        val = res.sol(np.atleast_1d(xq)).T
        return val[0] if np.ndim(xq) == 0 else val

    return _RadauSolution(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), dense)


class _RadauSolution:
    """Same read interface as :class:`Solution` for the scipy-backed path."""

    def __init__(self, x, y, dense):
        self.x, self.y, self._dense = x, y, dense

    def __call__(self, xq):
        return self._dense(xq)


def integrate_dirac(
    coeffs: DiracCoefficients,
    x0: float,
    u0: Sequence[float],
    x1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    x_eval: Optional[Sequence[float]] = None,
) -> VectorTrajectory:
    """Integrate the component form of the Dirac system from ``u(x0) = u0``."""
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (2,) or not np.any(u0):
        raise DomainError("initial vector must be a nonzero pair")
    coeffs.check(x0)
    coeffs.check(x1)

    def f(x, u):
        m, l, q = coeffs.values(x)
        return np.array([-l * u[0] + (m - q) * u[1], (m + q) * u[0] + l * u[1]])

    sol = solve(f, x0, u0, x1, cfg, x_eval=x_eval)
    return VectorTrajectory(sol.x, sol.y, sol)


def recover_amplitude(traj: AngleTrajectory, coeffs: DiracCoefficients, amp0: float,
                      x_query: Optional[Sequence[float]] = None):
    """|u| along ``traj`` from the amplitude integral, starting at ``amp0``.

    The integral ``int (m sin 2theta - l cos 2theta)`` is evaluated with 8-point
    Gauss-Legendre on every step using the trajectory's dense output.  Returns
    ``(x, |u|)`` at the trajectory samples, or at ``x_query`` if given.
    """
    if not amp0 > 0:
        raise DomainError("initial amplitude must be positive (nontrivial solution)")
    x = traj.x
    log_amp = np.zeros(len(x))
    for i in range(1, len(x)):
        log_amp[i] = log_amp[i - 1] + _amp_integral(traj, coeffs, x[i - 1], x[i])
    amp = amp0 * np.exp(log_amp)
    if x_query is None:
        return x, amp
    xq = np.asarray(x_query, dtype=float)
    xa, la = _ascending(x, log_amp)
    out = np.empty_like(xq)
    for i, xi in enumerate(xq):
        j = int(np.clip(np.searchsorted(xa, xi), 1, len(xa) - 1))
        left = xa[j - 1]
        out[i] = la[j - 1] + _amp_integral(traj, coeffs, left, xi)
    return xq, amp0 * np.exp(out)


def _amp_integral(traj, coeffs, a, b):
    if a == b:
        return 0.0
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid + half * _GL_NODES
    th = traj.at(nodes)
    vals = np.empty_like(nodes)
    for i, (xn, tn) in enumerate(zip(nodes, th)):
        m, l, _ = coeffs.values(xn)
        vals[i] = m * math.sin(2 * tn) - l * math.cos(2 * tn)
    return half * float(_GL_WEIGHTS @ vals)


def count_crossings(traj: AngleTrajectory, offset: float = 0.0) -> int:
    """Number of times ``theta - offset`` passes an integer multiple of pi.

    The starting sample is excluded and a hit exactly on a later sample is
    counted once.  Assumes theta is monotone between consecutive samples,
    which the step cap makes safe for the Prufer flows used here.
    """
    y = (traj.base - offset + traj.delta) / math.pi
    if len(y) > 1 and np.max(np.abs(np.diff(y))) >= 1.0:
        raise RefinementError("consecutive samples differ by pi or more; refine the trajectory")
    total = 0
    for a, b in zip(y[:-1], y[1:]):
        if b > a:
            total += math.floor(b) - math.floor(a)
        elif b < a:
            total += math.ceil(a) - math.ceil(b)
    return total
