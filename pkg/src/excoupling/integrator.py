"""Adaptive Dormand-Prince 5(4) integrator with dense output.

Small, dependency-light explicit solver used for the Prufer angle and the
two-component Dirac systems.  Steps are controlled against a mixed
relative/absolute tolerance; an optional ``step_guard`` lets callers reject
steps that violate a problem-specific constraint (the angle solvers use it to
cap the per-step rotation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import IntegrationError

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_E = np.array([
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
])
# continuous extension (Shampine), y(x0 + s h) = y0 + h * K^T P [s, s^2, s^3, s^4]
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and work limits for one integration.

    ``method`` selects the explicit Dormand-Prince pair (``"dopri5"``) or the
    implicit Radau IIA solver from scipy (``"radau"``) for stiff stretches.
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-12
    max_step: float = 0.5
    max_steps: int = 200_000
    method: str = "dopri5"

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValueError("integrator tolerances and max_step must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.method not in ("dopri5", "radau"):
            raise ValueError(f"unknown integration method {self.method!r}")


@dataclass
class Solution:
    """Accepted step points plus the stage data needed for dense output."""

    x: np.ndarray
    y: np.ndarray  # shape (n_points, dim)
    stages: list = field(default_factory=list)  # per step: (x0, h, y0, K)
    n_rejected: int = 0

    def __call__(self, xq):
        """Dense evaluation at ``xq`` (scalar or array) inside the covered range."""
        scalar = np.ndim(xq) == 0
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        out = np.empty((xq.size, self.y.shape[1]))
        forward = self.x[-1] >= self.x[0]
        key = self.x if forward else -self.x
        qk = xq if forward else -xq
        idx = np.clip(np.searchsorted(key, qk, side="right") - 1, 0, len(self.stages) - 1)
        for i, (xi, step) in enumerate(zip(xq, idx)):
            x0, h, y0, K = self.stages[step]
            s = (xi - x0) / h
            out[i] = y0 + h * (K.T @ (_P @ np.array([s, s * s, s ** 3, s ** 4])))
        return out[0] if scalar else out


def _initial_step(f, x0, y0, f0, direction, rtol, atol, max_step):
    scale = atol + np.abs(y0) * rtol
    d0 = np.linalg.norm(y0 / scale) / math.sqrt(y0.size)
    d1 = np.linalg.norm(f0 / scale) / math.sqrt(y0.size)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + direction * h0 * f0
    f1 = f(x0 + direction * h0, y1)
    d2 = np.linalg.norm((f1 - f0) / scale) / math.sqrt(y0.size) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def _targets(x, x1, direction, x_eval):
    targets = [] if x_eval is None else sorted(
        {float(v) for v in x_eval if direction * (v - x) > 0 and direction * (x1 - v) >= 0},
        key=lambda v: direction * v,
    )
    targets.append(x1)
    return targets


def solve(
    f: Callable[[float, np.ndarray], np.ndarray],
    x0: float,
    y0: Sequence[float],
    x1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    x_eval: Optional[Sequence[float]] = None,
    step_guard: Optional[Callable[[np.ndarray, np.ndarray], bool]] = None,
    scalar_rhs: bool = False,
) -> Solution:
    """Integrate ``y' = f(x, y)`` from ``x0`` to ``x1`` (either direction).

    Every point of ``x_eval`` is hit exactly by a step boundary.  A step is
    rejected and retried with half the size when ``step_guard(y_old, y_new)``
    returns False.  With ``scalar_rhs=True`` (one-dimensional problems only)
    ``f`` receives a 1-tuple and returns a float, which skips numpy overhead.
    """
    y = np.array(y0, dtype=float).reshape(-1)
    x = float(x0)
    x1 = float(x1)
    direction = 1.0 if x1 >= x else -1.0
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    targets = _targets(x, x1, direction, x_eval)
    if scalar_rhs:
        if y.size != 1:
            raise ValueError("scalar_rhs needs a one-dimensional problem")
        return _solve_scalar(f, x, float(y[0]), targets, direction, cfg, step_guard)
    ti = 0

    xs = [x]
    ys = [y.copy()]
    stages = []
    if x == x1:
        return Solution(np.array(xs), np.array(ys), stages)

    fy = np.asarray(f(x, y), dtype=float).reshape(-1)
    if not np.all(np.isfinite(fy)):
        raise IntegrationError(f"non-finite right-hand side at x={x}")
    h = _initial_step(f, x, y, fy, direction, rtol, atol, cfg.max_step)
    K = np.empty((7, y.size))
    n_steps = 0
    n_rej = 0
    while True:
        target = targets[ti]
        remaining = direction * (target - x)
        if remaining <= 0:
            ti += 1
            if ti == len(targets):
                break
            continue
        h = min(h, cfg.max_step)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(x)):
            raise IntegrationError(f"step size underflow at x={x}")
        hit = h >= remaining
        hs = remaining if hit else h
        hd = direction * hs

        K[0] = fy
        for i in range(1, 7):
            K[i] = f(x + _C[i] * hd, y + hd * (_A[i, :i] @ K[:i]))
        y_new = y + hd * (_A[6] @ K[:6])
        if not (np.isfinite(y_new).all() and np.isfinite(K).all()):
            h = 0.25 * hs
            n_rej += 1
            continue
        err_vec = hd * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        n_steps += 1
        if n_steps > cfg.max_steps:
            raise IntegrationError(f"step budget of {cfg.max_steps} exhausted at x={x}")

        if err > 1.0 or (step_guard is not None and not step_guard(y, y_new)):
            n_rej += 1
            if err > 1.0:
                h = hs * max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            else:
                h = 0.5 * hs
            continue

        stages.append((x, hd, y.copy(), K.copy()))
        x = target if hit else x + hd
        fy = K[6].copy()
        y = y_new
        xs.append(x)
        ys.append(y.copy())
        factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
        proposal = hs * factor
        h = max(h, proposal) if hit else proposal

    return Solution(np.array(xs), np.array(ys), stages, n_rej)


_AL = [list(row[:i]) for i, row in enumerate(_A)]
_EL = list(_E)
_CL = list(_C)


def _solve_scalar(f, x, y, targets, direction, cfg, step_guard):
    """Plain-float version of the stepping loop in :func:`solve` for dim 1."""
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    xs, ys, stages = [x], [y], []
    if x == targets[-1]:
        return Solution(np.array(xs), np.array(ys)[:, None], stages)
    fy = float(f(x, (y,)))
    if not math.isfinite(fy):
        raise IntegrationError(f"non-finite right-hand side at x={x}")
    h = _initial_step(f, x, np.array([y]), np.array([fy]), direction, rtol, atol, cfg.max_step)
    ti = 0
    n_steps = n_rej = 0
    eps16 = 16 * np.finfo(float).eps
    K = [0.0] * 7
    while True:
        remaining = direction * (targets[ti] - x)
        if remaining <= 0:
            ti += 1
            if ti == len(targets):
                break
            continue
        h = min(h, cfg.max_step)
        if h < eps16 * max(1.0, abs(x)):
            raise IntegrationError(f"step size underflow at x={x}")
        hit = h >= remaining
        hs = remaining if hit else h
        hd = direction * hs
        K[0] = fy
        for i in range(1, 7):
            acc = 0.0
            for a, kj in zip(_AL[i], K):
                acc += a * kj
            K[i] = float(f(x + _CL[i] * hd, (y + hd * acc,)))
        acc = 0.0
        for a, kj in zip(_AL[6], K):
            acc += a * kj
        y_new = y + hd * acc
        if not (math.isfinite(y_new) and all(map(math.isfinite, K))):
            h = 0.25 * hs
            n_rej += 1
            continue
        e = 0.0
        for a, kj in zip(_EL, K):
            e += a * kj
        err = abs(hd * e) / (atol + rtol * max(abs(y), abs(y_new)))
        n_steps += 1
        if n_steps > cfg.max_steps:
            raise IntegrationError(f"step budget of {cfg.max_steps} exhausted at x={x}")
        if err > 1.0 or (step_guard is not None and not step_guard((y,), (y_new,))):
            n_rej += 1
            h = hs * max(_MIN_FACTOR, _SAFETY * err ** -0.2) if err > 1.0 else 0.5 * hs
            continue
        stages.append((x, hd, np.array([y]), np.array(K)[:, None]))
        x = targets[ti] if hit else x + hd
        fy = K[6]
        y = y_new
        xs.append(x)
        ys.append(y)
        factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
        proposal = hs * factor
        h = max(h, proposal) if hit else proposal
    return Solution(np.array(xs), np.array(ys)[:, None], stages, n_rej)
