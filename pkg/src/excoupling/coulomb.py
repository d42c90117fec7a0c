"""Rescaled Coulomb model angle equation and numerical exceptional values.

In logarithmic variable ``t = log rho`` the Prufer angle obeys

    phi'(t) = c + (k - exp(-t)) sin 2 phi(t),

i.e. the Prufer equation with ``m = 0``, ``l = k - exp(-t)``, ``q = c``.
``theta0`` is the branch with limit pi at ``t -> -inf`` and ``theta_inf`` the
branch with limit ``theta_minus(c, k)`` at ``t -> +inf``.  Exceptional
couplings are the c where the two agree modulo pi.

Near ``t -> -inf`` the equation is extremely stiff (attraction rate
``2 exp(-t)``).  ``theta0`` is therefore started on its asymptotic expansion:
``w = tan(phi - pi)`` satisfies the Riccati equation

    w' = c + 2 (k - exp(-t)) w + c w^2,

whose solution decaying at ``-inf`` has the (divergent, optimally truncated)
expansion ``w = sum_n b_n x^n`` in ``x = exp(t)`` with ``b_1 = c/2`` and
``b_{n+1} = ((2k - n) b_n + c sum_{i+j=n} b_i b_j) / 2``.  Its truncation
error is of order ``exp(-2 exp(-t))``, far below rounding for
``exp(-t) >= max(12, 2k + 8)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalConsistencyError
from .integrator import IntegratorConfig
from .prufer import AngleTrajectory, DiracCoefficients, integrate_prufer

# exp(-t) at which theta0 switches from its expansion to integration
SWITCH_WEIGHT = 12.0
BOUNDARY = "boundary"


@dataclass(frozen=True)
class ModelParams:
    k: float
    c: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if not -self.k < self.c < 0:
            raise DomainError(f"c must lie in (-k, 0), got c={self.c}, k={self.k}")


@dataclass(frozen=True)
class AsymptoticAngles:
    theta_minus: float
    theta_plus: float


@dataclass(frozen=True)
class ShootingConfig:
    """Truncation, matching point and tolerances for the shooting method.

    ``t_mid=None`` places the matching point at ``-log k`` where the
    coefficient ``k - exp(-t)`` changes sign.
    """

    t_min: float = -40.0
    t_max: float = 40.0
    t_mid: Optional[float] = None
    integrator: IntegratorConfig = field(
        default_factory=lambda: IntegratorConfig(rel_tol=1e-11, abs_tol=1e-12, max_step=2.0))
    bisect_tol: float = 1e-9
    c_margin: float = 1e-4
    monotone_slack: float = 1e-8

    def __post_init__(self):
        if not self.bisect_tol > 0 or not self.c_margin > 0:
            raise ValueError("bisect_tol and c_margin must be positive")
        if self.t_mid is not None and not self.t_min < self.t_mid < self.t_max:
            raise ValueError("need t_min < t_mid < t_max")
        if not self.t_min < self.t_max:
            raise ValueError("need t_min < t_max")

    def matching_point(self, k: float) -> float:
        t_mid = -math.log(k) if self.t_mid is None else self.t_mid
        return min(max(t_mid, self.t_min + 1e-9), self.t_max - 1e-9)


@dataclass(frozen=True)
class ExceptionalValue:
    m: int
    c: float
    source: str  # "closed_form" or "numeric"
    bracket: Optional[tuple] = None
    boundary: bool = False


@dataclass
class ExceptionalValues:
    k: float
    entries: List[ExceptionalValue] = field(default_factory=list)

    @property
    def values(self) -> List[float]:
        return [e.c for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def model_coefficients(k: float, c: float, domain=(-745.0, 745.0)) -> DiracCoefficients:
    """Dirac coefficients (m, l, q) = (0, k - exp(-t), c) of the model system."""
    return DiracCoefficients(lambda t: 0.0, lambda t: k - math.exp(-t), lambda t: c, domain)


def asymptotic_angles(k: float, c: float) -> AsymptoticAngles:
    """Zeros of the limiting field at ``t -> +inf``: ``sin 2 theta = -c/k``.

    Accepts the degenerate edge ``c = -k`` where both equal pi/4.
    """
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")
    if not -k <= c < 0:
        raise DomainError(f"c must lie in [-k, 0), got c={c}, k={k}")
    ratio = min(-c / k, 1.0)
    theta_minus = 0.5 * math.asin(ratio)
    theta_plus = 0.5 * math.pi - theta_minus
    # cross-check against the tangent representation
    root = math.sqrt(max(k * k - c * c, 0.0))
    for th, sgn in ((theta_minus, -1.0), (theta_plus, 1.0)):
        expected = (k + sgn * root) / (-c)
        if abs(math.tan(th) - expected) > 1e-10 * max(1.0, abs(expected)):
            raise NumericalConsistencyError(
                f"asymptotic angle {th} inconsistent with tangent formula ({expected})")
    return AsymptoticAngles(theta_minus, theta_plus)


def riccati_series(k: float, c: float, x: float) -> tuple:
    """Optimally truncated small-x expansion of ``tan(theta0 - pi)``.

    Terms are summed until they start growing (past index ``2k + 2``) or stay
    negligible for three consecutive orders.  Returns ``(w, last_term)``;
    the second value is a heuristic truncation-error bound.
    """
    b = [0.0, 0.5 * c]
    total = b[1] * x
    power = x
    last = abs(total)
    quiet = 0
    for n in range(1, 400):
        conv = sum(b[i] * b[n - i] for i in range(1, n))
        b.append(0.5 * ((2 * k - n) * b[n] + c * conv))
        power *= x
        term = b[n + 1] * power
        if n > 2 * k + 2 and abs(term) > last > 0:
            break
        total += term
        if abs(term) <= 1e-18 * abs(total):
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
        if term:
            last = abs(term)
    return total, last


def switch_point(k: float) -> float:
    """t below which theta0 is taken from :func:`riccati_series`."""
    return -math.log(max(SWITCH_WEIGHT, 2.0 * k + 8.0))


def _theta0_start(k: float, c: float, cfg: ShootingConfig):
    """Anchor (t, offset from pi) for the forward integration of theta0."""
    t_switch = switch_point(k)
    if cfg.t_min >= t_switch:
        # too close to the turning point for the expansion; first-order start
        return cfg.t_min, 0.5 * c * math.exp(cfg.t_min)
    w, _ = riccati_series(k, c, math.exp(t_switch))
    return t_switch, math.atan(w)


def _params(p) -> ModelParams:
    return p if isinstance(p, ModelParams) else ModelParams(*p)


def _check_margin(p: ModelParams, cfg: ShootingConfig):
    if not (-p.k + cfg.c_margin <= p.c <= -cfg.c_margin):
        raise DomainError(
            f"c={p.c} within c_margin={cfg.c_margin} of the degenerate edges (-k, 0)")


def theta0_trajectory(p, cfg: ShootingConfig = ShootingConfig(), t_end: Optional[float] = None,
                      t_eval: Optional[Sequence[float]] = None) -> AngleTrajectory:
    """Forward-integrated theta0 from its asymptotic start up to ``t_end``.

    Forward integration is stable only up to the matching region when c is
    exceptional (theta0 is then unstable at +inf as well); use
    :func:`shooting_trajectory` for the matched curve on the whole line.
    """
    p = _params(p)
    _check_margin(p, cfg)
    t_end = cfg.t_max if t_end is None else t_end
    t_start, offset = _theta0_start(p.k, p.c, cfg)
    coeffs = model_coefficients(p.k, p.c)
    if t_end <= t_start:
        raise DomainError(f"t_end={t_end} lies inside the asymptotic start region")
    return integrate_prufer(coeffs, t_start, math.pi, t_end, cfg.integrator,
                            x_eval=t_eval, base=2, delta0=offset)


def theta0(p, t: float, cfg: ShootingConfig = ShootingConfig()) -> float:
    """Value at ``t`` of the branch with limit pi at ``t -> -inf``."""
    p = _params(p)
    _check_margin(p, cfg)
    if not cfg.t_min <= t <= cfg.t_max:
        raise DomainError(f"t={t} outside truncation [{cfg.t_min}, {cfg.t_max}]")
    t_start, offset = _theta0_start(p.k, p.c, cfg)
    if t <= t_start:
        w, _ = riccati_series(p.k, p.c, math.exp(t))
        return math.pi + math.atan(w)
    traj = integrate_prufer(model_coefficients(p.k, p.c), t_start, math.pi, t,
                            cfg.integrator, base=2, delta0=offset)
    return float(traj.theta[-1])


def theta0_reference(p, t: float, cfg: ShootingConfig = ShootingConfig()) -> float:
    """theta0 by the plain route: first-order start at ``t_min``, stiff solver.

    Slow (implicit Radau over the whole stiff range); kept as an independent
    check of the expansion-based start.
    """
    p = _params(p)
    _check_margin(p, cfg)
    coeffs = model_coefficients(p.k, p.c)
    icfg = replace(cfg.integrator, method="radau", abs_tol=1e-15, rel_tol=1e-12)
    traj = integrate_prufer(coeffs, cfg.t_min, math.pi, t, icfg,
                            base=2, delta0=0.5 * p.c * math.exp(cfg.t_min))
    return float(traj.theta[-1])


def _warn_conditioning(p: ModelParams, cfg: ShootingConfig):
    if math.sqrt(p.k * p.k - p.c * p.c) < 10 * cfg.c_margin:
        warnings.warn(
            f"slow attraction near c=-k (sqrt(k^2-c^2)={math.sqrt(p.k**2 - p.c**2):.3g}); "
            "theta_inf truncation error may dominate", RuntimeWarning, stacklevel=3)


def theta_inf_trajectory(p, cfg: ShootingConfig = ShootingConfig(), t_end: Optional[float] = None,
                         t_eval: Optional[Sequence[float]] = None) -> AngleTrajectory:
    """Backward-integrated theta_inf from ``theta_minus`` at ``t_max`` down to ``t_end``.

    Left of :func:`switch_point` the continuation uses the
    implicit solver.
    """
    p = _params(p)
    _check_margin(p, cfg)
    _warn_conditioning(p, cfg)
    t_end = cfg.t_min if t_end is None else t_end
    coeffs = model_coefficients(p.k, p.c)
    start = asymptotic_angles(p.k, p.c).theta_minus
    t_stiff = switch_point(p.k)
    upper = integrate_prufer(coeffs, cfg.t_max, start, max(t_end, t_stiff), cfg.integrator,
                             x_eval=t_eval)
    if t_end >= t_stiff:
        return upper
    icfg = replace(cfg.integrator, method="radau", abs_tol=1e-14)
    lower = integrate_prufer(coeffs, t_stiff, float(upper.theta[-1]), t_end, icfg, x_eval=t_eval)
    return _concat(upper, lower)


def _concat(first: AngleTrajectory, second: AngleTrajectory) -> AngleTrajectory:
    theta = np.concatenate([first.theta, second.theta[1:]])
    x = np.concatenate([first.x, second.x[1:]])
    lo, hi = min(first.x[-1], first.x[0]), max(first.x[-1], first.x[0])

    def dense(xq):
        xq_arr = np.atleast_1d(np.asarray(xq, dtype=float))
        inside = (xq_arr >= lo) & (xq_arr <= hi)
        out = np.empty(xq_arr.shape)
        if inside.any():
            out[inside] = first.at(xq_arr[inside])
        if (~inside).any():
            out[~inside] = second.at(xq_arr[~inside])
        return out[:, None] if np.ndim(xq) else out[:1]

    return AngleTrajectory(x, theta, 0.0, first.direction, first.tolerance_used,
                           first.branch_anchor, dense, first.coeffs)


def theta_inf(p, t: float, cfg: ShootingConfig = ShootingConfig()) -> float:
    """Value at ``t`` of the branch with limit ``theta_minus(c, k)`` at ``+inf``."""
    p = _params(p)
    if not cfg.t_min <= t <= cfg.t_max:
        raise DomainError(f"t={t} outside truncation [{cfg.t_min}, {cfg.t_max}]")
    return float(theta_inf_trajectory(p, cfg, t_end=t).theta[-1])


def mismatch(p, cfg: ShootingConfig = ShootingConfig()) -> float:
    """theta0 - theta_inf at the matching point; nondecreasing in c.

    Exceptional couplings are exactly the roots of ``mismatch + m pi``.
    """
    p = _params(p)
    t_mid = cfg.matching_point(p.k)
    return theta0(p, t_mid, cfg) - theta_inf(p, t_mid, cfg)


def _scan_grid(k: float, cfg: ShootingConfig) -> np.ndarray:
    n = max(50, 20 * math.ceil(k))
    return np.linspace(-k + cfg.c_margin, -cfg.c_margin, n)


def find_exceptional_numeric(k: float, cfg: ShootingConfig = ShootingConfig(),
                             grid: Optional[Sequence[float]] = None) -> ExceptionalValues:
    """Shooting + bisection for all exceptional couplings in the scanned range.

    The mismatch is sampled on a grid in c (monotonicity checked), every
    multiple of -pi it passes through is bracketed and bisected to
    ``bisect_tol``.  A root between ``-k`` and the margin is reported as a
    boundary entry when the mismatch at ``-k + c_margin/1000`` reveals it.
    """
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")
    cs = _scan_grid(k, cfg) if grid is None else np.asarray(sorted(grid), dtype=float)
    deltas = np.array([mismatch(ModelParams(k, c), cfg) for c in cs])
    drops = np.diff(deltas)
    if np.any(drops < -cfg.monotone_slack):
        i = int(np.argmin(drops))
        raise NumericalConsistencyError(
            f"mismatch not monotone in c near c={cs[i]:.6g} (drop {drops[i]:.3g})")

    result = ExceptionalValues(k)
    # Delta increases with c: the m-th root is where Delta crosses -m*pi
    m_lo = math.ceil(-deltas[-1] / math.pi)
    m_hi = math.floor(-deltas[0] / math.pi)
    if m_lo < 0:
        raise NumericalConsistencyError(
            f"mismatch {deltas[-1]:.6g} above 0 near c=0; no valid matching index")
    for m in range(m_lo, m_hi + 1):
        target = -m * math.pi
        i = int(np.searchsorted(deltas, target))  # deltas[i-1] < target <= deltas[i]
        i = min(max(i, 1), len(cs) - 1)
        lo, hi = cs[i - 1], cs[i]
        f_lo, f_hi = deltas[i - 1] - target, deltas[i] - target
        root, bracket = _bisect(lambda c: mismatch(ModelParams(k, c), cfg) - target,
                                lo, hi, f_lo, f_hi, cfg.bisect_tol)
        result.entries.append(ExceptionalValue(m, float(root), "numeric", tuple(map(float, bracket))))

    # roots hiding between -k and the scan margin
    edge = -k + 1e-3 * cfg.c_margin
    if edge < cs[0]:
        next_m = m_hi + 1
        edge_cfg = replace(cfg, c_margin=1e-3 * cfg.c_margin)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            d_edge = mismatch(ModelParams(k, edge), edge_cfg)
        if d_edge <= -next_m * math.pi:
            result.entries.append(ExceptionalValue(
                next_m, float(0.5 * (edge + cs[0])), "numeric", (-k, float(cs[0])), boundary=True))
    return result


def _bisect(f, lo, hi, f_lo, f_hi, tol):
    if f_lo == 0:
        return lo, (lo, lo)
    if f_hi == 0:
        return hi, (hi, hi)
    if f_lo * f_hi > 0:
        raise NumericalConsistencyError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid, (mid, mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if f_lo * f_hi > 0:
        raise NumericalConsistencyError("lost sign change during bisection")
    return 0.5 * (lo + hi), (lo, hi)


def shooting_trajectory(p, cfg: ShootingConfig = ShootingConfig(),
                        t_eval: Optional[Sequence[float]] = None):
    """Matched angle curve: theta0 left of ``t_mid``, shifted theta_inf right of it.

    Returns ``(t, theta, shift)`` where ``shift`` is the multiple of pi added
    to theta_inf and ``theta`` is evaluated at ``t_eval`` (or a default grid).
    Each half is computed in its stable direction, so at an exceptional c the
    curve follows the doubly unstable solution over the whole range.
    """
    p = _params(p)
    t_mid = cfg.matching_point(p.k)
    if t_eval is None:
        t_eval = np.linspace(cfg.t_min, cfg.t_max, 801)
    t_eval = np.asarray(t_eval, dtype=float)
    left = t_eval[t_eval <= t_mid]
    right = t_eval[t_eval > t_mid]
    tr0 = theta0_trajectory(p, cfg, t_end=t_mid, t_eval=left)
    trinf = theta_inf_trajectory(p, cfg, t_end=t_mid, t_eval=right)
    shift = math.pi * round((float(tr0.theta[-1]) - float(trinf.theta[-1])) / math.pi)
    theta = np.empty_like(t_eval)
    t_start = tr0.x[0]
    for i, t in enumerate(t_eval):
        if t > t_mid:
            theta[i] = trinf.at(t) + shift
        elif t <= t_start:
            w, _ = riccati_series(p.k, p.c, math.exp(t))
            theta[i] = math.pi + math.atan(w)
        else:
            theta[i] = tr0.at(t)
    return t_eval, theta, shift


def angle_curves(p, cfg: ShootingConfig = ShootingConfig(), t_eval: Optional[Sequence[float]] = None):
    """theta0 integrated forward and theta_inf backward over the whole truncation.

    Returns ``(t, theta0, theta_inf)``.  Unlike :func:`shooting_trajectory`
    nothing is matched, so each curve shows its own fate at the far end.
    """
    p = _params(p)
    if t_eval is None:
        t_eval = np.linspace(cfg.t_min, cfg.t_max, 801)
    t = np.asarray(t_eval, dtype=float)
    if t.size == 0:
        raise DomainError("no sample points")
    if t.min() < cfg.t_min or t.max() > cfg.t_max:
        raise DomainError(f"samples outside truncation [{cfg.t_min}, {cfg.t_max}]")
    t_start, _ = _theta0_start(p.k, p.c, cfg)
    th0 = np.empty_like(t)
    early = t <= t_start
    for i in np.flatnonzero(early):
        w, _ = riccati_series(p.k, p.c, math.exp(t[i]))
        th0[i] = math.pi + math.atan(w)
    if (~early).any():
        th0[~early] = theta0_trajectory(p, cfg, t_end=cfg.t_max, t_eval=t[~early]).at(t[~early])
    thinf = theta_inf_trajectory(p, cfg, t_end=cfg.t_min, t_eval=t[::-1]).at(t)
    return t, th0, np.asarray(thinf, dtype=float)


def interval_index(k: float, c: float, tol: float = 1e-9):
    """Index n with c in (c_n, c_{n-1}) (c_{-1} = 0), or ``BOUNDARY``.

    Uses the closed-form couplings; returns ``BOUNDARY`` when c is within
    ``tol`` of one of them.
    """
    from .closed_form import exceptional_values

    if not k > 0 or not -k < c < 0:
        raise DomainError(f"need k > 0 and c in (-k, 0); got k={k}, c={c}")
    values = exceptional_values(k).values
    for cj in values:
        if abs(c - cj) <= tol:
            return BOUNDARY
    return sum(1 for cj in values if c < cj)
