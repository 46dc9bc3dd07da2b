"""Replica-method predictions for PhaseMax in the large-n limit.

Everything here is a closed-form map of the oversampling ratio ``alpha`` and
the anchor cosine ``rho``.  The reduced saddle-point system is the scalar
fixed point ``q = h(q)`` with

    c      = tan(pi / alpha) / 2
    theta  = sqrt(q - c^2 (1 - q)^2)
    w      = 1 - (2 alpha / pi) * arctan(c |1 - q| / (1 + theta))
    h(q)   = 1 + pi / (2 alpha c) * [w^2 - (theta - w)^2 / rho^2 - 1]

and the asymptotic NMSE is ``q* - 2 |theta*| + 1``.  ``q = 1`` is always a
fixed point; it loses stability when rho^2 < 1 - (pi/alpha) / tan(pi/alpha).

Only alpha > 2 is supported: c changes sign at alpha = 2.
"""
import enum
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import bisect

from ._validation import check_alpha, check_rho, _as_float
from .exceptions import DomainError, MultipleFixedPoints, NoFixedPoint, Unstable

GRID_POINTS = 2000
GRID_MARGIN = 1e-9
BISECT_XTOL = 1e-12
STABILITY_STEP = 1e-6
ALPHA_XTOL = 1e-10


class Regime(str, enum.Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"


@dataclass(frozen=True)
class ReplicaPrediction:
    alpha: float
    rho: float
    q_star: float
    theta_star: float
    nmse: float
    regime: Regime
    rho_critical: float

    def to_dict(self):
        d = asdict(self)
        d["regime"] = self.regime.value
        return d


def c_const(alpha):
    """tan(pi / alpha) / 2."""
    alpha = check_alpha(alpha)
    return math.tan(math.pi / alpha) / 2.0


def q_min(alpha):
    """Smallest q >= 0 with q = c^2 (1 - q)^2, the lower edge of theta's domain."""
    c2 = c_const(alpha) ** 2
    # smaller root of c^2 q^2 - (2c^2 + 1) q + c^2; the roots multiply to 1
    return 2.0 * c2 / ((2.0 * c2 + 1.0) + math.sqrt(4.0 * c2 + 1.0))


def _parts(q, alpha):
    """Return (e, theta - 1, w - 1) with e = 1 - q, avoiding cancellation near q = 1."""
    c = c_const(alpha)
    q = float(q)
    e = 1.0 - q
    radicand = q - c * c * e * e
    if not radicand >= 0.0:
        qm = q_min(alpha)
        raise DomainError(
            f"q={q!r} outside the domain of theta(q) for alpha={alpha!r}; need q >= {qm!r}",
            boundary=qm,
        )
    theta = math.sqrt(radicand)
    d_theta = -(e + c * c * e * e) / (theta + 1.0)
    d_w = -(2.0 * alpha / math.pi) * math.atan(c * abs(e) / (1.0 + theta))
    return e, d_theta, d_w


def theta_of_q(q, alpha):
    """Nonnegative root sqrt(q - c^2 (1 - q)^2)."""
    alpha = check_alpha(alpha)
    _, d_theta, _ = _parts(q, alpha)
    return 1.0 + d_theta


def w_of_q(q, alpha):
    alpha = check_alpha(alpha)
    _, _, d_w = _parts(q, alpha)
    return 1.0 + d_w


def _h_minus_one(q, alpha, rho):
    _, d_theta, d_w = _parts(q, alpha)
    k = math.pi / (2.0 * alpha * c_const(alpha))
    diff = d_theta - d_w
    return k * (d_w * (2.0 + d_w) - diff * diff / (rho * rho))


def h_of_q(q, alpha, rho):
    """The fixed-point map h(q)."""
    alpha = check_alpha(alpha)
    rho = check_rho(rho)
    return 1.0 + _h_minus_one(q, alpha, rho)


def fixed_point_gap(q, alpha, rho):
    """h(q) - q, computed from 1 - q so it stays accurate as q -> 1."""
    alpha = check_alpha(alpha)
    rho = check_rho(rho)
    return (1.0 - float(q)) + _h_minus_one(q, alpha, rho)


def h_second_derivative_at_1(alpha, rho):
    """Closed-form curvature term of h at q = 1.

    Equals alpha c / (2 pi) - (pi/2 - alpha c)^2 / (2 pi alpha c rho^2) - 1/4,
    which is half of the left second derivative h''(1-).  Positive above the
    transition, zero exactly at ``rho_critical(alpha)``, negative below.
    """
    alpha = check_alpha(alpha)
    rho = check_rho(rho)
    ac = alpha * c_const(alpha)
    return ac / (2 * math.pi) - (math.pi / 2 - ac) ** 2 / (2 * math.pi * ac * rho * rho) - 0.25


def _boundary_ratio(alpha):
    x = math.pi / alpha
    return x / math.tan(x)


def rho_critical(alpha):
    """sqrt(1 - (pi/alpha) / tan(pi/alpha)), clamped to [0, 1]."""
    alpha = check_alpha(alpha)
    return math.sqrt(min(1.0, max(0.0, 1.0 - _boundary_ratio(alpha))))


def alpha_critical(rho):
    """Oversampling ratio at which ``rho`` sits exactly on the phase boundary.

    Returns 2 for rho = 1 and ``inf`` for rho = 0.
    """
    rho = _as_float(rho, "rho")
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1] (got {rho!r})")
    if rho == 0.0:
        return math.inf
    if rho == 1.0:
        return 2.0
    level = 1.0 - rho * rho

    def f(a):
        return _boundary_ratio(a) - level

    lo = 2.0 + 1e-12
    hi = 4.0
    while f(hi) <= 0.0:
        lo, hi = hi, 2.0 * hi
        if not math.isfinite(hi):
            return math.inf
    return bisect(f, lo, hi, xtol=ALPHA_XTOL, maxiter=500)


def sufficient_alpha(rho):
    """Oversampling ratio 2 pi / (pi - 2 arccos(rho)) from the earlier sufficient condition."""
    rho = check_rho(rho)
    return 2.0 * math.pi / (math.pi - 2.0 * math.acos(rho))


def is_success(alpha, rho):
    """True when (pi/alpha) / tan(pi/alpha) > 1 - rho^2."""
    alpha = check_alpha(alpha)
    rho = check_rho(rho)
    return _boundary_ratio(alpha) > 1.0 - rho * rho


def scan_grid(alpha):
    """Uniform grid on [q_min + 1e-9, 1 - 1e-9] plus log-spaced points approaching 1."""
    lo = q_min(alpha) + GRID_MARGIN
    hi = 1.0 - GRID_MARGIN
    uniform = np.linspace(lo, hi, GRID_POINTS)
    near_one = 1.0 - np.logspace(-3, math.log10(GRID_MARGIN), 121)
    return np.unique(np.concatenate([uniform, near_one[near_one > lo]]))


def _derivative(f, q):
    step = STABILITY_STEP
    if 1.0 - q > 2 * step:
        return (f(q + step) - f(q - step)) / (2 * step)
    return (f(q) - f(q - step)) / step


def solve_fixed_point(alpha, rho):
    """Stable fixed point of ``h`` and the NMSE it predicts.

    Above the boundary this is q* = 1 (exact recovery).  Below it, the
    nontrivial root is bracketed on :func:`scan_grid` by a +/- sign change of
    h(q) - q and refined by bisection.
    """
    alpha = check_alpha(alpha)
    rho = check_rho(rho)
    rc = rho_critical(alpha)
    if is_success(alpha, rho):
        return ReplicaPrediction(alpha, rho, 1.0, 1.0, 0.0, Regime.SUCCESS, rc)

    grid = scan_grid(alpha)
    gaps = np.array([fixed_point_gap(q, alpha, rho) for q in grid])
    sign = np.sign(gaps)
    changes = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    stable = [i for i in changes if sign[i] > 0]
    if not stable:
        raise NoFixedPoint(
            f"no stable sign change of h(q) - q for alpha={alpha}, rho={rho}",
            diagnostics={
                "grid_min": float(grid[0]),
                "grid_max": float(grid[-1]),
                "gap_at_min": float(gaps[0]),
                "gap_at_max": float(gaps[-1]),
                "sign_changes": [float(grid[i]) for i in changes],
            },
        )
    if len(stable) > 1:
        raise MultipleFixedPoints(
            f"{len(stable)} stable roots for alpha={alpha}, rho={rho}: "
            f"{[float(grid[i]) for i in stable]}"
        )
    i = stable[0]

    def gap(q):
        return fixed_point_gap(q, alpha, rho)

    q_star = bisect(gap, grid[i], grid[i + 1], xtol=BISECT_XTOL, maxiter=500)
    slope = _derivative(lambda q: h_of_q(q, alpha, rho), q_star)
    if not abs(slope) < 1.0:
        raise Unstable(f"fixed point q*={q_star} has |h'(q*)| = {abs(slope)} >= 1")
    theta = theta_of_q(q_star, alpha)
    return ReplicaPrediction(
        alpha, rho, q_star, theta, q_star - 2.0 * abs(theta) + 1.0, Regime.FAILURE, rc
    )


def predicted_nmse(alpha, rho):
    return solve_fixed_point(alpha, rho).nmse


def picard_fixed_point(alpha, rho, damping=0.3, q0=None, tol=1e-14, max_iter=2_000_000):
    """Damped iteration q <- (1 - damping) q + damping h(q).

    Kept as an independent check on :func:`solve_fixed_point`.  The start
    defaults to rho^2, pulled inside theta's domain when rho^2 < q_min.
    """
    alpha = check_alpha(alpha)
    rho = check_rho(rho)
    lo = q_min(alpha)
    q = rho * rho if q0 is None else float(q0)
    q = min(max(q, lo + 1e-3 * (1.0 - lo)), 1.0)
    for _ in range(max_iter):
        q_next = (1.0 - damping) * q + damping * h_of_q(q, alpha, rho)
        q_next = min(max(q_next, lo), 1.0)
        if abs(q_next - q) <= tol:
            return q_next
        q = q_next
    return q
