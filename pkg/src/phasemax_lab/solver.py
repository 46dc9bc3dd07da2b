"""First-order primal-dual solver for the PhaseMax linear program.

Solves::

    maximize    x_init . x
    subject to  -y <= A x <= y

as the saddle point ``min_x max_u  -x_init.x + u.(A x) - y.|u|``.  The dual
prox (of ``u -> y.|u|``) is a componentwise soft-threshold at ``sigma * y``;
the primal step is a gradient step driven by ``x_init - A^T u``.  Iterations
are grouped into restart epochs (restart to the epoch average or the last
iterate, whichever has the smaller KKT error) and the primal weight is
rebalanced at each restart, which gives linear convergence on LPs where plain
PDHG crawls.

All matrix-vector products go through numpy/BLAS in a fixed order
(``A @ x`` then ``A.T @ u``); the harness pins BLAS to one thread so results
are bit-reproducible.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_vector, check_nonzero
from .exceptions import NumericalFailure

STALL_WINDOW = 100
RESTART_CHECK = 64
# Restart thresholds on the KKT-error ratio (sufficient, necessary) and the
# artificial restart fraction of total iterations.
RESTART_SUFFICIENT = 0.2
RESTART_NECESSARY = 0.8
RESTART_ARTIFICIAL = 0.36


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 50000
    feas_tol: float = 1e-8
    obj_tol: float = 1e-9
    step_safety: float = 0.95
    power_iters: int = 50

    def __post_init__(self):
        for name in ("max_iters", "power_iters"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer (got {v!r})")
        for name in ("feas_tol", "obj_tol", "step_safety"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive real (got {v!r})")
        if not self.step_safety < 1:
            raise ValueError(f"step_safety must be < 1 (got {self.step_safety!r})")


@dataclass
class SolverResult:
    estimate: np.ndarray
    objective: float
    max_violation: float
    iterations: int
    status: Status
    nmse: float
    # Mean of the per-iteration max violation over consecutive 100-iteration windows.
    violation_windows: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    restarts: int = 0

    @property
    def converged(self):
        return self.status is Status.CONVERGED


def nmse(estimate, target):
    """Sign-resolved error min(|t - x|^2, |t + x|^2) / |t|^2."""
    target = check_nonzero(check_vector(target, "target"), "target")
    estimate = check_vector(estimate, "estimate", target.shape[0])
    t2 = float(target @ target)
    minus = float(np.sum((target - estimate) ** 2))
    plus = float(np.sum((target + estimate) ** 2))
    return min(minus, plus) / t2


def max_violation(A, y, x):
    return float(max(0.0, np.max(np.abs(A @ x) - y)))


def operator_norm(A, iters=50):
    """Largest singular value of ``A`` by power iteration on A^T A."""
    v = np.random.Generator(np.random.Philox(0)).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    s = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        s = math.sqrt(nw)
        v = w / nw
    return s


def _shrink(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _kkt_error(A, y, c, x, u, Ax=None):
    if Ax is None:
        Ax = A @ x
    primal = np.linalg.norm(np.maximum(np.abs(Ax) - y, 0.0))
    dual = np.linalg.norm(A.T @ u - c)
    gap = abs(float(y @ np.abs(u)) - float(c @ x))
    return math.sqrt(primal * primal + dual * dual + gap * gap)


def solve_phasemax(instance, config=None):
    """Solve the PhaseMax LP for ``instance``.

    The primal iterate starts at the anchor ``instance.init`` and the dual at
    zero.  Converged means the max constraint violation is at most
    ``feas_tol * sqrt(n)`` and the objective moved by at most
    ``obj_tol * max(1, |objective|)`` over the last 100 iterations.
    Hitting ``max_iters`` is reported through ``status``; non-finite iterates
    raise :class:`NumericalFailure`.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _solve(instance, config)


def _solve(instance, config):
    config = config or SolverConfig()
    A = np.ascontiguousarray(instance.sensing_matrix, dtype=float)
    y = np.asarray(instance.measurements, dtype=float)
    c = np.asarray(instance.init, dtype=float)
    m, n = A.shape
    feas_bound = config.feas_tol * math.sqrt(n)

    norm_A = operator_norm(A, config.power_iters)
    eta = config.step_safety / norm_A if norm_A > 0 else 1.0
    ny = np.linalg.norm(y)
    omega = np.linalg.norm(c) / ny if ny > 0 and np.any(c) else 1.0

    x = c.copy()
    u = np.zeros(m)
    Ax = A @ x
    x_sum = np.zeros(n)
    u_sum = np.zeros(m)
    epoch_len = 0
    x_anchor, u_anchor = x.copy(), u.copy()
    kkt_last_restart = _kkt_error(A, y, c, x, u, Ax)
    kkt_prev_candidate = math.inf
    restarts = 0

    windows = []
    window_acc = 0.0
    obj_marks = []
    status = Status.MAX_ITERS
    k = 0
    viol = max(0.0, float(np.max(np.abs(Ax) - y)))
    while k < config.max_iters:
        tau = eta / omega
        sigma = eta * omega
        x_new = x - tau * (A.T @ u - c)
        Ax_new = A @ x_new
        u = _shrink(u + sigma * (2.0 * Ax_new - Ax), sigma * y)
        x, Ax = x_new, Ax_new
        k += 1

        viol = float(np.max(np.abs(Ax) - y))
        if not math.isfinite(viol) or not np.all(np.isfinite(u)):
            raise NumericalFailure(f"non-finite iterate at iteration {k}", iteration=k)
        viol = max(viol, 0.0)
        window_acc += viol

        x_sum += x
        u_sum += u
        epoch_len += 1
        if k % RESTART_CHECK == 0:
            kkt_cur = _kkt_error(A, y, c, x, u, Ax)
            x_avg, u_avg = x_sum / epoch_len, u_sum / epoch_len
            kkt_avg = _kkt_error(A, y, c, x_avg, u_avg)
            if kkt_avg < kkt_cur:
                cand_x, cand_u, kkt_cand = x_avg, u_avg, kkt_avg
            else:
                cand_x, cand_u, kkt_cand = x.copy(), u.copy(), kkt_cur
            if (kkt_cand <= RESTART_SUFFICIENT * kkt_last_restart
                    or (kkt_cand <= RESTART_NECESSARY * kkt_last_restart
                        and kkt_cand > kkt_prev_candidate)
                    or epoch_len >= RESTART_ARTIFICIAL * k):
                x, u = cand_x, cand_u
                Ax = A @ x
                dx = np.linalg.norm(x - x_anchor)
                du = np.linalg.norm(u - u_anchor)
                if dx > 1e-10 and du > 1e-10:
                    omega = math.exp(0.5 * math.log(du / dx) + 0.5 * math.log(omega))
                x_anchor, u_anchor = x.copy(), u.copy()
                x_sum[:] = 0.0
                u_sum[:] = 0.0
                epoch_len = 0
                kkt_last_restart = kkt_cand
                kkt_prev_candidate = math.inf
                restarts += 1
                viol = max(0.0, float(np.max(np.abs(Ax) - y)))
            else:
                kkt_prev_candidate = kkt_cand

        if k % STALL_WINDOW == 0:
            windows.append(window_acc / STALL_WINDOW)
            window_acc = 0.0
            obj = float(c @ x)
            obj_marks.append(obj)
            if (len(obj_marks) >= 2 and viol <= feas_bound
                    and abs(obj - obj_marks[-2]) <= config.obj_tol * max(1.0, abs(obj))):
                status = Status.CONVERGED
                break

    target = np.asarray(instance.target, dtype=float)
    return SolverResult(
        estimate=x,
        objective=float(c @ x),
        max_violation=viol,
        iterations=k,
        status=status,
        nmse=nmse(x, target) if np.any(target) else math.nan,
        violation_windows=np.asarray(windows),
        restarts=restarts,
    )
