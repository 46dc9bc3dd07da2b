"""Exact PhaseMax solution for tiny instances by vertex enumeration.

Only meant as a test oracle: every choice of n active half-planes among
{+a_i.x <= y_i, -a_i.x <= y_i} is solved directly, infeasible candidates are
dropped, and the best vertex wins.  Cost grows like C(2m, n).
"""
import itertools

import numpy as np

from .exceptions import DomainError, Infeasible, Unbounded
from .solver import SolverResult, Status, nmse

MAX_N = 3
MAX_M = 25
FEAS_TOL = 1e-9
TIE_TOL = 1e-9


def oracle_solve_lp(instance):
    A = np.asarray(instance.sensing_matrix, dtype=float)
    y = np.asarray(instance.measurements, dtype=float)
    c = np.asarray(instance.init, dtype=float)
    m, n = A.shape
    if n > MAX_N or m > MAX_M:
        raise DomainError(f"oracle limited to n <= {MAX_N}, m <= {MAX_M} (got n={n}, m={m})")

    # The feasible set is symmetric, so it is bounded in direction c iff c
    # lies in the row space of A.
    if np.linalg.matrix_rank(A) < n:
        coef, *_ = np.linalg.lstsq(A.T, c, rcond=None)
        if np.linalg.norm(A.T @ coef - c) > 1e-9 * max(1.0, np.linalg.norm(c)):
            raise Unbounded("objective is unbounded: anchor has a component outside the row space")

    G = np.vstack([A, -A])
    b = np.concatenate([y, y])
    combos = np.array(list(itertools.combinations(range(2 * m), n)), dtype=int)
    if combos.size == 0:
        raise Infeasible("no active sets to enumerate")
    systems = G[combos]
    rhs = b[combos]
    ok = np.abs(np.linalg.det(systems)) > 1e-12
    if not np.any(ok):
        raise Infeasible("every active set is singular")
    vertices = np.linalg.solve(systems[ok], rhs[ok][..., None])[..., 0]
    slack = vertices @ G.T - b
    feasible = np.all(slack <= FEAS_TOL * np.maximum(1.0, b), axis=1)
    if not np.any(feasible):
        raise Infeasible("no feasible vertex found")
    vertices = vertices[feasible]
    values = vertices @ c
    best = values.max()
    tied = vertices[values >= best - TIE_TOL * max(1.0, abs(best))]
    x = tied[np.lexsort(tied.T[::-1])[0]]

    target = np.asarray(instance.target, dtype=float)
    return SolverResult(
        estimate=x,
        objective=float(c @ x),
        max_violation=float(max(0.0, np.max(np.abs(A @ x) - y))),
        iterations=int(len(combos)),
        status=Status.CONVERGED,
        nmse=nmse(x, target) if np.any(target) else float("nan"),
    )
