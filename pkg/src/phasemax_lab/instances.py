"""Synthetic real phase-retrieval instances with a controlled anchor vector.

Randomness comes from a single ``numpy.random.Philox`` stream keyed by the
64-bit seed.  Draw order is part of the format contract: the sensing matrix
(m*n standard normals, row-major), then the target direction (n normals),
then the direction used to build the anchor (n normals).
"""
import json
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int, check_rho, check_seed, check_vector, check_nonzero
from .exceptions import DomainError


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def n_measurements(n, alpha):
    """m = round(alpha * n), ties rounding half up."""
    return int(math.floor(alpha * n + 0.5))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One realization of y = |A xi| together with an anchor vector ``init``."""

    sensing_matrix: np.ndarray
    target: np.ndarray
    measurements: np.ndarray
    init: np.ndarray
    rho_requested: float = float("nan")
    seed: int | None = None

    def __post_init__(self):
        for arr in (self.sensing_matrix, self.target, self.measurements, self.init):
            arr.setflags(write=False)

    @property
    def n(self):
        return self.sensing_matrix.shape[1]

    @property
    def m(self):
        return self.sensing_matrix.shape[0]

    @property
    def alpha(self):
        return self.m / self.n

    @classmethod
    def from_arrays(cls, sensing_matrix, target, init, rho_requested=None, seed=None):
        """Build an instance from explicit arrays; measurements are computed as |A target|."""
        A = np.array(sensing_matrix, dtype=float, ndmin=2)
        if A.ndim != 2:
            raise DomainError("sensing_matrix must be two-dimensional")
        n = A.shape[1]
        target = check_vector(target, "target", n).copy()
        init = check_vector(init, "init", n).copy()
        if rho_requested is None:
            rho_requested = abs(cosine_similarity(init, target))
        return cls(A, target, np.abs(A @ target), init, float(rho_requested), seed)

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "rho": self.rho_requested,
            "sensing_matrix": self.sensing_matrix.tolist(),
            "target": self.target.tolist(),
            "measurements": self.measurements.tolist(),
            "init": self.init.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        A = np.asarray(d["sensing_matrix"], dtype=float).reshape(d["m"], d["n"])
        return cls(
            A,
            np.asarray(d["target"], dtype=float),
            np.asarray(d["measurements"], dtype=float),
            np.asarray(d["init"], dtype=float),
            float(d["rho"]),
            d["seed"],
        )


def cosine_similarity(u, v):
    """Signed cosine of the angle between two nonzero vectors."""
    u = check_nonzero(check_vector(u, "u"), "u")
    v = check_nonzero(check_vector(v, "v", u.shape[0]), "v")
    c = float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return min(1.0, max(-1.0, c))


def generate_instance(n, alpha, rho, seed):
    """Draw a Gaussian phase-retrieval instance.

    Parameters
    ----------
    n : int
        Signal dimension, at least 2.
    alpha : float
        Oversampling ratio; the instance has ``round(alpha * n)`` measurements.
    rho : float
        Cosine similarity between the anchor and the target, in (0, 1].
    seed : int
        64-bit unsigned seed of the Philox stream.

    Returns
    -------
    ProblemInstance
        Target and anchor both have norm sqrt(n); the anchor lies in the plane
        spanned by the target and one independent Gaussian direction.
    """
    n = check_positive_int(n, "n", minimum=2)
    rho = check_rho(rho)
    seed = check_seed(seed)
    try:
        alpha = float(alpha)
    except (TypeError, ValueError):
        raise DomainError(f"alpha must be a real number (got {alpha!r})") from None
    if not (math.isfinite(alpha) and alpha > 0):
        raise DomainError(f"alpha must be positive (got {alpha!r})")
    m = n_measurements(n, alpha)
    if m < 1:
        raise DomainError(f"round(alpha * n) must be >= 1 (alpha={alpha}, n={n})")

    rng = _rng(seed)
    A = rng.standard_normal((m, n))
    g = rng.standard_normal(n)
    d = rng.standard_normal(n)

    root_n = math.sqrt(n)
    u = g / np.linalg.norm(g)
    target = root_n * u
    if rho == 1.0:
        init = target.copy()
    else:
        v = d - (d @ u) * u
        v -= (v @ u) * u  # second Gram-Schmidt pass
        v /= np.linalg.norm(v)
        init = root_n * (rho * u + math.sqrt(1.0 - rho * rho) * v)
    return ProblemInstance(A, target, np.abs(A @ target), init, rho, seed)
