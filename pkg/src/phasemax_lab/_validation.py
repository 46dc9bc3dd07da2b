"""Input validation helpers shared by the public entry points."""
import math
import numbers

import numpy as np

from .exceptions import DomainError


def check_alpha(alpha, name="alpha"):
    """Oversampling ratio for the replica formulas: finite and > 2."""
    alpha = _as_float(alpha, name)
    if not alpha > 2.0:
        raise DomainError(f"{name} must exceed 2 (got {alpha!r})")
    return alpha


def check_rho(rho, name="rho"):
    rho = _as_float(rho, name)
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"{name} must lie in (0, 1] (got {rho!r})")
    return rho


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer (got {value!r})")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum} (got {value!r})")
    return int(value)


def check_seed(seed, name="seed"):
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise DomainError(f"{name} must be an integer (got {seed!r})")
    if not 0 <= seed < 2**64:
        raise DomainError(f"{name} must be a 64-bit unsigned integer (got {seed!r})")
    return int(seed)


def check_vector(v, name, n=None):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional (got shape {v.shape})")
    if n is not None and v.shape[0] != n:
        raise DomainError(f"{name} must have length {n} (got {v.shape[0]})")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} contains non-finite values")
    return v


def check_nonzero(v, name):
    if not np.any(v):
        raise DomainError(f"{name} must be nonzero")
    return v


def _as_float(x, name):
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number (got {x!r})") from None
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite (got {x!r})")
    return x
