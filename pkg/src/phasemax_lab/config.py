"""Flat key-value sweep configuration files.

Grammar, one assignment per line::

    # comment
    n = 200
    alphas = 2.5, 3.5
    rhos = linspace(0.1, 0.95, 15)
    trials = 20
    base_seed = 0

Lists are comma-separated reals or ``linspace(start, stop, count)``.  Keys
not listed in ``KEYS`` are rejected.  Solver keys (``max_iters``,
``feas_tol``, ``obj_tol``, ``step_safety``, ``power_iters``) configure the
per-trial solver.
"""
import re

import numpy as np

from .exceptions import DomainError

_LINSPACE = re.compile(r"^linspace\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)$")

KEYS = {
    "n": int,
    "trials": int,
    "base_seed": int,
    "parallelism": int,
    "alphas": "list",
    "rhos": "list",
    "max_iters": int,
    "feas_tol": float,
    "obj_tol": float,
    "step_safety": float,
    "power_iters": int,
}
SOLVER_KEYS = ("max_iters", "feas_tol", "obj_tol", "step_safety", "power_iters")


class ConfigError(DomainError):
    def __init__(self, message, line=None, key=None):
        where = f"line {line}: " if line is not None else ""
        where += f"{key}: " if key else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


def parse_list(text):
    text = text.strip()
    m = _LINSPACE.match(text)
    if m:
        start, stop, count = float(m.group(1)), float(m.group(2)), int(m.group(3))
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(tok) for tok in text.split(",") if tok.strip()]


def parse_value(key, raw):
    kind = KEYS[key]
    if kind == "list":
        return parse_list(raw)
    return kind(raw.strip())


def parse_sweep_config(text):
    """Parse config text into a dict of typed values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key (allowed: {', '.join(KEYS)})", line=lineno, key=key)
        if key in out:
            raise ConfigError("duplicate key", line=lineno, key=key)
        try:
            out[key] = parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {raw!r} ({exc})", line=lineno, key=key) from None
    return out
