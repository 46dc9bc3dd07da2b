"""Seeded Monte Carlo campaigns over (alpha, rho) grids.

Each trial draws its instance from its own 64-bit seed::

    seed = SeedSequence(base_seed, spawn_key=(alpha_index, rho_index, trial))
               .generate_state(1, uint64)[0]

so adding grid points at the end of either axis never changes the randomness
of existing cells.  Every solve runs with BLAS limited to one thread, which
fixes the floating-point reduction order; records are therefore identical
whether trials run serially or in a process pool.
"""
import csv
import io
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from threadpoolctl import threadpool_limits

from . import replica
from .exceptions import DomainError, NoCrossing, NumericalFailure
from .instances import generate_instance
from .solver import SolverConfig, Status, solve_phasemax

log = logging.getLogger(__name__)

SCHEMA = "phasemax-lab/1"
UNRELIABLE_FRACTION = 0.2
UNAVAILABLE = "unavailable"
CSV_COLUMNS = (
    "alpha", "rho", "n", "trials", "nmse_mean", "nmse_median", "nmse_std",
    "predicted_nmse", "regime", "rho_critical", "alpha_sufficient", "solver_failures",
)


class TransitionWarning(UserWarning):
    """Empirical success/failure pattern is not monotone in alpha."""


def trial_seed(base_seed, alpha_index, rho_index, trial):
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(alpha_index, rho_index, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SweepConfig:
    alphas: tuple
    rhos: tuple
    n: int = 200
    trials: int = 20
    base_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    parallelism: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "rhos", tuple(float(r) for r in self.rhos))
        for name, grid in (("alphas", self.alphas), ("rhos", self.rhos)):
            if not grid:
                raise DomainError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise DomainError(f"{name} must be strictly increasing")
        if any(not (math.isfinite(a) and a > 0) for a in self.alphas):
            raise DomainError("alphas must be positive")
        if any(not 0 < r <= 1 for r in self.rhos):
            raise DomainError("rhos must lie in (0, 1]")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if not 0 <= self.base_seed < 2**64:
            raise DomainError("base_seed must be a 64-bit unsigned integer")
        if self.parallelism < 0:
            raise DomainError("parallelism must be >= 0")

    def to_dict(self):
        """Serializable form; ``parallelism`` is omitted since it never affects results."""
        d = asdict(self)
        del d["parallelism"]
        d["alphas"] = list(self.alphas)
        d["rhos"] = list(self.rhos)
        return d


@dataclass
class ExperimentRecord:
    alpha: float
    rho: float
    n: int
    nmse_trials: list
    seeds: list
    iterations: list
    predicted_nmse: float
    regime: str | None
    rho_critical: float
    alpha_sufficient: float
    solver_failures: int
    numerical_failures: int = 0
    errors: list = field(default_factory=list)

    @property
    def trials(self):
        return len(self.nmse_trials)

    def _finite(self):
        v = np.asarray(self.nmse_trials, dtype=float)
        return v[np.isfinite(v)]

    @property
    def nmse_mean(self):
        v = self._finite()
        return float(np.mean(v)) if v.size else math.nan

    @property
    def nmse_median(self):
        v = self._finite()
        return float(np.median(v)) if v.size else math.nan

    @property
    def nmse_std(self):
        v = self._finite()
        return float(np.std(v)) if v.size else math.nan

    @property
    def failed(self):
        """Every trial ended in a numerical failure."""
        return self.numerical_failures == self.trials

    @property
    def unreliable(self):
        return (self.solver_failures + self.numerical_failures) > UNRELIABLE_FRACTION * self.trials

    @property
    def prediction_available(self):
        return math.isfinite(self.predicted_nmse)

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "rho": self.rho,
            "n": self.n,
            "trials": self.trials,
            "nmse_trials": [_json_float(v) for v in self.nmse_trials],
            "nmse_mean": _json_float(self.nmse_mean),
            "nmse_median": _json_float(self.nmse_median),
            "nmse_std": _json_float(self.nmse_std),
            "predicted_nmse": _json_float(self.predicted_nmse),
            "regime": self.regime,
            "rho_critical": _json_float(self.rho_critical),
            "alpha_sufficient": _json_float(self.alpha_sufficient),
            "solver_failures": self.solver_failures,
            "numerical_failures": self.numerical_failures,
            "unreliable": self.unreliable,
            "failed": self.failed,
            "seeds": list(self.seeds),
            "iterations": list(self.iterations),
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, d):
        def num(v):
            return math.nan if v is None else float(v)

        return cls(
            alpha=float(d["alpha"]),
            rho=float(d["rho"]),
            n=int(d["n"]),
            nmse_trials=[num(v) for v in d["nmse_trials"]],
            seeds=[int(s) for s in d["seeds"]],
            iterations=[int(i) for i in d["iterations"]],
            predicted_nmse=num(d["predicted_nmse"]),
            regime=d["regime"],
            rho_critical=num(d["rho_critical"]),
            alpha_sufficient=num(d["alpha_sufficient"]),
            solver_failures=int(d["solver_failures"]),
            numerical_failures=int(d.get("numerical_failures", 0)),
            errors=list(d.get("errors", [])),
        )


def _json_float(v):
    return None if v is None or not math.isfinite(v) else float(v)


def _prediction(alpha, rho):
    """(predicted_nmse, regime, rho_critical, alpha_sufficient, note)."""
    alpha_sufficient = replica.sufficient_alpha(rho)
    if not alpha > 2:
        return math.nan, None, math.nan, alpha_sufficient, f"prediction unavailable for alpha={alpha} <= 2"
    regime = (replica.Regime.SUCCESS if replica.is_success(alpha, rho) else replica.Regime.FAILURE).value
    rc = replica.rho_critical(alpha)
    try:
        pred = replica.solve_fixed_point(alpha, rho).nmse
    except (replica.NoFixedPoint, replica.Unstable, replica.MultipleFixedPoints) as exc:
        return math.nan, regime, rc, alpha_sufficient, f"prediction unavailable: {exc}"
    return pred, regime, rc, alpha_sufficient, None


def _run_trial(n, alpha, rho, seed, solver_config):
    """Returns (nmse, status value or None, iterations, error message or None)."""
    with threadpool_limits(limits=1):
        try:
            inst = generate_instance(n, alpha, rho, seed)
            res = solve_phasemax(inst, solver_config)
        except NumericalFailure as exc:
            return math.nan, None, exc.iteration or 0, str(exc)
    return res.nmse, res.status.value, res.iterations, None


def _workers(parallelism):
    if parallelism == 0:
        return os.cpu_count() or 1
    return parallelism


def _execute(jobs, parallelism):
    workers = _workers(parallelism)
    if workers <= 1 or len(jobs) <= 1:
        return [_run_trial(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial, *zip(*jobs), chunksize=1))


def _assemble(n, alpha, rho, seeds, outcomes):
    pred, regime, rc, a_suff, note = _prediction(alpha, rho)
    errors = [] if note is None else [note]
    errors += [f"trial {t}: {err}" for t, (_, _, _, err) in enumerate(outcomes) if err]
    return ExperimentRecord(
        alpha=alpha,
        rho=rho,
        n=n,
        nmse_trials=[o[0] for o in outcomes],
        seeds=list(seeds),
        iterations=[o[2] for o in outcomes],
        predicted_nmse=pred,
        regime=regime,
        rho_critical=rc,
        alpha_sufficient=a_suff,
        solver_failures=sum(o[1] == Status.MAX_ITERS.value for o in outcomes),
        numerical_failures=sum(o[1] is None for o in outcomes),
        errors=errors,
    )


def run_cell(n, alpha, rho, trials, base_seed, solver_config=None,
             alpha_index=0, rho_index=0, parallelism=1):
    """Run ``trials`` seeded solves at one (alpha, rho) and attach the replica prediction."""
    solver_config = solver_config or SolverConfig()
    if n < 2:
        raise DomainError("n must be >= 2")
    if not alpha > 2:
        warnings.warn(f"alpha={alpha} <= 2: replica prediction unavailable", stacklevel=2)
    seeds = [trial_seed(base_seed, alpha_index, rho_index, t) for t in range(trials)]
    outcomes = _execute([(n, alpha, rho, s, solver_config) for s in seeds], parallelism)
    return _assemble(n, alpha, rho, seeds, outcomes)


def run_sweep(config):
    """Evaluate every cell of ``config``; output is ordered by (alpha index, rho index)."""
    cells = [(ia, a, ir, r) for ia, a in enumerate(config.alphas) for ir, r in enumerate(config.rhos)]
    jobs, seeds = [], []
    for ia, a, ir, r in cells:
        s = [trial_seed(config.base_seed, ia, ir, t) for t in range(config.trials)]
        seeds.append(s)
        jobs += [(config.n, a, r, seed, config.solver) for seed in s]
    log.info("running %d cells x %d trials", len(cells), config.trials)
    outcomes = _execute(jobs, config.parallelism)
    records = []
    for k, (ia, a, ir, r) in enumerate(cells):
        chunk = outcomes[k * config.trials:(k + 1) * config.trials]
        rec = _assemble(config.n, a, r, seeds[k], chunk)
        if rec.failed:
            log.warning("cell alpha=%g rho=%g: every trial failed", a, r)
        records.append(rec)
    return records


def empirical_transition(records, threshold=1e-3):
    """Midpoint between the last failing and first succeeding alpha for one rho.

    A cell succeeds when its median NMSE is at most ``threshold``.
    """
    records = sorted(records, key=lambda r: r.alpha)
    if not records:
        raise NoCrossing("no records")
    if len({r.rho for r in records}) != 1:
        raise DomainError("records must share a single rho")
    alphas = [r.alpha for r in records]
    ok = [r.nmse_median <= threshold for r in records]
    failing = [a for a, s in zip(alphas, ok) if not s]
    passing = [a for a, s in zip(alphas, ok) if s]
    if not failing or not passing:
        raise NoCrossing(
            f"no crossing of threshold {threshold} at rho={records[0].rho} "
            f"({len(passing)} successes, {len(failing)} failures)"
        )
    hi_fail = max(failing)
    lo_pass = min(passing)
    if hi_fail > lo_pass:
        i, j = alphas.index(lo_pass), alphas.index(hi_fail)
        if j - i > 1:
            warnings.warn(
                f"non-monotone success pattern at rho={records[0].rho}: failure at alpha={hi_fail} "
                f"above success at alpha={lo_pass}",
                TransitionWarning,
                stacklevel=2,
            )
    return 0.5 * (hi_fail + lo_pass)


def transitions_by_rho(records, threshold=1e-3):
    """{rho: empirical transition alpha or None} for every rho in ``records``."""
    out = {}
    for rho in sorted({r.rho for r in records}):
        try:
            out[rho] = empirical_transition([r for r in records if r.rho == rho], threshold)
        except NoCrossing:
            out[rho] = None
    return out


def zero_crossing_rho(records, threshold=1e-3):
    """Smallest rho above which every cell (for one alpha) has median NMSE <= threshold."""
    records = sorted(records, key=lambda r: r.rho)
    ok = [r.nmse_median <= threshold for r in records]
    if all(ok) or not any(ok):
        raise NoCrossing(f"no crossing of threshold {threshold} at alpha={records[0].alpha}")
    last_fail = max(i for i, s in enumerate(ok) if not s)
    if last_fail == len(records) - 1:
        raise NoCrossing(f"largest rho fails at alpha={records[0].alpha}")
    return 0.5 * (records[last_fail].rho + records[last_fail + 1].rho)


def _fmt(v):
    return format(v, ".17e")


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        avail = r.prediction_available
        w.writerow([
            _fmt(r.alpha), _fmt(r.rho), r.n, r.trials,
            _fmt(r.nmse_mean), _fmt(r.nmse_median), _fmt(r.nmse_std),
            _fmt(r.predicted_nmse) if avail else UNAVAILABLE,
            r.regime if r.regime is not None else UNAVAILABLE,
            _fmt(r.rho_critical) if math.isfinite(r.rho_critical) else UNAVAILABLE,
            _fmt(r.alpha_sufficient), r.solver_failures,
        ])
    return buf.getvalue()


def records_to_json(records, config=None):
    doc = {"schema": SCHEMA}
    if config is not None:
        doc["config"] = config.to_dict()
    doc["records"] = [r.to_dict() for r in records]
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def records_from_json(text):
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise DomainError(f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA!r}")
    return [ExperimentRecord.from_dict(d) for d in doc["records"]]


def write_records(records, path, fmt="csv", config=None):
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records, config)
    with open(path, "w", newline="") as fh:
        fh.write(text)
