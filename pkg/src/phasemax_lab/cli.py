"""Command-line interface: ``phasemax-lab {predict,boundary,solve,sweep}``.

Exit codes: 0 success, 2 argument or domain error, 3 I/O error,
4 solver non-convergence (or a sweep cell in which every trial failed).
"""
import argparse
import json
import logging
import math
import sys

import numpy as np

from . import replica
from ._validation import check_alpha, check_rho
from .config import SOLVER_KEYS, ConfigError, parse_list, parse_sweep_config
from .exceptions import DomainError, NoCrossing, NoFixedPoint, MultipleFixedPoints, Unstable
from .harness import (
    SweepConfig, records_to_csv, records_to_json, run_sweep, transitions_by_rho,
    zero_crossing_rho,
)
from .instances import generate_instance
from .oracle import MAX_M, MAX_N, oracle_solve_lp
from .solver import SolverConfig, Status, solve_phasemax

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SOLVER = 4

_SOLVER_DEFAULTS = SolverConfig()
_SWEEP_DEFAULTS = {"n": 200, "trials": 20, "base_seed": 0, "parallelism": 0}


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--max-iters", type=int, default=None,
                   help=f"iteration cap (default: {_SOLVER_DEFAULTS.max_iters})")
    g.add_argument("--feas-tol", type=float, default=None,
                   help=f"max violation / sqrt(n) at convergence (default: {_SOLVER_DEFAULTS.feas_tol})")
    g.add_argument("--obj-tol", type=float, default=None,
                   help=f"relative objective change per 100 iterations (default: {_SOLVER_DEFAULTS.obj_tol})")
    g.add_argument("--step-safety", type=float, default=None,
                   help=f"fraction of the step-size limit (default: {_SOLVER_DEFAULTS.step_safety})")
    g.add_argument("--power-iters", type=int, default=None,
                   help=f"power iterations for ||A||_2 (default: {_SOLVER_DEFAULTS.power_iters})")


def _solver_config(args, base=None):
    kwargs = dict(base or {})
    for key in SOLVER_KEYS:
        v = getattr(args, key)
        if v is not None:
            kwargs[key] = v
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phasemax-lab",
        description="PhaseMax phase retrieval: replica predictions and Monte Carlo simulation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("predict", help="replica prediction at one (alpha, rho)", formatter_class=fmt)
    p.add_argument("--alpha", type=float, required=True, help="oversampling ratio m/n (> 2)")
    p.add_argument("--rho", type=float, required=True, help="anchor cosine similarity in (0, 1]")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")

    p = sub.add_parser("boundary", help="phase boundary and sufficient-condition curves as CSV",
                       formatter_class=fmt)
    p.add_argument("--rho-min", type=float, default=0.05)
    p.add_argument("--rho-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=96)
    p.add_argument("--out", default=None, help="output CSV path (stdout if omitted)")

    p = sub.add_parser("solve", help="generate and solve one instance", formatter_class=fmt)
    p.add_argument("--n", type=int, required=True, help="signal dimension (>= 2)")
    p.add_argument("--alpha", type=float, required=True, help="oversampling ratio m/n")
    p.add_argument("--rho", type=float, required=True, help="anchor cosine similarity in (0, 1]")
    p.add_argument("--seed", type=int, default=0, help="64-bit instance seed")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.add_argument("--instance-out", default=None, help="also write the instance as JSON here")
    _add_solver_flags(p)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over an (alpha, rho) grid", formatter_class=fmt)
    p.add_argument("--config", default=None, help="key = value sweep config file")
    p.add_argument("--n", type=int, default=None, help=f"signal dimension (default: {_SWEEP_DEFAULTS['n']})")
    p.add_argument("--alphas", default=None, help="comma list or linspace(a, b, k)")
    p.add_argument("--rhos", default=None, help="comma list or linspace(a, b, k)")
    p.add_argument("--trials", type=int, default=None,
                   help=f"trials per cell (default: {_SWEEP_DEFAULTS['trials']})")
    p.add_argument("--base-seed", type=int, default=None,
                   help=f"base seed (default: {_SWEEP_DEFAULTS['base_seed']})")
    p.add_argument("--parallelism", type=int, default=None,
                   help=f"worker processes, 0 = all CPUs (default: {_SWEEP_DEFAULTS['parallelism']})")
    p.add_argument("--out", default=None, help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threshold", type=float, default=1e-3,
                   help="median NMSE counted as success in the summary")
    _add_solver_flags(p)
    return parser


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc}") from None


def _num(v):
    return None if v is None or not math.isfinite(v) else v


def cmd_predict(args):
    try:
        alpha = check_alpha(args.alpha)
        rho = check_rho(args.rho)
    except DomainError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None
    report = {
        "alpha": alpha,
        "rho": rho,
        "rho_critical": replica.rho_critical(alpha),
        "alpha_critical": replica.alpha_critical(rho),
        "alpha_sufficient": replica.sufficient_alpha(rho),
    }
    try:
        pred = replica.solve_fixed_point(alpha, rho)
    except (NoFixedPoint, Unstable, MultipleFixedPoints) as exc:
        raise _Fail(EXIT_USAGE, f"no stable prediction at alpha={alpha}, rho={rho}: {exc}") from None
    report.update(q_star=pred.q_star, theta_star=pred.theta_star, nmse=pred.nmse,
                  regime=pred.regime.value)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for key in ("alpha", "rho", "q_star", "theta_star", "nmse", "regime",
                    "rho_critical", "alpha_critical", "alpha_sufficient"):
            v = report[key]
            print(f"{key:17s} {v:.12g}" if isinstance(v, float) else f"{key:17s} {v}")
    return EXIT_OK


def cmd_boundary(args):
    if not 0 < args.rho_min < args.rho_max <= 1:
        raise _Fail(EXIT_USAGE, "need 0 < --rho-min < --rho-max <= 1")
    if args.points < 2:
        raise _Fail(EXIT_USAGE, "--points must be >= 2")
    lines = ["rho,alpha_critical,alpha_sufficient"]
    for rho in np.linspace(args.rho_min, args.rho_max, args.points):
        rho = float(rho)
        lines.append(f"{rho:.17e},{replica.alpha_critical(rho):.17e},{replica.sufficient_alpha(rho):.17e}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_solve(args):
    config = _solver_config(args)
    try:
        inst = generate_instance(args.n, args.alpha, args.rho, args.seed)
    except DomainError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None
    if args.instance_out:
        _write(inst.to_json(), args.instance_out)
    res = solve_phasemax(inst, config)
    report = {
        "n": inst.n,
        "m": inst.m,
        "seed": args.seed,
        "status": res.status.value,
        "nmse": res.nmse,
        "objective": res.objective,
        "max_violation": res.max_violation,
        "iterations": res.iterations,
        "truth_objective": abs(float(inst.init @ inst.target)),
    }
    if inst.n <= MAX_N and inst.m <= MAX_M:
        report["oracle_objective"] = oracle_solve_lp(inst).objective
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for key, v in report.items():
            print(f"{key:17s} {v:.12g}" if isinstance(v, float) else f"{key:17s} {v}")
    return EXIT_OK if res.status is Status.CONVERGED else EXIT_SOLVER


def _sweep_config(args):
    values = dict(_SWEEP_DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise _Fail(EXIT_USAGE, f"cannot read config {args.config}: {exc}") from None
        try:
            values.update(parse_sweep_config(text))
        except ConfigError as exc:
            raise _Fail(EXIT_USAGE, f"{args.config}: {exc}") from None
    for key in ("n", "trials", "base_seed", "parallelism"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    for key in ("alphas", "rhos"):
        raw = getattr(args, key)
        if raw is not None:
            try:
                values[key] = parse_list(raw)
            except ValueError as exc:
                raise _Fail(EXIT_USAGE, f"--{key}: {exc}") from None
    for key in ("alphas", "rhos"):
        if key not in values:
            raise _Fail(EXIT_USAGE, f"{key} missing: pass --{key} or set it in --config")
    solver = _solver_config(args, {k: values.pop(k) for k in SOLVER_KEYS if k in values})
    try:
        return SweepConfig(solver=solver, **values)
    except (DomainError, TypeError) as exc:
        raise _Fail(EXIT_USAGE, f"invalid sweep config: {exc}") from None


def _summary(records, threshold):
    out = [f"{'alpha':>8} {'rho':>8} {'mean':>12} {'median':>12} {'predicted':>12} {'regime':>11} fails"]
    for r in records:
        pred = f"{r.predicted_nmse:12.5g}" if r.prediction_available else f"{'unavailable':>12}"
        out.append(f"{r.alpha:8.4g} {r.rho:8.4g} {r.nmse_mean:12.5g} {r.nmse_median:12.5g} "
                   f"{pred} {r.regime or 'unavailable':>11} {r.solver_failures + r.numerical_failures}")
    for rho, a in transitions_by_rho(records, threshold).items():
        crit = replica.alpha_critical(rho)
        shown = "none" if a is None else f"{a:.4g}"
        out.append(f"rho={rho:.4g}: empirical transition alpha {shown} (predicted {crit:.4g})")
    for alpha in sorted({r.alpha for r in records}):
        cell = [r for r in records if r.alpha == alpha]
        try:
            rc = zero_crossing_rho(cell, threshold)
        except NoCrossing:
            continue
        pred = f"{replica.rho_critical(alpha):.4g}" if alpha > 2 else "unavailable"
        out.append(f"alpha={alpha:.4g}: empirical critical rho {rc:.4g} (predicted {pred})")
    return "\n".join(out) + "\n"


def cmd_sweep(args):
    config = _sweep_config(args)
    records = run_sweep(config)
    text = records_to_csv(records) if args.format == "csv" else records_to_json(records, config)
    _write(text, args.out)
    summary = _summary(records, args.threshold)
    (sys.stderr if args.out is None else sys.stdout).write(summary)
    return EXIT_SOLVER if any(r.failed for r in records) else EXIT_OK


COMMANDS = {"predict": cmd_predict, "boundary": cmd_boundary, "solve": cmd_solve, "sweep": cmd_sweep}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
