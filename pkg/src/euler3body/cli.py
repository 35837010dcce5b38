"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 solver did not converge,
3 verification failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import certify
from .config import MassTriple, derived_constants, solve_lambda0
from .dynamics import initial_state, integrate
from .errors import DomainError, RootNotBracketedError, SchemaError, UndersamplingError
from .functionals import EnergyParams
from .loops import circle_loop, random_loop
from .optimize import SolverOptions, continuation_in_eps, minimize_f1
from .orbit_io import emit_csv, emit_svg, read_orbit, write_orbit

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_VERIFY_FAILED = 0, 1, 2, 3

log = logging.getLogger("euler3body")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here that code means non-convergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _masses(text):
    try:
        return MassTriple.parse(text)
    except (DomainError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _eps_list(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("epsilon list is empty")
    return values


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _geometry(masses):
    return derived_constants(masses, solve_lambda0(masses))


def cmd_lambda0(args):
    geom = _geometry(args.masses)
    rows = [("lambda0", geom.lambda0), ("s", geom.s), ("a", geom.a), ("b", geom.b), ("p", geom.p)]
    for name, value in rows:
        print(f"{name:8s} {value:.17g}")
    print(json.dumps(dict(rows)))
    return EXIT_OK


def cmd_minimize(args):
    geom = _geometry(args.masses)
    start = circle_loop(1.0, args.period, K=args.harmonics)
    if args.perturb > 0:
        noise = random_loop(args.harmonics, args.seed, args.perturb, args.period)
        start = start.with_flat(start.flat + noise.flat)
    opts = SolverOptions(tol=args.tol, max_iter=args.max_iter, grid=args.grid)
    loop, report = minimize_f1(start, geom, opts)
    record = certify.minimizer_record(loop, geom, args.masses, report, args.grid)
    write_orbit(record, args.out)
    print(f"f1 = {report.final_value:.15g}  |grad| = {report.final_gradient_norm:.3e}  "
          f"iterations = {report.iterations}  ({report.termination_reason})")
    if not report.converged:
        log.error("minimization did not converge: %s", report.termination_reason)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _stage_path(out: Path, eps: float) -> Path:
    return out.with_name(f"{out.stem}.eps{eps:g}{out.suffix}")


def cmd_mountain_pass(args):
    geom = _geometry(args.masses)
    h = -geom.s / 4 if args.energy is None else args.energy
    base = EnergyParams(h, args.epsilon[0])
    base.check_mountain_pass_range(geom)
    opts = SolverOptions(tol=args.tol, max_iter=args.max_iter, grid=args.grid,
                         path_nodes=args.path_nodes, path_jitter=args.jitter, seed=args.seed)
    stages = continuation_in_eps(args.epsilon, base, geom, args.masses, opts,
                                 T=args.period, K=args.harmonics)
    out = Path(args.out)
    status = EXIT_OK
    final = None
    for stage in stages:
        if stage.loop is None or stage.omega is None:
            log.error("eps=%g failed: %s", stage.eps, stage.error)
            status = EXIT_NOT_CONVERGED
            continue
        record = certify.saddle_record(stage.loop, geom, args.masses, stage.params,
                                       stage.report, args.grid)
        if len(stages) > 1:
            write_orbit(record, _stage_path(out, stage.eps))
        final = record
        print(f"eps = {stage.eps:g}  phi = {stage.report.final_value:.15g}  "
              f"|grad| = {stage.report.final_gradient_norm:.3e}  omega = {stage.omega:.15g}  "
              f"({stage.report.termination_reason})")
        if not stage.ok:
            log.error("eps=%g: %s", stage.eps, stage.error)
            status = EXIT_NOT_CONVERGED
    if final is not None:
        write_orbit(final, out)
    return status


def cmd_verify(args):
    record = read_orbit(args.file)
    checks = certify.verify_record(record, steps=args.steps)
    print(certify.format_checks(checks))
    ok = certify.verified(checks)
    print("VERIFIED" if ok else "VERIFICATION FAILED")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_integrate(args):
    record = read_orbit(args.file)
    geom, masses = record.geometry, record.masses
    params = certify.orbit_params(record)
    start = initial_state(record.loop, geom, masses)
    series = integrate(start, masses, params, args.steps, record.period)
    y0, y1 = start.phase_vector(), series.states[-1].phase_vector()
    err = float(np.linalg.norm(y1 - y0) / np.linalg.norm(y0))
    if args.out:
        emit_csv(series, args.out)
    limit = certify.THRESHOLDS["closureError"]
    print(f"closure error = {err:.6e} over {args.steps} steps (limit {limit:g})")
    return EXIT_OK if err <= limit else EXIT_VERIFY_FAILED


def cmd_plot(args):
    emit_svg(read_orbit(args.file), args.out, args.plane)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="euler3body", description="Eulerian collinear periodic orbits of three bodies.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("lambda0", help="collinear ratio and derived constants")
    s.add_argument("--masses", type=_masses, required=True)
    s.set_defaults(func=cmd_lambda0)

    s = sub.add_parser("minimize", help="minimize the reduced Kepler action")
    s.add_argument("--masses", type=_masses, required=True)
    s.add_argument("--period", type=float, default=2 * np.pi)
    s.add_argument("--harmonics", type=_positive_int, default=16)
    s.add_argument("--grid", type=_positive_int, default=256)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-iter", type=_positive_int, default=100_000)
    s.add_argument("--perturb", type=float, default=0.0, help="amplitude of seeded noise on the start")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_minimize)

    s = sub.add_parser("mountain-pass", help="saddle search with eps continuation")
    s.add_argument("--masses", type=_masses, required=True)
    s.add_argument("--period", type=float, default=2 * np.pi)
    s.add_argument("--energy", type=float, default=None, help="fixed energy h (default -s/4)")
    s.add_argument("--epsilon", type=_eps_list, required=True)
    s.add_argument("--harmonics", type=_positive_int, default=16)
    s.add_argument("--grid", type=_positive_int, default=256)
    s.add_argument("--path-nodes", type=_positive_int, default=33)
    s.add_argument("--tol", type=float, default=1e-5)
    s.add_argument("--max-iter", type=_positive_int, default=100_000)
    s.add_argument("--jitter", type=float, default=0.0, help="seeded noise on the initial path")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mountain_pass)

    s = sub.add_parser("verify", help="recompute and check every stored diagnostic")
    s.add_argument("file")
    s.add_argument("--steps", type=_positive_int, default=certify.CLOSURE_STEPS)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("integrate", help="time-step one period and report closure")
    s.add_argument("file")
    s.add_argument("--steps", type=_positive_int, required=True)
    s.add_argument("--out", help="optional CSV time series")
    s.set_defaults(func=cmd_integrate)

    s = sub.add_parser("plot", help="SVG of the body traces")
    s.add_argument("file")
    s.add_argument("--out", required=True)
    s.add_argument("--plane", choices=("xy", "xz", "yz"), default="xy")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (DomainError, SchemaError, UndersamplingError, RootNotBracketedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED if args.command in ("verify", "integrate") else EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
