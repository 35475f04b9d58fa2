"""Command-line front end.

Exit status: 0 when every margin clears its tolerance, 1 on at least one
violation, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import inequalities as iq
from . import scanner, series
from .errors import BrannanError, DomainError, IoError, UnknownCheck
from .integral_rep import phi_quadrature, phi_series
from .quadrature import RULES, QuadratureSpec

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, angles: bool = True) -> None:
    g = p.add_argument_group("output and numerics")
    g.add_argument("--format", choices=("human", "csv", "json"), default="human",
                   help="output format")
    g.add_argument("--out", default=None, help="write output to this path instead of stdout")
    g.add_argument("--abs-tol", type=float, default=1e-10, help="quadrature absolute tolerance")
    g.add_argument("--rel-tol", type=float, default=1e-9, help="quadrature relative tolerance")
    g.add_argument("--max-levels", type=int, default=12, help="quadrature refinement levels")
    g.add_argument("--rule", choices=RULES, default="double_exponential", help="quadrature rule")
    if angles:
        g.add_argument("--degrees", action="store_true", help="read angles in degrees")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="brannan-check", formatter_class=fmt,
                                     description="Numerical checks for Brannan coefficient bounds.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("coeffs", formatter_class=fmt, help="coefficient A_m(alpha, beta, e^{i theta})")
    p.add_argument("--alpha", type=float, required=True, help="alpha > 0")
    p.add_argument("--beta", type=float, default=1.0, help="beta > 0")
    p.add_argument("--m", type=int, required=True, help="odd coefficient index")
    p.add_argument("--theta", type=float, default=0.0, help="angle in [-pi, pi]")
    _common(p)

    p = sub.add_parser("margin", formatter_class=fmt, help="A_m(1) - |A_m(e^{i theta})|")
    p.add_argument("--alpha", type=float, required=True, help="alpha > 0")
    p.add_argument("--beta", type=float, default=1.0, help="beta > 0")
    p.add_argument("--m", type=int, required=True, help="odd coefficient index")
    p.add_argument("--theta", type=float, default=0.0, help="angle in [-pi, pi]")
    _common(p)

    p = sub.add_parser("phi", formatter_class=fmt, help="Phi(theta) by quadrature or series")
    p.add_argument("--alpha", type=float, required=True, help="alpha > 0")
    p.add_argument("--m", type=int, required=True, help="odd coefficient index")
    p.add_argument("--theta", type=float, default=0.0, help="angle in [-pi, pi]")
    p.add_argument("--method", choices=("quadrature", "series"), default="quadrature",
                   help="how Phi is evaluated")
    p.add_argument("--sq-diff", action="store_true",
                   help="report Phi(0)^2 - |Phi(theta)|^2 as a margin instead")
    _common(p)

    p = sub.add_parser("lemmas", formatter_class=fmt, help="margins of the integral lemmas")
    p.add_argument("--lemma", choices=("3a", "3b", "4", "5a", "5b"), required=True,
                   help="lemma and part")
    p.add_argument("--alpha", type=float, default=0.5, help="ignored by lemma 4")
    p.add_argument("--n", type=int, default=27, help="ignored by lemma 4")
    p.add_argument("--theta", type=float, required=True, help="angle")
    p.add_argument("--t", type=float, default=None, help="lemma 4 only")
    p.add_argument("--variant", choices=tuple(iq.LEMMA5_VARIANTS), default="stated_27_50",
                   help="constant pair for lemma 5")
    p.add_argument("--proof-form", action="store_true", help="lemma 3b with the extra (1+t) factor")
    _common(p)

    p = sub.add_parser("theorem3", formatter_class=fmt, help="reduced inequality with x = -cos(theta)")
    p.add_argument("--alpha", type=float, default=None, help="alpha in (0, 1)")
    p.add_argument("--n", type=int, default=27, help="coefficient index is 2n - 1")
    p.add_argument("--x", type=float, default=None, help="x = -cos(theta) in [1/2, 1]")
    p.add_argument("--display-factors", type=int, default=None, metavar="K",
                   help="instead check 4/3 >= 6 prod_{k<=K}(1 - 1/(3k))")
    _common(p, angles=False)

    p = sub.add_parser("conjecture", formatter_class=fmt, help="the same inequality for 0 < alpha < 1/3")
    p.add_argument("--alpha", type=float, required=True, help="alpha > 0")
    p.add_argument("--n", type=int, default=27, help="coefficient index is 2n - 1")
    p.add_argument("--x", type=float, required=True, help="x = -cos(theta) in [1/2, 1]")
    _common(p, angles=False)

    p = sub.add_parser("scan", formatter_class=fmt, help="grid scan of one check")
    p.add_argument("--check", required=True, help=f"one of: {', '.join(scanner.CHECKS)}")
    p.add_argument("--alpha", nargs=3, type=float, metavar=("LO", "HI", "STEP"), default=None,
                   help="closed range")
    p.add_argument("--t-range", nargs=3, type=float, metavar=("LO", "HI", "STEP"), default=None,
                   help="lemma4 only, replaces --alpha")
    p.add_argument("--angle", nargs=3, type=float, metavar=("LO", "HI", "STEP"), default=None,
                   help="closed range")
    p.add_argument("--x", nargs=3, type=float, metavar=("LO", "HI", "STEP"), default=None,
                   help="closed range")
    p.add_argument("--n", nargs="+", type=int, default=[], help="values of n (m = 2n - 1)")
    p.add_argument("--beta", type=float, default=1.0, help="brannan check only")
    p.add_argument("--variant", default=None, help="proof_form for lemma3b; a constant pair for lemma5")
    p.add_argument("--near-threshold", type=float, default=1e-6,
                   help="margins below this are listed as near violations")
    p.add_argument("--violation-tol", type=float, default=1e-12,
                   help="violation when margin < -(tol + 2 * error estimate)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads; falls back to BRANNAN_THREADS, then 1")
    p.add_argument("--include-cells", action="store_true", help="list every cell in JSON output")
    _common(p)

    p = sub.add_parser("constants", formatter_class=fmt, help="scalar constants used in the proofs")
    p.add_argument("--n", type=int, required=True, help="coefficient index is 2n - 1")
    _common(p, angles=False)
    return parser


def _qspec(args) -> QuadratureSpec:
    return QuadratureSpec(rule=args.rule, abs_tol=args.abs_tol, rel_tol=args.rel_tol,
                          max_levels=args.max_levels)


def _angle(args, value: float) -> float:
    return math.radians(value) if getattr(args, "degrees", False) else value


def _threads(args) -> int:
    if args.threads is not None:
        k = args.threads
    else:
        env = os.environ.get("BRANNAN_THREADS", "").strip()
        try:
            k = int(env) if env else 1
        except ValueError:
            raise UsageError(f"BRANNAN_THREADS must be an integer, got {env!r}") from None
    if k < 1:
        raise UsageError("thread count must be at least 1")
    return k


def _points(args, check, rows, qspec, names=None) -> int:
    report = scanner.results_report(check, rows, qspec)
    scanner.write_text(scanner.render_points(report, args.format, names), args.out)
    return EXIT_VIOLATION if report.failed else EXIT_OK


def _cmd_coeffs(args) -> int:
    q = series.SeriesQuery(args.alpha, args.m, _angle(args, args.theta), args.beta)
    scanner.write_text(scanner.format_complex(series.partial_sum(q), args.format), args.out)
    return EXIT_OK


def _cmd_margin(args) -> int:
    q = series.SeriesQuery(args.alpha, args.m, _angle(args, args.theta), args.beta)
    r = iq.brannan_check(q)
    return _points(args, "brannan", [((q.m + 1) // 2, q.alpha, q.theta, r)], None)


def _cmd_phi(args) -> int:
    theta = _angle(args, args.theta)
    qspec = _qspec(args)
    if args.sq_diff:
        r = iq.phi_sq_check(args.alpha, args.m, theta, qspec)
        return _points(args, "phi_sq_diff", [((args.m + 1) // 2, args.alpha, theta, r)], qspec)
    if args.method == "series":
        value = phi_series(args.alpha, args.m, theta).value
    else:
        value = phi_quadrature(args.alpha, args.m, theta, qspec).value
    scanner.write_text(scanner.format_complex(value, args.format), args.out)
    return EXIT_OK


def _cmd_lemmas(args) -> int:
    theta = _angle(args, args.theta)
    qspec = _qspec(args)
    if args.lemma == "4":
        if args.t is None:
            raise UsageError("lemma 4 needs --t")
        r = iq.lemma4_margin(args.t, theta)
        return _points(args, "lemma4", [(0, args.t, theta, r)], None)
    if args.t is not None:
        raise UsageError("--t applies to lemma 4 only")
    part = args.lemma[1]
    if args.lemma[0] == "3":
        r = iq.lemma3_margin(part, args.alpha, args.n, theta, qspec, proof_form=args.proof_form)
    else:
        r = iq.lemma5_margin(part, args.variant, args.alpha, args.n, theta, qspec)
    return _points(args, r.name, [(args.n, args.alpha, theta, r)], qspec)


def _cmd_theorem3(args) -> int:
    if args.display_factors is not None:
        r = iq.final_display_margin(args.display_factors)
        return _points(args, r.name, [(args.display_factors, r.inputs["alpha"], math.nan, r)], None)
    if args.alpha is None or args.x is None:
        raise UsageError("theorem3 needs --alpha and --x (or --display-factors)")
    qspec = _qspec(args)
    r = iq.theorem3_margin(args.alpha, args.n, args.x, qspec)
    rows = [(args.n, args.alpha, args.x, r), (args.n, args.alpha, math.nan, r.sub[0])]
    return _points(args, "theorem3", rows, qspec, names=["theorem3", r.sub[0].name])


def _cmd_conjecture(args) -> int:
    qspec = _qspec(args)
    r = iq.conjecture_margin(args.alpha, args.n, args.x, qspec)
    return _points(args, "conjecture", [(args.n, args.alpha, args.x, r)], qspec)


def _cmd_constants(args) -> int:
    results = iq.proof_constant_checks(args.n)
    rows = [(args.n, math.nan, math.nan, r) for r in results]
    return _points(args, "constants", rows, None, names=[r.name for r in results])


def _cmd_scan(args) -> int:
    if args.format == "csv" and args.include_cells:
        raise UsageError("--include-cells applies to JSON output")
    angle = None
    if args.angle is not None:
        angle = tuple(_angle(args, v) for v in args.angle)
    grid = scanner.GridSpec(
        check=args.check,
        alpha_range=tuple(args.alpha) if args.alpha else None,
        n_list=tuple(args.n),
        angle_range=angle,
        x_range=tuple(args.x) if args.x else None,
        t_range=tuple(args.t_range) if args.t_range else None,
        near_violation_threshold=args.near_threshold,
        violation_tolerance=args.violation_tol,
        beta=args.beta,
        variant=args.variant,
    )
    threads = _threads(args)
    report = scanner.scan(grid, _qspec(args), threads=threads)
    scanner.emit(report, args.format, args.out, include_cells=args.include_cells)
    return EXIT_VIOLATION if report.failed else EXIT_OK


COMMANDS = {
    "coeffs": _cmd_coeffs,
    "margin": _cmd_margin,
    "phi": _cmd_phi,
    "lemmas": _cmd_lemmas,
    "theorem3": _cmd_theorem3,
    "conjecture": _cmd_conjecture,
    "scan": _cmd_scan,
    "constants": _cmd_constants,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, UnknownCheck) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrannanError as exc:
        # numerical failure at a single point: nothing was verified
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VIOLATION

run = main
