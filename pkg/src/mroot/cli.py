"""Command-line front end.

    mroot solve --expr "(x^2-1)^2*log(x)" --method newton-anderson --x0 0.8
    mroot bench --suite quarteroni-q2 --out ./out
    mroot orders --suite orders
    mroot anderson --exponents 2,3 --depth 2
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .anderson import anderson_iterate, monomial_system
from .bench import ManifestError, format_orders, format_table, get_suite, run_suite, write_csv, SUITES
from .expr import ExprError, ExprSyntaxError, parse
from .solvers import Method, Problem, SolverConfig, run

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2

CLI_METHODS = [m.value.replace("_", "-") for m in Method]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _finite(text: str) -> float:
    v = float(text)
    if not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"{text!r} is not a finite number")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="mroot", description="Rootfinding for roots of unknown multiplicity.", formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one expression", formatter_class=fmt)
    s.add_argument("--expr", required=True, help="expression in x, e.g. '(x^2-1)^2*log(x)'")
    s.add_argument("--method", choices=CLI_METHODS, default="newton-anderson", help="iteration to run")
    s.add_argument("--x0", type=_finite, required=True, help="initial iterate")
    s.add_argument("--tol", type=_finite, default=1e-10, help="stop when |x_{k+1} - x_k| < tol")
    s.add_argument("--max-iter", type=_positive_int, default=500, help="update limit")
    s.add_argument("--multiplicity", type=_finite, default=None, help="known multiplicity (modified-newton)")
    s.add_argument("--secant-offset", type=_finite, default=1e-3, help="secant uses x_{-1} = x0 - offset")
    s.add_argument("--verbose", "-v", action="store_true", help="full-precision trace")

    b = sub.add_parser("bench", help="run a built-in benchmark suite", formatter_class=fmt)
    b.add_argument("--suite", required=True, choices=list(SUITES), help="built-in suite")
    b.add_argument("--out", default=os.environ.get("MROOT_OUT", "."), help="output directory (env MROOT_OUT)")
    b.add_argument("--workers", type=_positive_int, default=1, help="threads used to run cases")
    b.add_argument("--verbose", "-v", action="store_true", help="list written files")

    o = sub.add_parser("orders", help="print empirical convergence orders", formatter_class=fmt)
    o.add_argument("--suite", default="orders", choices=list(SUITES), help="built-in suite")

    a = sub.add_parser("anderson", help="depth-m Anderson on ((Ax-b)_i)^{p_i}", formatter_class=fmt)
    a.add_argument("--exponents", type=_int_list, default=[2, 3], help="comma-separated p_i")
    a.add_argument("--depth", "-m", type=int, default=2, help="Anderson depth m")
    a.add_argument("--tol", type=_finite, default=1e-10, help="stop when max |x_{k+1} - x_k| < tol")
    a.add_argument("--max-iter", type=_positive_int, default=50, help="update limit")
    a.add_argument("--seed", type=int, default=0, help="seed for A, b and x0 when n > 2")
    a.add_argument("--verbose", "-v", action="store_true", help="print iterates")
    return parser


def _fmt(v, digits: int) -> str:
    return "-" if v is None else f"{v:.{digits}g}"


def _cmd_solve(args) -> int:
    try:
        problem = Problem(parse(args.expr), known_multiplicity=args.multiplicity, text=args.expr)
    except ExprSyntaxError as exc:
        print(f"error: {exc}\n  {args.expr}\n  {' ' * exc.offset}^", file=sys.stderr)
        return EXIT_USAGE
    except (ExprError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    method = Method.parse(args.method)
    if method is Method.MODIFIED_NEWTON and args.multiplicity is None:
        print("error: modified-newton requires --multiplicity", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = SolverConfig(method, args.x0, args.tol, args.max_iter, args.secant_offset)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    trace = run(problem, config)

    digits = 15 if args.verbose else 6
    print(f"{'k':>4}  {'x_k':>{digits + 8}}  {'|step|':>{digits + 8}}  {'p_k':>10}")
    for r in trace.records:
        pk = "-" if r.p is None else f"{r.p:.4f}"
        line = f"{r.k:>4}  {_fmt(r.x, digits):>{digits + 8}}  {_fmt(r.step, digits):>{digits + 8}}  {pk:>10}"
        if args.verbose and r.event:
            line += f"  [{r.event}]"
        print(line)
    if trace.message:
        print(trace.message, file=sys.stderr)
    pk = "-" if trace.final_p is None else f"{trace.final_p:.4f}"
    print(f"{trace.status.value} {trace.iterations} {trace.final_x:.6g} {pk}")
    return EXIT_OK if trace.converged else EXIT_FAILURE


def _cmd_bench(args) -> int:
    try:
        manifest = get_suite(args.suite)
        results = run_suite(manifest, workers=args.workers)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    paths = write_csv(results, args.out, args.suite)
    print(format_table(results))
    if args.verbose:
        for path in paths:
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_orders(args) -> int:
    manifest = get_suite(args.suite)
    results = run_suite(manifest)
    print(format_orders(results, manifest))
    return EXIT_OK


def _cmd_anderson(args) -> int:
    p = args.exponents
    n = len(p)
    if n == 2:
        A, b, x0 = np.array([[2.0, 1.0], [1.0, 3.0]]), np.array([1.0, 2.0]), np.array([1.3, 0.2])
    else:
        rng = np.random.default_rng(args.seed)
        A = rng.standard_normal((n, n)) + n * np.eye(n)
        b = rng.standard_normal(n)
        x0 = np.linalg.solve(A, b) + 0.5 * rng.standard_normal(n)
    if args.depth < 0:
        print("error: depth must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    exact = np.linalg.solve(A, b)
    trace = anderson_iterate(monomial_system(A, b, p), x0, args.depth, args.tol, args.max_iter)
    for k, x in enumerate(trace.iterates):
        err = float(np.max(np.abs(x - exact)))
        print(f"{k:>4}  {err:.6e}" if not args.verbose else f"{k:>4}  {err:.15e}  {x}")
    print(f"{trace.status} {trace.iterations}")
    return EXIT_OK if trace.converged else EXIT_FAILURE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": _cmd_solve, "bench": _cmd_bench, "orders": _cmd_orders, "anderson": _cmd_anderson}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
