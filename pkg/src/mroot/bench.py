"""Built-in benchmark suites and their CSV / text reports."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .diagnostics import convergence_orders, noise_floor, step_series
from .expr import eval_jet, parse
from .solvers import IterationTrace, Method, Problem, SolverConfig, Status, run

__all__ = [
    "BenchCase",
    "BenchResult",
    "ManifestError",
    "SUITES",
    "get_suite",
    "run_case",
    "run_suite",
    "emit_csv",
    "write_csv",
    "read_results_csv",
    "format_table",
    "format_orders",
]

SUMMARY_HEADER = ["case", "method", "x0", "iterations", "status", "final_pk", "final_error"]
SERIES_HEADER = ["case", "method", "x0", "k", "step"]
SERIES_LENGTH = 30
WRONG_ROOT = "wrong_root"

TABLE_METHODS = (
    Method.MODIFIED_NEWTON,
    Method.NEWTON_ANDERSON,
    Method.ADAPTIVE_NEWTON,
    Method.NEWTON,
    Method.SECANT,
)


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class BenchCase:
    id: str
    expression: str
    known_root: float
    known_multiplicity: float
    x0: tuple[float, ...]
    methods: tuple[Method, ...] = TABLE_METHODS
    tol: float = 1e-10
    max_iter: int = 500
    # modified Newton on Example 2 from x0 = 0 walks off toward +inf
    max_abs_x: Optional[float] = 1e6
    verify_multiplicity: bool = True

    def problem(self) -> Problem:
        return Problem.from_text(self.expression, self.known_root, self.known_multiplicity)

    def validate(self) -> None:
        try:
            e = parse(self.expression)
        except ValueError as exc:
            raise ManifestError(f"{self.id}: {exc}") from exc
        if not self.verify_multiplicity:
            return
        # only f, f', f'' are available; check the orders below min(p, 3)
        jet = tuple(eval_jet(e, self.known_root))
        for j in range(min(math.ceil(self.known_multiplicity), 3)):
            if not abs(jet[j]) < 1e-6:
                raise ManifestError(
                    f"{self.id}: derivative {j} is {jet[j]!r} at the stated root {self.known_root!r}"
                )


@dataclass
class BenchResult:
    case: str
    method: Method
    x0: float
    status: str
    iterations: Optional[int]
    final_pk: Optional[float]
    final_x: float
    final_error: float
    steps: list[float] = field(default_factory=list)
    trace: Optional[IterationTrace] = field(default=None, repr=False, compare=False)

    @property
    def converged(self) -> bool:
        return self.status == Status.CONVERGED.value


def _quarteroni(q: int) -> BenchCase:
    return BenchCase(f"quarteroni-q{q}", f"(x^2-1)^{q}*log(x)", 1.0, q + 1.0, (0.8, 2.0, 10.0))


def _gaussian_power(p: int, x0=(0.0, 1.0), methods=TABLE_METHODS, case_id=None) -> BenchCase:
    return BenchCase(case_id or f"exp-p{p}", f"(x-2)^{p}*exp(-(x-2)^2/2)", 2.0, float(p), tuple(x0), tuple(methods))


def _orders_suite() -> list[BenchCase]:
    na = (Method.NEWTON_ANDERSON,)
    cases = [
        BenchCase(f"orders-q{q}", f"(x^2-1)^{q}*log(x)", 1.0, q + 1.0, (10.0,), na) for q in (2, 4, 6)
    ]
    cases += [_gaussian_power(p, (0.0,), na, f"orders-p{p}") for p in (6, 8, 10)]
    return cases


SUITES: dict[str, list[BenchCase]] = {
    "quarteroni-q2": [_quarteroni(2)],
    "quarteroni-q6": [_quarteroni(6)],
    "exp-p6": [_gaussian_power(6)],
    "orders": _orders_suite(),
}


def get_suite(name: str) -> list[BenchCase]:
    try:
        return SUITES[name]
    except KeyError:
        raise ManifestError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None


def run_case(case: BenchCase, method: Method, x0: float) -> BenchResult:
    config = SolverConfig(
        method=method, x0=x0, tol=case.tol, max_iter=case.max_iter, max_abs_x=case.max_abs_x
    )
    trace = run(case.problem(), config)
    c = case.known_root
    error = abs(trace.final_x - c)
    status = trace.status.value
    if trace.converged and not error <= 1e-6 * max(1.0, abs(c)):
        # f evaluated to exactly zero somewhere other than the known root
        status = WRONG_ROOT
    return BenchResult(
        case=case.id,
        method=method,
        x0=x0,
        status=status,
        iterations=trace.iterations if status == Status.CONVERGED.value else None,
        final_pk=trace.final_p if method in (Method.NEWTON_ANDERSON, Method.ADAPTIVE_NEWTON) else None,
        final_x=trace.final_x,
        final_error=error,
        steps=[s for _, s in step_series(trace, SERIES_LENGTH)],
        trace=trace,
    )


def run_suite(manifest: Sequence[BenchCase], workers: int = 1) -> list[BenchResult]:
    """Run every (case, method, x0) triple; output order follows the manifest."""
    for case in manifest:
        case.validate()
    jobs = [(case, method, x0) for case in manifest for x0 in case.x0 for method in case.methods]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda j: run_case(*j), jobs))
    return [run_case(*j) for j in jobs]


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _num(v: Optional[float]) -> str:
    return "" if v is None else format(v, ".17g")


def emit_csv(results: Iterable[BenchResult]) -> tuple[str, str]:
    """Return ``(summary_csv, step_series_csv)`` as text."""
    summary, series = io.StringIO(), io.StringIO()
    sw, tw = csv.writer(summary), csv.writer(series)
    sw.writerow(SUMMARY_HEADER)
    tw.writerow(SERIES_HEADER)
    for r in results:
        sw.writerow(
            [
                r.case,
                r.method.value,
                _num(r.x0),
                "" if r.iterations is None else r.iterations,
                r.status,
                _num(r.final_pk),
                _num(r.final_error),
            ]
        )
        for k, step in enumerate(r.steps, start=1):
            tw.writerow([r.case, r.method.value, _num(r.x0), k, _num(step)])
    return summary.getvalue(), series.getvalue()


def write_csv(results: Iterable[BenchResult], out_dir: str, name: str) -> tuple[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    summary, series = emit_csv(results)
    paths = (os.path.join(out_dir, f"{name}.csv"), os.path.join(out_dir, f"{name}_steps.csv"))
    for path, text in zip(paths, (summary, series)):
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return paths


def read_results_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    for row in rows:
        row["x0"] = float(row["x0"])
        row["iterations"] = int(row["iterations"]) if row["iterations"] else None
        row["final_pk"] = float(row["final_pk"]) if row["final_pk"] else None
        row["final_error"] = float(row["final_error"])
    return rows


_SHORT = {
    Method.MODIFIED_NEWTON: "modified N.",
    Method.NEWTON_ANDERSON: "N. Anderson",
    Method.ADAPTIVE_NEWTON: "adaptive N.",
    Method.NEWTON: "Newton",
    Method.SECANT: "secant",
    Method.HALLEY_LIKE: "halley-like",
}


def _cell(r: BenchResult) -> str:
    if r.iterations is None:
        return r.status
    if r.final_pk is not None:
        return f"{r.iterations} ({r.final_pk:.4f})"
    return str(r.iterations)


def format_table(results: Sequence[BenchResult]) -> str:
    """Aligned text grid per case: one row per x0, one column per method."""
    blocks = []
    for case_id in dict.fromkeys(r.case for r in results):
        rows = [r for r in results if r.case == case_id]
        methods = list(dict.fromkeys(r.method for r in rows))
        grid = [["x0"] + [_SHORT[m] for m in methods]]
        for x0 in dict.fromkeys(r.x0 for r in rows):
            by_method = {r.method: r for r in rows if r.x0 == x0}
            grid.append([f"{x0:g}"] + [_cell(by_method[m]) if m in by_method else "" for m in methods])
        widths = [max(len(row[i]) for row in grid) for i in range(len(grid[0]))]
        lines = [case_id]
        for row in grid:
            lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def format_orders(results: Sequence[BenchResult], manifest: Sequence[BenchCase]) -> str:
    """Rows of empirical orders q_k, one per result with a stored trace."""
    roots = {case.id: (case.known_root, case.expression) for case in manifest}
    rows = []
    for r in results:
        c, expr = roots[r.case]
        orders = convergence_orders(r.trace, c, noise_floor(c)) if r.trace is not None else None
        cells = " ".join(f"q{k}={q:.4f}" for k, q in (orders.entries if orders else []))
        rows.append((expr, f"{r.x0:g}", cells))
    w0 = max((len(a) for a, _, _ in rows), default=0)
    w1 = max((len(b) for _, b, _ in rows), default=0)
    return "\n".join(f"{a.ljust(w0)}  {b.rjust(w1)}  {c}" for a, b, c in rows)
