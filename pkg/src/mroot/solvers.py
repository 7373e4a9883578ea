"""Scalar rootfinding iterations driven by a common run loop.

Every method is expressed through the Newton update step
``w(x) = -f(x)/f'(x)`` where possible, so that traces from different
methods are directly comparable.  One step is one update of ``x``; the
stopping test ``|x_{k+1} - x_k| < tol`` is checked after every update and the
count of updates at that moment is the reported iteration count.  A run also
stops on landing exactly on a simple root (``f = 0``, ``f' != 0``).

An iterate where ``f`` is exactly zero yields a zero step for every method,
so a run that reaches a multiple root in floating point stops on the next
update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Union

from .expr import Expr, ExprDomainError, Jet2, eval_jet, parse

__all__ = [
    "Method",
    "Status",
    "AdaptiveGate",
    "Problem",
    "SolverConfig",
    "IterationRecord",
    "IterationTrace",
    "SolverError",
    "DerivativeZero",
    "StepDenominatorZero",
    "newton_update",
    "newton_step",
    "modified_newton_step",
    "newton_anderson_step",
    "secant_step",
    "halley_like_step",
    "adaptive_multiplicity",
    "run",
    "adaptive_newton_run",
    "secant_run",
]

# |w_{k+1} - w_k| below this is treated as an exact zero denominator
NA_DENOMINATOR_GUARD = 1e-300


class Method(str, Enum):
    NEWTON = "newton"
    MODIFIED_NEWTON = "modified_newton"
    NEWTON_ANDERSON = "newton_anderson"
    ADAPTIVE_NEWTON = "adaptive_newton"
    SECANT = "secant"
    HALLEY_LIKE = "halley_like"

    @classmethod
    def parse(cls, name: Union[str, "Method"]) -> "Method":
        if isinstance(name, Method):
            return name
        return cls(name.strip().lower().replace("-", "_"))


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_ITER_REACHED = "max_iter_reached"
    DERIVATIVE_ZERO = "derivative_zero"
    STEP_DENOMINATOR_ZERO = "step_denominator_zero"
    DOMAIN_ERROR = "domain_error"
    DIVERGED_NONFINITE = "diverged_nonfinite"
    DIVERGED = "diverged"


class AdaptiveGate(str, Enum):
    """When the adaptive method is allowed to refresh its multiplicity estimate.

    ``STABLE_RATIO``: the ratio ``r_k = |x_k - x_{k-1}| / |x_{k-1} - x_{k-2}|``
    moved by less than 1e-3 since the previous step and ``r_k > 1e-2``; the
    estimate never decreases.  ``RELATIVE``: ``r_k`` moved by less than 10%
    relative to ``r_{k-1}``.
    """

    STABLE_RATIO = "stable_ratio"
    RELATIVE = "relative"


class SolverError(ArithmeticError):
    status = Status.DOMAIN_ERROR


class DerivativeZero(SolverError):
    status = Status.DERIVATIVE_ZERO


class StepDenominatorZero(SolverError):
    status = Status.STEP_DENOMINATOR_ZERO


@dataclass(frozen=True)
class Problem:
    """A scalar function with optional known root data.

    ``known_root`` and ``known_multiplicity`` are read only by diagnostics
    and by modified Newton.
    """

    f: Union[Expr, Callable[[float], Jet2]]
    known_root: Optional[float] = None
    known_multiplicity: Optional[float] = None
    text: Optional[str] = None

    @classmethod
    def from_text(cls, text: str, known_root=None, known_multiplicity=None) -> "Problem":
        return cls(parse(text), known_root, known_multiplicity, text)

    def jet(self, x: float) -> Jet2:
        if callable(self.f):
            return self.f(x)
        return eval_jet(self.f, x)

    def __post_init__(self):
        if self.known_multiplicity is not None and not self.known_multiplicity >= 1:
            raise ValueError("known_multiplicity must be >= 1")


@dataclass(frozen=True)
class SolverConfig:
    method: Method = Method.NEWTON_ANDERSON
    x0: float = 0.0
    tol: float = 1e-10
    max_iter: int = 500
    secant_offset: float = 1e-3
    adaptive_gate: AdaptiveGate = AdaptiveGate.STABLE_RATIO
    # |x| beyond this bound stops the run with status DIVERGED
    max_abs_x: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "adaptive_gate", AdaptiveGate(self.adaptive_gate))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.secant_offset == 0:
            raise ValueError("secant_offset must be non-zero")
        if not math.isfinite(self.x0):
            raise ValueError("x0 must be finite")


@dataclass(frozen=True)
class IterationRecord:
    """State after the k-th update.

    ``w`` is the Newton step computed at the previous iterate (so ``w_k``),
    ``step`` is ``|x_k - x_{k-1}|`` and ``p`` is the multiplicity factor that
    was applied to produce ``x_k``.  All three are None at k = 0.
    """

    k: int
    x: float
    fx: float
    w: Optional[float] = None
    step: Optional[float] = None
    p: Optional[float] = None
    event: Optional[str] = None


@dataclass
class IterationTrace:
    method: Method
    records: list[IterationRecord] = field(default_factory=list)
    status: Status = Status.MAX_ITER_REACHED
    message: str = ""

    @property
    def iterations(self) -> int:
        """Number of updates performed."""
        return len(self.records) - 1

    @property
    def iterations_to_converge(self) -> Optional[int]:
        return self.iterations if self.status is Status.CONVERGED else None

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def xs(self) -> list[float]:
        return [r.x for r in self.records]

    @property
    def steps(self) -> list[float]:
        return [r.step for r in self.records[1:]]

    @property
    def final_x(self) -> float:
        return self.records[-1].x

    @property
    def final_p(self) -> Optional[float]:
        for r in reversed(self.records):
            if r.p is not None:
                return r.p
        return None

    @property
    def events(self) -> list[tuple[int, str]]:
        return [(r.k, r.event) for r in self.records if r.event]


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def newton_update(fjet: Jet2) -> float:
    """The Newton step ``w = -f/f'``.

    An exact zero of ``f`` gives a zero step, including at a multiple root
    where ``f'`` vanishes as well.
    """
    if fjet.value == 0.0:
        return 0.0
    if fjet.d1 == 0.0:
        raise DerivativeZero("f'(x) = 0 at a non-root")
    return -fjet.value / fjet.d1


def newton_step(fjet: Jet2, x: float) -> float:
    return x + newton_update(fjet)


def modified_newton_step(fjet: Jet2, x: float, p: float) -> float:
    return x + p * newton_update(fjet)


def newton_anderson_step(x_k: float, x_km1: float, w_kp1: float, w_k: float) -> tuple[float, float]:
    """Depth-one Anderson extrapolation of the Newton step.

    Returns ``(x_{k+1}, p_k)`` with ``p_k = (x_k - x_{k-1}) / (w_k - w_{k+1})``,
    the running multiplicity estimate, and ``x_{k+1} = x_k + p_k w_{k+1}``.
    """
    denom = w_k - w_kp1
    if abs(denom) < NA_DENOMINATOR_GUARD:
        raise StepDenominatorZero("w_{k+1} == w_k")
    p_k = (x_k - x_km1) / denom
    return x_k + p_k * w_kp1, p_k


def secant_step(x_k: float, x_km1: float, g_k: float, g_km1: float) -> float:
    """One secant update for the zero of g."""
    if g_k == 0.0:
        return x_k
    denom = g_k - g_km1
    if denom == 0.0:
        raise StepDenominatorZero("g(x_k) == g(x_{k-1})")
    return x_k - g_k * (x_k - x_km1) / denom


def halley_like_step(fjet: Jet2, x: float) -> float:
    """``x - f f' / (f'^2 - f f'')``, the second-derivative variant."""
    f, d1, d2 = fjet.value, fjet.d1, fjet.d2
    if f == 0.0:
        return x
    if d1 == 0.0:
        # the step would be zero away from a root
        raise DerivativeZero("f'(x) = 0 at a non-root")
    denom = d1 * d1 - f * d2
    if denom == 0.0:
        raise StepDenominatorZero("f'^2 - f f'' == 0")
    return x - (f * d1) / denom


def adaptive_multiplicity(x_k: float, x_km1: float, x_km2: float) -> float:
    """Multiplicity estimate ``(x_{k-1} - x_{k-2}) / (2 x_{k-1} - x_k - x_{k-2})``."""
    denom = 2.0 * x_km1 - x_k - x_km2
    if denom == 0.0:
        raise StepDenominatorZero("2 x_{k-1} - x_k - x_{k-2} == 0")
    return (x_km1 - x_km2) / denom


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------


class _Stop(Exception):
    def __init__(self, status: Status, message: str = ""):
        self.status = status
        self.message = message


class _Runner:
    """Per-method state machine.  ``advance`` returns (x_new, w, p, event)."""

    def __init__(self, problem: Problem, config: SolverConfig):
        self.problem = problem
        self.config = config
        self.xs: list[float] = []
        self.jets: list[Jet2] = []
        self.ws: list[float] = []
        self.p: Optional[float] = None
        self.ratios: list[float] = []
        self.prev_x: Optional[float] = None
        self.prev_f: Optional[float] = None

    def start(self, x0: float, jet0: Jet2) -> None:
        self.xs.append(x0)
        self.jets.append(jet0)
        method = self.config.method
        if method is Method.MODIFIED_NEWTON:
            if self.problem.known_multiplicity is None:
                raise ValueError("modified_newton requires problem.known_multiplicity")
            self.p = float(self.problem.known_multiplicity)
        elif method is Method.ADAPTIVE_NEWTON:
            self.p = 1.0
        elif method is Method.SECANT:
            xm1 = x0 - self.config.secant_offset
            self.prev_x = xm1
            self.prev_f = _checked_jet(self.problem, xm1).value

    def accept(self, x: float, jet: Jet2) -> None:
        self.xs.append(x)
        self.jets.append(jet)

    def advance(self):
        method = self.config.method
        x, jet = self.xs[-1], self.jets[-1]
        if method is Method.NEWTON:
            w = newton_update(jet)
            return x + w, w, None, None
        if method is Method.MODIFIED_NEWTON:
            w = newton_update(jet)
            return x + self.p * w, w, self.p, None
        if method is Method.NEWTON_ANDERSON:
            w = newton_update(jet)
            self.ws.append(w)
            if len(self.xs) == 1:
                return x + w, w, None, None
            try:
                x_new, p = newton_anderson_step(x, self.xs[-2], w, self.ws[-2])
            except StepDenominatorZero:
                return x + w, w, self.p, "newton_fallback"
            self.p = p
            return x_new, w, p, None
        if method is Method.ADAPTIVE_NEWTON:
            return self._advance_adaptive(x, jet)
        if method is Method.SECANT:
            x_new = secant_step(x, self.prev_x, jet.value, self.prev_f)
            self.prev_x, self.prev_f = x, jet.value
            return x_new, None, None, None
        if method is Method.HALLEY_LIKE:
            return halley_like_step(jet, x), None, None, None
        raise ValueError(f"unknown method {method!r}")

    def _advance_adaptive(self, x: float, jet: Jet2):
        event = None
        xs = self.xs
        if len(xs) >= 3:
            d_new = abs(xs[-1] - xs[-2])
            d_old = abs(xs[-2] - xs[-3])
            ratio = d_new / d_old if d_old != 0.0 else math.inf
            self.ratios.append(ratio)
            if len(self.ratios) >= 2 and self._gate_open():
                try:
                    estimate = adaptive_multiplicity(xs[-1], xs[-2], xs[-3])
                except StepDenominatorZero:
                    event = "p_held_zero_denominator"
                else:
                    if self.config.adaptive_gate is AdaptiveGate.STABLE_RATIO:
                        estimate = max(self.p, estimate)
                    self.p = estimate
        w = newton_update(jet)
        return x + self.p * w, w, self.p, event

    def _gate_open(self) -> bool:
        r_new, r_old = self.ratios[-1], self.ratios[-2]
        if not (math.isfinite(r_new) and math.isfinite(r_old)):
            return False
        if self.config.adaptive_gate is AdaptiveGate.STABLE_RATIO:
            return abs(r_new - r_old) < 1e-3 and r_new > 1e-2
        return abs(r_new - r_old) < 0.1 * abs(r_old)


def _checked_jet(problem: Problem, x: float) -> Jet2:
    try:
        jet = problem.jet(x)
    except ExprDomainError as exc:
        raise _Stop(Status.DOMAIN_ERROR, str(exc)) from exc
    if not all(math.isfinite(v) for v in jet):
        raise _Stop(Status.DIVERGED_NONFINITE, f"non-finite f, f' or f'' at x = {x!r}")
    return jet


def run(problem: Problem, config: SolverConfig) -> IterationTrace:
    """Iterate the configured method from ``config.x0`` until the step test passes."""
    trace = IterationTrace(config.method)
    runner = _Runner(problem, config)
    try:
        try:
            jet0 = _checked_jet(problem, config.x0)
        except _Stop:
            trace.records.append(IterationRecord(0, config.x0, math.nan))
            raise
        trace.records.append(IterationRecord(0, config.x0, jet0.value))
        runner.start(config.x0, jet0)
        for k in range(1, config.max_iter + 1):
            try:
                x_new, w, p, event = runner.advance()
            except SolverError as exc:
                raise _Stop(exc.status, str(exc)) from exc
            if not math.isfinite(x_new):
                raise _Stop(Status.DIVERGED_NONFINITE, f"non-finite iterate at k = {k}")
            step = abs(x_new - runner.xs[-1])
            converged = step < config.tol
            try:
                jet = _checked_jet(problem, x_new)
                fx, stop = jet.value, None
            except _Stop as s:
                fx, stop = math.nan, s
            else:
                if not converged and jet.value == 0.0 and jet.d1 != 0.0:
                    # exact simple root: the next step would be exactly zero
                    converged, event = True, event or "exact_root"
            trace.records.append(IterationRecord(k, x_new, fx, w, step, p, event))
            if converged:
                trace.status = Status.CONVERGED
                return trace
            if stop is not None:
                raise stop
            if config.max_abs_x is not None and abs(x_new) > config.max_abs_x:
                raise _Stop(Status.DIVERGED, f"|x| exceeded {config.max_abs_x:g}")
            runner.accept(x_new, jet)
        trace.status = Status.MAX_ITER_REACHED
    except _Stop as s:
        trace.status = s.status
        trace.message = s.message
    return trace


def adaptive_newton_run(problem: Problem, config: SolverConfig) -> IterationTrace:
    return run(problem, _with_method(config, Method.ADAPTIVE_NEWTON))


def secant_run(problem: Problem, config: SolverConfig) -> IterationTrace:
    return run(problem, _with_method(config, Method.SECANT))


def _with_method(config: SolverConfig, method: Method) -> SolverConfig:
    return replace(config, method=method)
