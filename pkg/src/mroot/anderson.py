"""Depth-m Anderson acceleration of the vector Newton iteration.

Given the Newton update ``w_{k+1} = -J(x_k)^{-1} f(x_k)``, each step forms

    E_k = [x_k - x_{k-1}, ..., x_{k-m_k+1} - x_{k-m_k}]
    F_k = [w_{k+1} - w_k, ..., w_{k-m_k+2} - w_{k-m_k+1}]

with ``m_k = min(k, m)``, solves ``gamma = argmin ||w_{k+1} - F_k gamma||_2``
and sets ``x_{k+1} = x_k + w_{k+1} - (E_k + F_k) gamma``.  No damping.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .expr import Expr, eval_jet
from .linalg import SingularMatrixError, lu_factor, lu_solve, qr_least_squares

__all__ = [
    "VectorProblem",
    "AndersonState",
    "AndersonTrace",
    "least_squares_gamma",
    "newton_direction",
    "anderson_iterate",
    "monomial_system",
    "scalar_problem",
]


@dataclass(frozen=True)
class VectorProblem:
    f: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    name: str = ""


def monomial_system(A, b, exponents) -> VectorProblem:
    """``f_i(x) = ((A x - b)_i)^{p_i}`` with its analytic Jacobian."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    p = np.asarray(exponents, dtype=float)

    def f(x):
        return (A @ x - b) ** p

    def jac(x):
        r = A @ x - b
        return (p * r ** (p - 1.0))[:, None] * A

    return VectorProblem(f, jac, f"monomial{tuple(exponents)}")


def scalar_problem(e: Expr) -> VectorProblem:
    """Wrap a scalar expression as a 1x1 system."""

    def f(x):
        return np.array([eval_jet(e, float(x[0])).value])

    def jac(x):
        return np.array([[eval_jet(e, float(x[0])).d1]])

    return VectorProblem(f, jac, "scalar")


def newton_direction(problem: VectorProblem, x: np.ndarray) -> np.ndarray:
    fx = problem.f(x)
    if not np.any(fx):
        return np.zeros_like(x)
    return -lu_solve(lu_factor(problem.jacobian(x)), fx)


def least_squares_gamma(w_next, F, rcond: float = 1e-12) -> np.ndarray:
    """Euclidean least-squares coefficients of ``w_next`` on the columns of F.

    Trailing dependent columns get zero coefficients (see
    :func:`mroot.linalg.qr_least_squares`).
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    gamma, _ = qr_least_squares(F, w_next, rcond)
    return gamma


@dataclass
class AndersonState:
    m: int
    x: np.ndarray
    k: int = 0
    x_history: deque = field(init=False)
    w_history: deque = field(init=False)

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("depth m must be >= 0")
        self.x_history = deque([self.x], maxlen=self.m + 1)
        self.w_history = deque(maxlen=self.m + 1)

    @property
    def m_k(self) -> int:
        return min(self.k, self.m)

    def push(self, w: np.ndarray) -> None:
        """Record ``w_{k+1}``, the update computed at the current iterate."""
        self.w_history.append(w)

    def E(self) -> np.ndarray:
        xs = list(self.x_history)
        cols = [xs[-1 - j] - xs[-2 - j] for j in range(self.m_k)]
        return np.column_stack(cols) if cols else np.zeros((len(self.x), 0))

    def F(self) -> np.ndarray:
        ws = list(self.w_history)
        cols = [ws[-1 - j] - ws[-2 - j] for j in range(self.m_k)]
        return np.column_stack(cols) if cols else np.zeros((len(self.x), 0))

    def advance(self, x_next: np.ndarray) -> None:
        self.x = x_next
        self.x_history.append(x_next)
        self.k += 1


@dataclass
class AndersonTrace:
    m: int
    iterates: list[np.ndarray] = field(default_factory=list)
    gammas: list[Optional[np.ndarray]] = field(default_factory=list)
    events: list[tuple[int, str]] = field(default_factory=list)
    status: str = "max_iter_reached"

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    @property
    def final_x(self) -> np.ndarray:
        return self.iterates[-1]


def anderson_iterate(
    problem: VectorProblem,
    x0,
    m: int = 1,
    tol: float = 1e-10,
    max_iter: int = 100,
    rcond: float = 1e-12,
    scalar_fast_path: bool = True,
) -> AndersonTrace:
    """Anderson-accelerated Newton iteration of depth ``m``.

    Stops when ``max |x_{k+1} - x_k| < tol``.  With ``n = 1`` and ``m_k = 1``
    the least-squares problem has the closed form
    ``gamma = w_{k+1} / (w_{k+1} - w_k)`` and, when ``scalar_fast_path`` is
    set, the update is evaluated in the same operation order as
    :func:`mroot.solvers.newton_anderson_step`.
    """
    state = AndersonState(m, np.array(x0, dtype=float).reshape(-1))
    trace = AndersonTrace(m, [state.x.copy()])
    n = state.x.size
    for _ in range(max_iter):
        x = state.x
        try:
            w = newton_direction(problem, x)
        except SingularMatrixError as exc:
            trace.status = "singular_jacobian"
            trace.events.append((state.k, str(exc)))
            return trace
        state.push(w)
        mk = state.m_k
        gamma = None
        if mk == 0:
            x_next = x + w
        elif n == 1 and mk == 1 and scalar_fast_path:
            x_prev = state.x_history[-2]
            w_prev = state.w_history[-2]
            denom = w_prev[0] - w[0]
            if denom == 0.0:
                trace.events.append((state.k, "newton_fallback"))
                x_next = x + w
            else:
                p = (x[0] - x_prev[0]) / denom
                x_next = np.array([x[0] + p * w[0]])
                gamma = np.array([w[0] / (w[0] - w_prev[0])])
        else:
            F = state.F()
            gamma, rank = qr_least_squares(F, w, rcond)
            if rank < mk:
                trace.events.append((state.k, f"truncated F to rank {rank} of {mk}"))
            x_next = x + w - (state.E() + F) @ gamma
        trace.gammas.append(gamma)
        if not np.all(np.isfinite(x_next)):
            trace.status = "diverged_nonfinite"
            return trace
        trace.iterates.append(x_next.copy())
        step = float(np.max(np.abs(x_next - x)))
        state.advance(x_next)
        if step < tol:
            trace.status = "converged"
            return trace
    return trace
