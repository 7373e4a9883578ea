"""Scalar rootfinding with Newton-Anderson acceleration for multiple roots."""

__version__ = "0.1.0"

from .expr import Jet2, eval_jet, parse, to_string
from .solvers import IterationTrace, Method, Problem, SolverConfig, Status, run

__all__ = [
    "Jet2",
    "eval_jet",
    "parse",
    "to_string",
    "IterationTrace",
    "Method",
    "Problem",
    "SolverConfig",
    "Status",
    "run",
]
