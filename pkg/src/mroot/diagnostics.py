"""Post-hoc convergence diagnostics computed from iteration traces."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Sequence, Union

from .solvers import IterationTrace

__all__ = [
    "OrderSequence",
    "convergence_orders",
    "multiplicity_history",
    "error_sequence",
    "step_series",
    "noise_floor",
]

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class OrderSequence:
    root_used: float
    entries: list[tuple[int, float]] = field(default_factory=list)

    @property
    def ks(self) -> list[int]:
        return [k for k, _ in self.entries]

    @property
    def values(self) -> list[float]:
        return [q for _, q in self.entries]

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def noise_floor(c: float) -> float:
    """Errors at or below this are rounding noise around ``c``."""
    return 100.0 * sys.float_info.epsilon * max(1.0, abs(c))


def _iterates(trace: Union[IterationTrace, Sequence[float]]) -> list[float]:
    if isinstance(trace, IterationTrace):
        return trace.xs
    return [float(x) for x in trace]


def convergence_orders(
    trace: Union[IterationTrace, Sequence[float]], c: float, floor: float = 0.0
) -> OrderSequence:
    """Empirical orders ``q_k = log|x_k - c| / log|x_{k-1} - c|``.

    ``q_k`` is kept only when both errors lie strictly between ``floor`` and 1
    so the logarithms share a sign.  The default keeps every nonzero error;
    pass ``noise_floor(c)`` to also drop errors at rounding level.
    """
    if not math.isfinite(c):
        raise ValueError("root must be finite")
    xs = _iterates(trace)
    entries = []
    for k in range(1, len(xs)):
        e_prev = abs(xs[k - 1] - c)
        e_cur = abs(xs[k] - c)
        if floor < e_prev < 1.0 and floor < e_cur < 1.0:
            entries.append((k, math.log(e_cur) / math.log(e_prev)))
    return OrderSequence(c, entries)


def multiplicity_history(trace: IterationTrace) -> list[tuple[int, float]]:
    """Multiplicity factors ``(k, p)`` applied by the update that produced ``x_k``."""
    return [(r.k, r.p) for r in trace.records if r.p is not None]


def error_sequence(trace: Union[IterationTrace, Sequence[float]], c: float) -> list[tuple[int, float]]:
    return [(k, abs(x - c)) for k, x in enumerate(_iterates(trace))]


def step_series(trace: IterationTrace, limit: int | None = 30) -> list[tuple[int, float]]:
    """``(k, |x_k - x_{k-1}|)`` for k = 1, 2, ... truncated to ``limit`` entries."""
    steps = [(r.k, r.step) for r in trace.records[1:]]
    return steps if limit is None else steps[:limit]
