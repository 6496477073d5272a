"""The averaging recurrence x_{n+2} = (x_{n+1} + x_n) / 2.

Each term is the mean of the previous two, so the sequence zigzags
inside an interval that halves at every step.  The characteristic roots
are 1 and -1/2, giving the closed form

    x_n = (a + 2b)/3 + (2/3)(a - b)(-1/2)^n

and the limit (a + 2b)/3: the landing point splits the initial gap in
the ratio 2:1, it is not the midpoint of a and b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ._fmt import format_float

__all__ = [
    "RecurrenceInstance",
    "iterate_recurrence",
    "closed_form",
    "detect_limit",
    "sequence_csv",
]


@dataclass(frozen=True)
class RecurrenceInstance:
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("seed values must be finite")


def _check_index(n: int) -> int:
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError(f"index must be a non-negative integer, got {n!r}")
    return n


def iterate_recurrence(instance: RecurrenceInstance, n: int) -> list[float]:
    """The terms x_0, ..., x_n inclusive."""
    n = _check_index(n)
    if n == 0:
        return [instance.a]
    values = [instance.a, instance.b]
    for _ in range(n - 1):
        values.append((values[-1] + values[-2]) / 2.0)
    return values


def closed_form(instance: RecurrenceInstance, n: int) -> float:
    """x_n straight from the characteristic roots 1 and -1/2."""
    n = _check_index(n)
    limit = (instance.a + 2.0 * instance.b) / 3.0
    return limit + (2.0 / 3.0) * (instance.a - instance.b) * (-0.5) ** n


def detect_limit(
    sequence: Sequence[float],
    tol: float,
    min_run: int = 5,
) -> tuple[float, int] | None:
    """Numerical limit of a sequence tail, if one has settled.

    Finds the earliest index from which every later consecutive
    difference stays below tol; at least `min_run` sub-tol differences
    are required before the tail counts as settled.  Returns (last
    value, settle index) or None.
    """
    tol = float(tol)
    if not math.isfinite(tol) or tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    if not isinstance(min_run, int) or isinstance(min_run, bool) or min_run < 1:
        raise ValueError(f"min_run must be a positive integer, got {min_run!r}")
    values = [float(v) for v in sequence]
    if len(values) < min_run + 1:
        return None
    settle = len(values) - 1
    while settle > 0 and abs(values[settle] - values[settle - 1]) < tol:
        settle -= 1
    if len(values) - 1 - settle < min_run:
        return None
    return values[-1], settle


def sequence_csv(
    instance: RecurrenceInstance,
    n: int,
    tol: float | None = None,
    round_to: int | None = None,
) -> str:
    """n,x_n rows; with a tolerance, trailing comments report the limit."""
    values = iterate_recurrence(instance, n)
    lines = ["n,x_n"]
    for i, v in enumerate(values):
        lines.append(f"{i},{format_float(v, round_to)}")
    if tol is not None:
        settled = detect_limit(values, tol)
        if settled is None:
            lines.append("# limit=unsettled")
        else:
            lines.append(f"# limit={format_float(settled[0], round_to)}")
            lines.append(f"# settled_at={settled[1]}")
    return "\n".join(lines) + "\n"
