"""Fixed-step explicit integration of scalar first-order IVPs.

The grid is never accumulated: the abscissa of step k is always
x0 + k*h, recomputed from the integers, so a trajectory's x column is
reproducible to the last bit regardless of how far it runs.  Solutions
that leave the finite doubles terminate cleanly instead of propagating
infinities; the trajectory records why it stopped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from ._fmt import format_float
from .expr import EvalError, Expression, compile_scalar, evaluate, free_variables

__all__ = [
    "OVERFLOW_GUARD",
    "IVP",
    "TrajectoryPoint",
    "Trajectory",
    "VariabilityRow",
    "euler_step",
    "rk4_step",
    "integrate_euler",
    "integrate_rk4",
    "variability_table",
    "trajectory_csv",
    "variability_csv",
]

# |y| at or past this magnitude counts as numerical escape; well clear
# of both every threshold the blow-up diagnostics use and the 1.8e308
# double ceiling, so the guard fires before arithmetic can overflow.
OVERFLOW_GUARD = 1e300


class TrajectoryPoint(NamedTuple):
    k: int
    x: float
    y: float


@dataclass(frozen=True)
class IVP:
    """y' = f(x, y), y(x0) = y0, with f given as an expression tree."""

    rhs: Expression
    x0: float
    y0: float

    def __post_init__(self):
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "y0", float(self.y0))
        if not (math.isfinite(self.x0) and math.isfinite(self.y0)):
            raise ValueError("initial condition must be finite")
        extra = sorted(free_variables(self.rhs) - {"x", "y"})
        if extra:
            raise ValueError(f"right-hand side uses variables other than x and y: {', '.join(extra)}")


@dataclass(frozen=True)
class Trajectory:
    h: float
    points: tuple[TrajectoryPoint, ...]
    terminated_early: bool = False
    termination_reason: str | None = None

    @property
    def final(self) -> TrajectoryPoint:
        return self.points[-1]


class VariabilityRow(NamedTuple):
    h: float
    y_at_target: float | None
    escaped: bool


def _check_step(h: float) -> float:
    h = float(h)
    if not math.isfinite(h) or h <= 0.0:
        raise ValueError(f"step size must be positive and finite, got {h!r}")
    return h


def _check_count(n_steps: int) -> int:
    if not isinstance(n_steps, int) or isinstance(n_steps, bool) or n_steps < 1:
        raise ValueError(f"number of steps must be a positive integer, got {n_steps!r}")
    return n_steps


def _point_evaluator(rhs: Expression) -> Callable[[float, float], float]:
    def f(x: float, y: float) -> float:
        return evaluate(rhs, {"x": x, "y": y})

    return f


def _euler_advance(f: Callable[[float, float], float], x: float, y: float, h: float) -> float:
    return y + f(x, y) * h


def _rk4_advance(f: Callable[[float, float], float], x: float, y: float, h: float) -> float:
    k1 = f(x, y)
    k2 = f(x + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(x + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(x + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(rhs: Expression, x: float, y: float, h: float) -> float:
    """One forward-Euler step y + f(x, y)*h.

    Uses the same arithmetic, in the same order, as integrate_euler, so
    stepping manually reproduces a trajectory bit for bit.
    """
    return _euler_advance(_point_evaluator(rhs), x, y, h)


def rk4_step(rhs: Expression, x: float, y: float, h: float) -> float:
    """One classical fourth-order Runge-Kutta step."""
    return _rk4_advance(_point_evaluator(rhs), x, y, h)


def _integrate(ivp: IVP, h: float, n_steps: int, advance) -> Trajectory:
    h = _check_step(h)
    n_steps = _check_count(n_steps)
    f = compile_scalar(ivp.rhs, ("x", "y"))
    points = [TrajectoryPoint(0, ivp.x0, ivp.y0)]
    y = ivp.y0
    for k in range(n_steps):
        x = ivp.x0 + k * h
        try:
            y = advance(f, x, y, h)
        except EvalError as err:
            return Trajectory(h, tuple(points), True, f"rhs evaluation failed at x={x!r}: {err}")
        x_next = ivp.x0 + (k + 1) * h
        if not math.isfinite(y) or abs(y) >= OVERFLOW_GUARD:
            if math.isfinite(y):
                points.append(TrajectoryPoint(k + 1, x_next, y))
            return Trajectory(
                h,
                tuple(points),
                True,
                f"overflow guard: |y| reached {OVERFLOW_GUARD:g} at x={x_next!r}",
            )
        points.append(TrajectoryPoint(k + 1, x_next, y))
    return Trajectory(h, tuple(points))


def integrate_euler(ivp: IVP, h: float, n_steps: int) -> Trajectory:
    """Forward Euler over the grid x0, x0+h, ..., x0+n_steps*h."""
    return _integrate(ivp, h, n_steps, _euler_advance)


def integrate_rk4(ivp: IVP, h: float, n_steps: int) -> Trajectory:
    """Classical RK4 over the same grid convention as integrate_euler."""
    return _integrate(ivp, h, n_steps, _rk4_advance)


def variability_table(ivp: IVP, x_target: float, step_sizes: Sequence[float]) -> list[VariabilityRow]:
    """Euler value at x_target for each step size, in the order given.

    Each h must divide the interval [x0, x_target] up to rounding.  Rows
    whose trajectory escapes to overflow before reaching the target get
    y_at_target None and escaped True.
    """
    x_target = float(x_target)
    if not math.isfinite(x_target) or x_target <= ivp.x0:
        raise ValueError(f"target abscissa must be finite and greater than x0={ivp.x0!r}")
    if not step_sizes:
        raise ValueError("at least one step size is required")
    span = x_target - ivp.x0
    rows: list[VariabilityRow] = []
    for h_raw in step_sizes:
        h = _check_step(h_raw)
        n = round(span / h)
        if n < 1 or abs(ivp.x0 + n * h - x_target) > 1e-9 * max(1.0, abs(span)):
            raise ValueError(f"step size {h!r} does not divide the interval [{ivp.x0!r}, {x_target!r}]")
        trajectory = integrate_euler(ivp, h, n)
        if trajectory.final.k == n:
            rows.append(VariabilityRow(h, trajectory.final.y, False))
        else:
            rows.append(VariabilityRow(h, None, True))
    return rows


def trajectory_csv(trajectory: Trajectory, round_to: int | None = None) -> str:
    lines = ["n,x_n,y_n"]
    for p in trajectory.points:
        lines.append(f"{p.k},{format_float(p.x, round_to)},{format_float(p.y, round_to)}")
    return "\n".join(lines) + "\n"


def variability_csv(rows: Sequence[VariabilityRow], round_to: int | None = None) -> str:
    lines = ["h,y_at_target,escaped"]
    for row in rows:
        y = "" if row.y_at_target is None else format_float(row.y_at_target, round_to)
        lines.append(f"{format_float(row.h, round_to)},{y},{'true' if row.escaped else 'false'}")
    return "\n".join(lines) + "\n"
