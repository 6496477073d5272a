"""Two-variable limits at the origin, probed along parametrised paths.

A limit lim_{(x,y)->(0,0)} f(x, y) exists only if every way of
approaching the origin agrees.  The tools here make the standard
counterexamples mechanical: sample f along paths (x(t), y(t)) -> (0,0)
for a shrinking t schedule and compare the per-path limits; two paths
that settle on different values witness non-existence, while agreement
is reported as consistent but explicitly non-conclusive.

Two dense scans complement the path probes: a polar sweep bounding
max_{angle} |f| on shrinking circles, and a sign-change cell scan that
locates the zero set of an implicit curve F(x, y) = 0 away from the
origin (useful when an equation hides an isolated solution point).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from ._fmt import format_float
from .expr import (
    Binary,
    Call,
    EvalError,
    Expression,
    Literal,
    Unary,
    Variable,
    compile_array,
    compile_scalar,
    evaluate,
    free_variables,
    parse,
)

__all__ = [
    "DEFAULT_SCHEDULE",
    "DEFAULT_RADII",
    "CAUCHY_TOL",
    "DIVERGENCE_CAP",
    "AGREEMENT_TOL",
    "ANGULAR_CAP",
    "PathStatus",
    "LimitVerdict",
    "Trajectory2D",
    "LimitSample",
    "TrajectoryLimit",
    "LimitReport",
    "AngularScan",
    "trajectory_from_text",
    "line_trajectory",
    "level_curve_trajectory",
    "default_trajectories",
    "limit_along",
    "compare_trajectories",
    "angular_bound_scan",
    "implicit_zero_scan",
    "limit_report_json",
    "samples_csv",
    "polar_csv",
    "implicit_csv",
]

# Decades down to 1e-8, then one sub-1e-8 point.  The tail stops short
# of 1e-9 on purpose: on level curves of x*y/(x+y) the sum x + y is of
# order t^2/a while the coordinates are of order t, so evaluating f at
# t costs roughly |a|^2 * eps/t in absolute error (eps = 2^-52), which
# passes the 1e-6 Cauchy tolerance at 5e-9 but not at 1e-9.
DEFAULT_SCHEDULE: tuple[float, ...] = tuple(10.0**-k for k in range(1, 9)) + (5e-9,)
DEFAULT_RADII: tuple[float, ...] = tuple(10.0**-k for k in range(1, 7))
CAUCHY_TOL = 1e-6
DIVERGENCE_CAP = 1e12
AGREEMENT_TOL = 1e-4
ANGULAR_CAP = 1e6

_SCAN_CHUNK = 1_000_000


class PathStatus(str, Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    INCONCLUSIVE = "Inconclusive"


class LimitVerdict(str, Enum):
    DOES_NOT_EXIST = "DoesNotExist"
    CONSISTENT_VALUE = "ConsistentValue"
    INCONCLUSIVE = "Inconclusive"


def _check_f(f: Expression) -> None:
    extra = sorted(free_variables(f) - {"x", "y"})
    if extra:
        raise ValueError(f"f uses variables other than x and y: {', '.join(extra)}")


@dataclass(frozen=True)
class Trajectory2D:
    """A path t -> (x(t), y(t)) that approaches the origin as t -> 0+."""

    x_of_t: Expression
    y_of_t: Expression
    label: str

    def __post_init__(self):
        extra = sorted((free_variables(self.x_of_t) | free_variables(self.y_of_t)) - {"t"})
        if extra:
            raise ValueError(f"path uses variables other than t: {', '.join(extra)}")
        try:
            tail = self._norm(1e-6)
        except EvalError as err:
            raise ValueError(f"path {self.label!r} is not evaluable near t=0: {err}") from None
        references = []
        for probe in (1e-1, 1e-3):
            try:
                references.append(self._norm(probe))
            except EvalError:
                # a pole away from the origin (level curves with small a
                # have one at t = a) does not disqualify the path
                continue
        # shrinking alone is not enough; a path like x = t+1 shrinks
        # toward norm 1 without ever nearing the origin
        if tail >= 1e-2 or any(tail >= reference for reference in references):
            raise ValueError(f"path {self.label!r} does not approach the origin as t shrinks")

    def _norm(self, t: float) -> float:
        x = evaluate(self.x_of_t, {"t": t})
        y = evaluate(self.y_of_t, {"t": t})
        return math.hypot(x, y)


class LimitSample(NamedTuple):
    t: float
    x: float | None
    y: float | None
    f: float | None


@dataclass(frozen=True)
class TrajectoryLimit:
    label: str
    status: PathStatus
    value: float | None
    samples: tuple[LimitSample, ...]
    notes: tuple[str, ...]


@dataclass(frozen=True)
class LimitReport:
    verdict: LimitVerdict
    value: float | None
    witnesses: tuple[tuple[str, float], tuple[str, float]] | None
    note: str
    paths: tuple[TrajectoryLimit, ...]


class AngularScan(NamedTuple):
    rows: tuple[tuple[float, float], ...]  # (r, max |f| on the circle)
    bounded: bool
    n_angles: int
    cap: float


def _number(value: float) -> Expression:
    # negative literals have no parse form, so wrap them in negation
    if value < 0 or math.copysign(1.0, value) < 0:
        return Unary(Literal(-value))
    return Literal(float(value))


def trajectory_from_text(x_text: str, y_text: str, label: str | None = None) -> Trajectory2D:
    return Trajectory2D(parse(x_text), parse(y_text), label or f"x={x_text}, y={y_text}")


def line_trajectory(slope: float) -> Trajectory2D:
    """The straight path x = t, y = slope*t."""
    slope = float(slope)
    if slope == 1.0:
        label = "y=x"
    elif slope == -1.0:
        label = "y=-x"
    else:
        label = f"y={slope:g}x"
    return Trajectory2D(Variable("t"), Binary("*", _number(slope), Variable("t")), label)


def level_curve_trajectory(a: float) -> Trajectory2D:
    """The curve on which x*y/(x + y) is identically a: x = t, y = a*t/(t - a).

    Solving x*y = a*(x + y) for y gives y = a*x/(x - a); substituting
    back shows f equals a at every point of the curve, yet the curve
    passes through the origin for every nonzero a.
    """
    a = float(a)
    if a == 0.0 or not math.isfinite(a):
        raise ValueError(f"level value must be nonzero and finite, got {a!r}")
    t = Variable("t")
    y = Binary("/", Binary("*", _number(a), t), Binary("-", t, _number(a)))
    return Trajectory2D(t, y, f"level curve a={a:g}")


def default_trajectories() -> list[Trajectory2D]:
    """Axes, both diagonals, a parabola and a square-root path."""
    t = Variable("t")
    return [
        line_trajectory(1.0),
        line_trajectory(-1.0),
        Trajectory2D(t, Binary("^", t, Literal(2.0)), "y=x^2"),
        Trajectory2D(t, Call("sqrt", t), "y=sqrt(t)"),
        Trajectory2D(t, Literal(0.0), "y=0"),
        Trajectory2D(Literal(0.0), t, "x=0"),
    ]


def _check_schedule(schedule: Sequence[float]) -> tuple[float, ...]:
    ts = tuple(float(t) for t in schedule)
    if len(ts) < 4:
        raise ValueError("schedule needs at least 4 points")
    for t in ts:
        if not math.isfinite(t) or t <= 0.0:
            raise ValueError(f"schedule values must be positive, got {t!r}")
    for a, b in zip(ts, ts[1:]):
        if b >= a:
            raise ValueError("schedule must decrease strictly")
    if ts[-1] >= 1e-8:
        raise ValueError(f"schedule must end below 1e-8, ends at {ts[-1]!r}")
    return ts


def limit_along(
    f: Expression,
    trajectory: Trajectory2D,
    schedule: Sequence[float] = DEFAULT_SCHEDULE,
) -> TrajectoryLimit:
    """Sample f along the path for shrinking t and judge the tail.

    Converged needs the last two successive differences below 1e-6;
    |f| past 1e12 at the finest t is Diverged; anything else (including
    paths that dodge the domain of f) is Inconclusive.  Samples where f
    or the path is undefined are skipped and noted, not fatal.
    """
    _check_f(f)
    ts = _check_schedule(schedule)
    fn = compile_scalar(f, ("x", "y"))
    x_of = compile_scalar(trajectory.x_of_t, ("t",))
    y_of = compile_scalar(trajectory.y_of_t, ("t",))
    samples: list[LimitSample] = []
    notes: list[str] = []
    values: list[float] = []
    for t in ts:
        try:
            x = x_of(t)
            y = y_of(t)
        except EvalError as err:
            samples.append(LimitSample(t, None, None, None))
            notes.append(f"t={t:g}: path undefined ({err})")
            continue
        try:
            value = fn(x, y)
        except EvalError as err:
            samples.append(LimitSample(t, x, y, None))
            notes.append(f"t={t:g}: f undefined ({err})")
            continue
        samples.append(LimitSample(t, x, y, value))
        values.append(value)

    if len(values) < 3:
        notes.append("fewer than 3 valid samples; no tail to judge")
        status, value = PathStatus.INCONCLUSIVE, None
    elif abs(values[-1]) > DIVERGENCE_CAP:
        notes.append(f"|f| reached {abs(values[-1]):.3g} at the finest t")
        status, value = PathStatus.DIVERGED, None
    else:
        diffs = [abs(b - a) for a, b in zip(values, values[1:])]
        if diffs[-1] < CAUCHY_TOL and diffs[-2] < CAUCHY_TOL:
            status, value = PathStatus.CONVERGED, values[-1]
        else:
            notes.append("samples are not Cauchy at the finest scales")
            status, value = PathStatus.INCONCLUSIVE, None
    return TrajectoryLimit(trajectory.label, status, value, tuple(samples), tuple(notes))


def compare_trajectories(
    f: Expression,
    trajectories: Sequence[Trajectory2D],
    schedule: Sequence[float] = DEFAULT_SCHEDULE,
) -> LimitReport:
    """Race the paths against each other.

    Two converged paths whose limits differ by more than 1e-4 witness
    DoesNotExist.  If every path converges and all limits agree, the
    verdict is ConsistentValue, which deliberately stops short of
    claiming the limit exists.  Everything else is Inconclusive.
    """
    if len(trajectories) < 2:
        raise ValueError("need at least two paths to compare")
    labels = [tr.label for tr in trajectories]
    if len(set(labels)) != len(labels):
        raise ValueError("path labels must be unique")
    results = tuple(limit_along(f, tr, schedule) for tr in trajectories)
    converged = [(r.label, r.value) for r in results if r.status is PathStatus.CONVERGED]

    if len(converged) >= 2:
        low = min(converged, key=lambda item: item[1])
        high = max(converged, key=lambda item: item[1])
        if high[1] - low[1] > AGREEMENT_TOL:
            return LimitReport(
                verdict=LimitVerdict.DOES_NOT_EXIST,
                value=None,
                witnesses=(low, high),
                note=(
                    f"paths {low[0]!r} and {high[0]!r} settle on limits "
                    f"{low[1]:.6g} and {high[1]:.6g}"
                ),
                paths=results,
            )
    if len(converged) == len(results):
        value = sum(v for _, v in converged) / len(converged)
        return LimitReport(
            verdict=LimitVerdict.CONSISTENT_VALUE,
            value=value,
            witnesses=None,
            note=(
                f"all {len(results)} paths agree within {AGREEMENT_TOL:g}; "
                "path agreement does not prove the limit exists"
            ),
            paths=results,
        )
    return LimitReport(
        verdict=LimitVerdict.INCONCLUSIVE,
        value=None,
        witnesses=None,
        note=f"{len(converged)} of {len(results)} paths converged; the rest are not informative",
        paths=results,
    )


def angular_bound_scan(
    f: Expression,
    radii: Sequence[float] = DEFAULT_RADII,
    n_angles: int = 720,
    cap: float = ANGULAR_CAP,
) -> AngularScan:
    """Max of |f| over dense circles of shrinking radius.

    The grid of angles is offset by half a cell so the coordinate axes
    are never sampled exactly.  The scan is bounded when every circle
    has finite max and M(r)/r stays below the cap; a non-finite value
    anywhere (domain escape) counts as unbounded evidence.  Resolution
    matters: a pole hiding between grid angles needs n_angles on the
    order of the cap before the ratio test can see it.
    """
    _check_f(f)
    rs = tuple(float(r) for r in radii)
    if not rs:
        raise ValueError("at least one radius is required")
    for r in rs:
        if not math.isfinite(r) or r <= 0.0:
            raise ValueError(f"radii must be positive, got {r!r}")
    for a, b in zip(rs, rs[1:]):
        if b >= a:
            raise ValueError("radii must decrease strictly")
    if not isinstance(n_angles, int) or isinstance(n_angles, bool) or n_angles < 360:
        raise ValueError(f"n_angles must be an integer of at least 360, got {n_angles!r}")
    cap = float(cap)
    if not math.isfinite(cap) or cap <= 0.0:
        raise ValueError(f"cap must be positive and finite, got {cap!r}")

    fn = compile_array(f, ("x", "y"))
    cell = 2.0 * math.pi / n_angles
    rows: list[tuple[float, float]] = []
    bounded = True
    for r in rs:
        worst = 0.0
        for start in range(0, n_angles, _SCAN_CHUNK):
            stop = min(start + _SCAN_CHUNK, n_angles)
            angles = (np.arange(start, stop, dtype=float) + 0.5) * cell
            values = fn(r * np.cos(angles), r * np.sin(angles))
            chunk_worst = float(np.max(np.abs(values)))
            if not math.isfinite(chunk_worst):
                worst = math.inf
                break
            worst = max(worst, chunk_worst)
        rows.append((r, worst))
        if not math.isfinite(worst) or not worst / r < cap:
            bounded = False
    return AngularScan(tuple(rows), bounded, n_angles, cap)


def implicit_zero_scan(
    F: Expression,
    R: float,
    grid_n: int = 400,
    tiny: float = 1e-14,
) -> list[tuple[float, float]]:
    """Cells of a square lattice on [-R, R]^2 where F(x, y) = 0 shows up.

    A cell is flagged when its four corners are finite and either
    straddle a sign change or include a corner with |F| < tiny.  Cells
    containing the origin are excluded (the origin solves the classroom
    equations trivially; the question is what else does), as are cells
    whose centre falls outside the disk of radius R.  Returned cell
    centres are sorted by x then y.
    """
    _check_f(F)
    R = float(R)
    if not math.isfinite(R) or R <= 0.0:
        raise ValueError(f"R must be positive and finite, got {R!r}")
    if not isinstance(grid_n, int) or isinstance(grid_n, bool) or grid_n < 100:
        raise ValueError(f"grid_n must be an integer of at least 100, got {grid_n!r}")

    xs = np.linspace(-R, R, grid_n)
    grid_x, grid_y = np.meshgrid(xs, xs, indexing="ij")
    values = compile_array(F, ("x", "y"))(grid_x, grid_y)

    corners = (values[:-1, :-1], values[1:, :-1], values[:-1, 1:], values[1:, 1:])
    finite = np.logical_and.reduce([np.isfinite(c) for c in corners])
    lowest = np.minimum.reduce(corners)
    highest = np.maximum.reduce(corners)
    near_zero = np.logical_or.reduce([np.abs(c) < tiny for c in corners])
    flagged = finite & (((lowest < 0.0) & (highest > 0.0)) | near_zero)

    spans_zero = (xs[:-1] <= 0.0) & (xs[1:] >= 0.0)
    flagged &= ~(spans_zero[:, None] & spans_zero[None, :])

    centres = 0.5 * (xs[:-1] + xs[1:])
    in_disk = (centres[:, None] ** 2 + centres[None, :] ** 2) <= R * R
    flagged &= in_disk

    return [(float(centres[i]), float(centres[j])) for i, j in np.argwhere(flagged)]


# --- renderers --------------------------------------------------------------


def limit_report_json(report: LimitReport) -> str:
    payload = {
        "verdict": report.verdict.value,
        "value": report.value,
        "witnesses": None
        if report.witnesses is None
        else [{"label": label, "limit": value} for label, value in report.witnesses],
        "note": report.note,
        "paths": [
            {
                "label": p.label,
                "status": p.status.value,
                "value": p.value,
                "notes": list(p.notes),
            }
            for p in report.paths
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def samples_csv(report: LimitReport, round_to: int | None = None) -> str:
    """Raw samples, one commented block per path, each with a t,x,y,f table."""

    def cell(value: float | None) -> str:
        return "" if value is None else format_float(value, round_to)

    lines: list[str] = []
    for p in report.paths:
        lines.append(f"# trajectory: {p.label}")
        lines.append(f"# status: {p.status.value}")
        lines.append("t,x,y,f")
        for s in p.samples:
            lines.append(f"{format_float(s.t, round_to)},{cell(s.x)},{cell(s.y)},{cell(s.f)}")
    return "\n".join(lines) + "\n"


def polar_csv(scan: AngularScan, round_to: int | None = None) -> str:
    lines = [
        f"# bounded={'true' if scan.bounded else 'false'}",
        f"# n_angles={scan.n_angles}",
        "r,max_abs_f",
    ]
    for r, worst in scan.rows:
        lines.append(f"{format_float(r, round_to)},{format_float(worst, round_to)}")
    return "\n".join(lines) + "\n"


def implicit_csv(cells: Sequence[tuple[float, float]], round_to: int | None = None) -> str:
    lines = ["cell_x,cell_y"]
    for cx, cy in cells:
        lines.append(f"{format_float(cx, round_to)},{format_float(cy, round_to)}")
    return "\n".join(lines) + "\n"
