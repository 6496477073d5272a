"""Finite-time blow-up detection for y' = f(x, y) on a bounded interval.

A fixed-step method cannot see a pole: every grid point lands beside the
singular abscissa, the last tangent line simply steps across it, and the
computed values stay finite.  What does betray a pole is instability
under refinement: the abscissa where |y| first exceeds a huge threshold
keeps marching down as h halves, with the crossings forming a Cauchy
sequence.  A genuinely bounded solution is indifferent to h.

The detector runs that refinement with forward Euler as the primary
evidence and repeats it with RK4 as a cross-check; the two integrators
must agree on the qualitative verdict or the result is downgraded to
Inconclusive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

from .ode import IVP, Trajectory, integrate_euler, integrate_rk4

__all__ = [
    "DEFAULT_THRESHOLD",
    "DEFAULT_H0",
    "DEFAULT_LEVELS",
    "BlowupVerdict",
    "EvidenceRow",
    "BlowupReport",
    "threshold_crossing",
    "estimate_blowup",
    "report_json",
]

DEFAULT_THRESHOLD = 1e8
DEFAULT_H0 = 0.01
DEFAULT_LEVELS = 8


class BlowupVerdict(str, Enum):
    BLOWUP_DETECTED = "BlowupDetected"
    BOUNDED_ON_INTERVAL = "BoundedOnInterval"
    INCONCLUSIVE = "Inconclusive"


class EvidenceRow(NamedTuple):
    h: float
    crossing_x: float | None
    y_at_target: float | None


@dataclass(frozen=True)
class BlowupReport:
    verdict: BlowupVerdict
    x_estimate: float | None
    bracket: tuple[float, float] | None
    tolerance: float | None
    x_end: float | None
    max_abs_y: float | None
    reason: str | None
    evidence: tuple[EvidenceRow, ...]


class _LevelRun(NamedTuple):
    h: float
    crossing_x: float | None
    trajectory: Trajectory


def _grid_steps(x0: float, x_max: float, h: float) -> int:
    # largest n with x0 + n*h <= x_max, up to a hair of slop
    n = int(math.floor((x_max - x0) / h + 1e-9))
    if n < 1:
        raise ValueError(f"step size {h!r} does not fit in the interval [{x0!r}, {x_max!r}]")
    return n


def _crossing(trajectory: Trajectory, threshold: float) -> float | None:
    for p in trajectory.points:
        if abs(p.y) >= threshold:
            return p.x
    if trajectory.terminated_early:
        # the integrator stopped (overflow guard or a singular rhs);
        # either way the run escaped, so the terminating step counts
        return trajectory.final.x
    return None


def _check_common(ivp: IVP, x_max: float, threshold: float) -> tuple[float, float]:
    x_max = float(x_max)
    threshold = float(threshold)
    if not math.isfinite(x_max) or x_max <= ivp.x0:
        raise ValueError(f"x_max must be finite and greater than x0={ivp.x0!r}")
    if not math.isfinite(threshold) or threshold <= 0.0:
        raise ValueError(f"threshold must be positive and finite, got {threshold!r}")
    return x_max, threshold


def threshold_crossing(ivp: IVP, h: float, x_max: float, threshold: float) -> float | None:
    """Smallest grid abscissa where the Euler trajectory has |y| >= threshold.

    Returns None when the trajectory stays below the threshold all the
    way to x_max.  A run that terminates early (overflow guard, singular
    right-hand side) counts as crossing at its terminating step.
    """
    x_max, threshold = _check_common(ivp, x_max, threshold)
    trajectory = integrate_euler(ivp, h, _grid_steps(ivp.x0, x_max, h))
    return _crossing(trajectory, threshold)


def _run_levels(
    ivp: IVP,
    x_max: float,
    threshold: float,
    h0: float,
    levels: int,
    integrate: Callable[[IVP, float, int], Trajectory],
) -> list[_LevelRun]:
    runs = []
    for level in range(levels):
        h = h0 / (2.0**level)
        trajectory = integrate(ivp, h, _grid_steps(ivp.x0, x_max, h))
        runs.append(_LevelRun(h, _crossing(trajectory, threshold), trajectory))
    return runs


def _classify(runs: list[_LevelRun]) -> tuple[str, str | None, tuple[float, float] | None]:
    """Returns (kind, reason, bracket) with kind in detected/bounded/inconclusive."""
    crossings = [r.crossing_x for r in runs]
    steps = [r.h for r in runs]
    crossed = [c is not None for c in crossings]
    if not any(crossed):
        return "bounded", None, None
    if not all(crossed):
        hit = sum(crossed)
        return (
            "inconclusive",
            f"threshold crossed at {hit} of {len(runs)} refinement levels; evidence is mixed",
            None,
        )
    # all levels crossed: demand a Cauchy-decreasing crossing sequence.
    # Crossings are quantised to their grids, so each comparison gets one
    # fine-cell of slack (plus a little float noise allowance).
    for i in range(len(crossings) - 1):
        slack = steps[i + 1] + 1e-12 * max(1.0, abs(crossings[i]))
        if crossings[i + 1] > crossings[i] + slack:
            return (
                "inconclusive",
                "crossing abscissas do not decrease under refinement",
                None,
            )
    gaps = [max(crossings[i] - crossings[i + 1], 0.0) for i in range(len(crossings) - 1)]
    for i in range(len(gaps) - 1):
        slack = steps[i + 1] + 1e-12 * max(1.0, abs(crossings[i]))
        if gaps[i + 1] > gaps[i] + slack:
            return (
                "inconclusive",
                "crossing gaps fail to shrink under refinement",
                None,
            )
    last = crossings[-1]
    # The crossing error can shrink slower than the gap does (the lag
    # behind the true pole loses less than half per halving), so a
    # single-gap bracket can undershoot; doubling the radius covers any
    # per-level contraction down to 1/3, and the finest cell floors it.
    radius = 2.0 * max(gaps[-1], steps[-1])
    return "detected", None, (last - radius, last)


def estimate_blowup(
    ivp: IVP,
    x_max: float,
    threshold: float = DEFAULT_THRESHOLD,
    h0: float = DEFAULT_H0,
    levels: int = DEFAULT_LEVELS,
) -> BlowupReport:
    """Refinement study of threshold crossings on [x0, x_max].

    Runs threshold_crossing at h0, h0/2, ..., h0/2^(levels-1) with
    forward Euler, then repeats the study with RK4.  BlowupDetected
    requires every Euler level to cross with crossings Cauchy-decreasing
    and RK4 to agree qualitatively; BoundedOnInterval requires no level
    of either integrator to cross.  Everything else is Inconclusive.
    """
    x_max, threshold = _check_common(ivp, x_max, threshold)
    h0 = float(h0)
    if not math.isfinite(h0) or h0 <= 0.0:
        raise ValueError(f"h0 must be positive and finite, got {h0!r}")
    if not isinstance(levels, int) or isinstance(levels, bool) or levels < 3:
        raise ValueError(f"levels must be an integer of at least 3, got {levels!r}")

    euler_runs = _run_levels(ivp, x_max, threshold, h0, levels, integrate_euler)
    rk4_runs = _run_levels(ivp, x_max, threshold, h0, levels, integrate_rk4)
    evidence = tuple(
        EvidenceRow(r.h, r.crossing_x, None if r.crossing_x is not None else r.trajectory.final.y)
        for r in euler_runs
    )

    euler_kind, euler_reason, bracket = _classify(euler_runs)
    rk4_kind, rk4_reason, _ = _classify(rk4_runs)

    if euler_kind == "detected" and rk4_kind == "detected":
        last = euler_runs[-1].crossing_x
        assert bracket is not None and last is not None
        return BlowupReport(
            verdict=BlowupVerdict.BLOWUP_DETECTED,
            x_estimate=last,
            bracket=bracket,
            tolerance=bracket[1] - bracket[0],
            x_end=None,
            max_abs_y=None,
            reason=None,
            evidence=evidence,
        )
    if euler_kind == "bounded" and rk4_kind == "bounded":
        finest = euler_runs[-1].trajectory
        return BlowupReport(
            verdict=BlowupVerdict.BOUNDED_ON_INTERVAL,
            x_estimate=None,
            bracket=None,
            tolerance=None,
            x_end=finest.final.x,
            max_abs_y=max(abs(p.y) for p in finest.points),
            reason=None,
            evidence=evidence,
        )
    if euler_kind != rk4_kind:
        reason = f"integrators disagree: Euler refinement looks {euler_kind}, RK4 looks {rk4_kind}"
    else:
        reason = euler_reason or rk4_reason or "refinement evidence is mixed"
    return BlowupReport(
        verdict=BlowupVerdict.INCONCLUSIVE,
        x_estimate=None,
        bracket=None,
        tolerance=None,
        x_end=None,
        max_abs_y=None,
        reason=reason,
        evidence=evidence,
    )


def report_json(report: BlowupReport) -> str:
    payload = {
        "verdict": report.verdict.value,
        "x_estimate": report.x_estimate,
        "bracket": None if report.bracket is None else list(report.bracket),
        "tolerance": report.tolerance,
        "x_end": report.x_end,
        "max_abs_y": report.max_abs_y,
        "reason": report.reason,
        "evidence": [
            {"h": row.h, "crossing_x": row.crossing_x, "y_at_target": row.y_at_target}
            for row in report.evidence
        ],
    }
    return json.dumps(payload, indent=2) + "\n"
