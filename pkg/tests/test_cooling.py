"""Three-point cooling fits and midpoint feasibility analysis.

A body cooling toward ambient T_M passes (T0, T1, T2) at times 0, t1,
2*t1.  Equal time spacing forces the geometric identity
(T1-T_M)^2 = (T0-T_M)(T2-T_M), which solves in closed form and exposes
"incorrect" reading triples: an implied ambient hotter than every
reading, or one below absolute zero.
"""

import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from illposed.cooling import (
    ABSOLUTE_ZERO_C,
    CoolingObservations,
    DiagnosticError,
    FeasibilityVerdict,
    bisect_root,
    feasible_midpoint_range,
    fit_json,
    fit_three_point,
    predict,
    sweep_csv,
    tm_of_midpoint,
)

SQRT_1200 = math.sqrt(1200.0)


def test_hot_ambient_contradiction():
    # (40, 36, 30) cools, yet the implied ambient is hotter than T0
    fit = fit_three_point(CoolingObservations(0.5, 40.0, 36.0, 30.0))
    assert fit.T_M == 48.0
    assert fit.k == math.log(1.5) / 0.5
    assert fit.k == 0.8109302162163288
    assert fit.verdict is FeasibilityVerdict.SIGN_CONTRADICTION


def test_feasible_triple_fits_exactly():
    obs = CoolingObservations(0.5, 40.0, 34.0, 30.0)
    fit = fit_three_point(obs)
    assert fit.T_M == 22.0
    assert fit.k == -0.8109302162163289
    assert fit.verdict is FeasibilityVerdict.FEASIBLE
    for t, want in ((0.0, 40.0), (0.5, 34.0), (1.0, 30.0)):
        assert predict(fit.T_M, fit.k, obs.T0, t) == want
    # long-time behavior settles on the ambient
    assert predict(fit.T_M, fit.k, obs.T0, 50.0) == 22.0


def test_colinear_triple_has_no_exponential():
    fit = fit_three_point(CoolingObservations(1.0, 40.0, 35.0, 30.0))
    assert fit.verdict is FeasibilityVerdict.COLINEAR_DEGENERATE
    assert fit.T_M is None
    assert fit.k is None


def test_non_monotone_data_is_rejected_first():
    fit = fit_three_point(CoolingObservations(1.0, 40.0, 42.0, 30.0))
    assert fit.verdict is FeasibilityVerdict.NON_MONOTONE_DATA
    fit = fit_three_point(CoolingObservations(1.0, 40.0, 40.0, 30.0))
    assert fit.verdict is FeasibilityVerdict.NON_MONOTONE_DATA


def test_near_colinear_triple_implies_subzero_ambient():
    fit = fit_three_point(CoolingObservations(0.5, 40.0, 34.99, 30.0))
    assert fit.T_M == -1215.0050000002495
    assert fit.T_M < ABSOLUTE_ZERO_C
    assert fit.verdict is FeasibilityVerdict.BELOW_ABSOLUTE_ZERO
    assert fit.k < 0


def test_observation_validation():
    with pytest.raises(ValueError):
        CoolingObservations(0.0, 40.0, 36.0, 30.0)
    with pytest.raises(ValueError):
        CoolingObservations(-1.0, 40.0, 36.0, 30.0)
    with pytest.raises(ValueError):
        CoolingObservations(1.0, math.nan, 36.0, 30.0)


# --- midpoint-ambient map and its pole --------------------------------------


def test_tm_of_midpoint_known_values():
    assert tm_of_midpoint(36.0, 40.0, 30.0) == 48.0
    assert tm_of_midpoint(34.0, 40.0, 30.0) == 22.0
    assert tm_of_midpoint(34.9, 40.0, 30.0) == -90.04999999999868
    assert tm_of_midpoint(35.0, 40.0, 30.0) is None


def test_tm_plunges_toward_the_pole_from_below():
    values = [tm_of_midpoint(c, 40.0, 30.0) for c in (34.9, 34.99, 34.999)]
    assert values[0] > values[1] > values[2]
    assert values[2] < -10000.0


def test_tm_is_hotter_than_t0_above_the_pole():
    for c in (35.1, 36.0, 39.0):
        assert tm_of_midpoint(c, 40.0, 30.0) > 40.0


# --- bisection ---------------------------------------------------------------


def test_bisection_finds_sqrt2():
    root, iterations = bisect_root(lambda x: x * x - 2.0, 0.0, 2.0)
    assert abs(root - math.sqrt(2.0)) < 1e-6
    assert iterations == 21
    assert iterations < 60


def test_bisection_requires_a_sign_change():
    with pytest.raises(DiagnosticError, match="no sign change"):
        bisect_root(lambda x: x * x + 1.0, 0.0, 2.0)


def test_bisection_accepts_an_endpoint_root():
    root, _ = bisect_root(lambda x: x, 0.0, 1.0)
    assert root == 0.0


def test_feasible_range_against_default_floor():
    lo, hi = feasible_midpoint_range(40.0, 30.0, ABSOLUTE_ZERO_C)
    assert lo == 30.0
    assert hi == 34.959432780742645
    assert abs(hi - 34.9594) < 1e-4


def test_feasible_range_with_zero_floor_matches_geometric_mean():
    # floor 0 forces T_M = 0, i.e. T1 = sqrt(T0*T2)
    _, hi = feasible_midpoint_range(40.0, 30.0, 0.0)
    assert abs(hi - SQRT_1200) < 1e-6


def test_feasible_range_rejects_floor_above_readings():
    with pytest.raises(DiagnosticError, match="not below the final reading"):
        feasible_midpoint_range(40.0, 30.0, 50.0)


def test_endpoint_of_feasible_range_is_actually_marginal():
    _, hi = feasible_midpoint_range(40.0, 30.0, ABSOLUTE_ZERO_C, tol=1e-9)
    ambient = tm_of_midpoint(hi, 40.0, 30.0)
    assert abs(ambient - ABSOLUTE_ZERO_C) < 1e-3


# --- property suites ----------------------------------------------------------


@given(
    st.floats(-50.0, 150.0),
    st.floats(0.01, 5.0),
    st.floats(0.05, 3.0),
    st.floats(5.0, 100.0),
)
@settings(max_examples=300)
def test_fit_recovers_model_parameters(T_M, k, t1, drop):
    # synthesize a genuine cooling run, then fit it back
    T0 = T_M + drop
    T1 = predict(T_M, -k, T0, t1)
    T2 = predict(T_M, -k, T0, 2.0 * t1)
    d = 2.0 * T1 - T0 - T2
    if abs(d) < 1e-6 or not T0 > T1 > T2:
        return
    fit = fit_three_point(CoolingObservations(t1, T0, T1, T2))
    assert fit.T_M == pytest.approx(T_M, rel=1e-6, abs=1e-6)
    assert fit.k == pytest.approx(-k, rel=1e-6, abs=1e-9)


def test_convexity_sign_dictates_the_verdict_branch():
    rng = random.Random(20260814)
    checked = 0
    while checked < 1500:
        T0 = rng.uniform(-20.0, 120.0)
        T1 = rng.uniform(-40.0, T0 - 1e-3)
        T2 = rng.uniform(-60.0, T1 - 1e-3)
        obs = CoolingObservations(rng.uniform(0.05, 4.0), T0, T1, T2)
        d = 2.0 * T1 - T0 - T2
        if d == 0.0:
            continue
        fit = fit_three_point(obs)
        if d > 0.0:
            assert fit.k > 0.0
            assert fit.T_M > obs.T0
            assert fit.verdict is FeasibilityVerdict.SIGN_CONTRADICTION
        else:
            assert fit.k < 0.0
            assert fit.T_M < obs.T2
            assert fit.verdict in (
                FeasibilityVerdict.FEASIBLE,
                FeasibilityVerdict.BELOW_ABSOLUTE_ZERO,
            )
        checked += 1


def test_residuals_vanish_for_any_fitted_triple():
    rng = random.Random(7)
    for _ in range(200):
        T0 = rng.uniform(0.0, 100.0)
        T1 = rng.uniform(-10.0, T0 - 0.1)
        T2 = rng.uniform(-20.0, T1 - 0.1)
        obs = CoolingObservations(rng.uniform(0.1, 2.0), T0, T1, T2)
        fit = fit_three_point(obs)
        if fit.T_M is None:
            continue
        if abs(2.0 * T1 - T0 - T2) < 0.05:
            continue  # near the pole the exponential is ill-conditioned
        for t, want in ((0.0, T0), (obs.t1, T1), (2.0 * obs.t1, T2)):
            assert predict(fit.T_M, fit.k, obs.T0, t) == pytest.approx(want, abs=1e-9)


# --- renderers ----------------------------------------------------------------


def test_fit_json_shape():
    obs = CoolingObservations(0.5, 40.0, 36.0, 30.0)
    data = json.loads(fit_json(fit_three_point(obs), obs))
    assert list(data) == ["T_M", "k", "verdict", "residuals"]
    assert data["T_M"] == 48.0
    assert data["verdict"] == "SignContradiction"
    assert data["residuals"] == [0.0, 0.0, 0.0]


def test_fit_json_degenerate_has_null_fields():
    obs = CoolingObservations(1.0, 40.0, 35.0, 30.0)
    data = json.loads(fit_json(fit_three_point(obs), obs))
    assert data["T_M"] is None
    assert data["k"] is None
    assert data["residuals"] is None


def test_sweep_csv_golden():
    text = sweep_csv(40.0, 30.0, 4, ABSOLUTE_ZERO_C)
    assert text == (
        "c,T_M,k,verdict\n"
        "31,29.875,-4.3944491546724391,Feasible\n"
        "32,29.333333333333332,-2.7725887222397807,Feasible\n"
        "33,27.75,-1.6945957207744073,Feasible\n"
        "34,22,-0.81093021621632888,Feasible\n"
    )
