"""Smooth ramp profile: frozen normalization and calculus identities.

The reference values below were computed once with adaptive quadrature
(scipy.integrate.quad on the bump and its antiderivative, abs tol 1e-14)
and are pinned so any regression in the Simpson tabulation shows up.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_probe import profiles

RAMP_NORM_REF = 0.007029858406609657
MAX_ABS_D1_REF = 2.6054065145200327
MAX_ABS_D2_REF = 11.035565148993403


def test_bump_endpoints_and_midpoint():
    assert profiles.bump(0.0) == 0.0
    assert profiles.bump(1.0) == 0.0
    assert profiles.bump(-3.0) == 0.0
    assert profiles.bump(2.0) == 0.0
    assert profiles.bump(0.5) == pytest.approx(np.exp(-4.0), rel=1e-15)


def test_bump_symmetry():
    s = np.linspace(0.0, 1.0, 1001)
    np.testing.assert_allclose(profiles.bump(s), profiles.bump(1.0 - s), atol=1e-18)


def test_norm_frozen():
    assert profiles.RAMP_NORM == pytest.approx(RAMP_NORM_REF, rel=1e-13)


def test_ramp_down_boundary_values():
    assert profiles.ramp_down(0.0) == 1.0
    assert profiles.ramp_down(-5.0) == 1.0
    assert profiles.ramp_down(1.0) == pytest.approx(0.0, abs=1e-15)
    assert profiles.ramp_down(7.0) == pytest.approx(0.0, abs=1e-15)


def test_ramp_down_monotone_decreasing():
    s = np.linspace(-0.2, 1.2, 4001)
    v = profiles.ramp_down(s)
    assert np.all(np.diff(v) <= 1e-15)
    assert np.all(v >= -1e-15) and np.all(v <= 1.0 + 1e-15)


def test_first_derivative_matches_finite_difference():
    s = np.linspace(0.02, 0.98, 397)
    h = 1e-5
    fd = (profiles.ramp_down(s + h) - profiles.ramp_down(s - h)) / (2 * h)
    np.testing.assert_allclose(profiles.ramp_down_d1(s), fd, atol=5e-8)


def test_second_derivative_matches_finite_difference():
    s = np.linspace(0.05, 0.95, 181)
    h = 1e-4
    fd = (
        profiles.ramp_down(s + h) - 2 * profiles.ramp_down(s) + profiles.ramp_down(s - h)
    ) / h**2
    np.testing.assert_allclose(profiles.ramp_down_d2(s), fd, atol=5e-6)


def test_derivatives_vanish_outside_unit_interval():
    s = np.array([-1.0, 0.0, 1.0, 2.0])
    assert np.all(profiles.ramp_down_d1(s) == 0.0)
    assert np.all(profiles.ramp_down_d2(s) == 0.0)


def test_extreme_slopes_frozen():
    # Both extrema live well inside (0, 1); a dense grid pins them down.
    s = np.linspace(0.0, 1.0, 200001)
    assert np.max(np.abs(profiles.ramp_down_d1(s))) == pytest.approx(
        MAX_ABS_D1_REF, rel=1e-10
    )
    assert np.max(np.abs(profiles.ramp_down_d2(s))) == pytest.approx(
        MAX_ABS_D2_REF, rel=1e-8
    )


def test_interpolant_against_direct_quadrature():
    # Spot-check the Hermite table against trapezoid refinement at odd points.
    from scipy.integrate import quad

    for s in (0.137, 0.5, 0.731, 0.925):
        tail, _ = quad(profiles.bump, s, 1.0, epsabs=1e-15, limit=200)
        assert profiles.ramp_down(s) == pytest.approx(tail / profiles.RAMP_NORM, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-2.0, max_value=3.0), st.floats(min_value=-2.0, max_value=3.0))
def test_order_reversal(a, b):
    lo, hi = min(a, b), max(a, b)
    assert profiles.ramp_down(lo) >= profiles.ramp_down(hi) - 1e-14


@given(st.floats(min_value=-1.0, max_value=2.0))
def test_scalar_vector_agree(s):
    assert profiles.ramp_down(np.array([s]))[0] == profiles.ramp_down(s)
    assert profiles.ramp_down_d1(np.array([s]))[0] == profiles.ramp_down_d1(s)
