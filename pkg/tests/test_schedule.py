import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dsanneal.bounds import fourier_extension_bound
from dsanneal.schedule import (AngularSchedule, CartesianSchedule, GapClosureError, GapProfile,
                               GaussianProgression, ScheduleWarning, angular_from_cartesian,
                               cartesian_from_angular, cumulative_gap, gap_from_dict,
                               gaussian_progression_fn, linear_schedule,
                               progression_from_schedule, schedule_from_dict,
                               synthesize_schedule, two_step_gaussian)

S = np.linspace(0.0, 1.0, 1000)


@pytest.fixture(scope="module")
def pulses():
    prog = two_step_gaussian(32.0, 101 / 800, 0.505)
    return prog, synthesize_schedule(GapProfile.two_crossing(), prog)


def test_linear_schedule_values():
    c = linear_schedule()
    assert (c.A(0.0), c.B(0.0)) == (1.0, 0.0)
    assert (c.A(0.5), c.B(0.5)) == (0.5, 0.5)
    assert c.gap(0.5) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_linear_progression_by_hand():
    prog = progression_from_schedule(linear_schedule())
    assert prog(0.0) == pytest.approx(1.0, abs=1e-12)
    assert prog(0.5) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_angular_from_linear_endpoints():
    a = angular_from_cartesian(linear_schedule())
    assert a.omega(0.0) == pytest.approx(1.0) and abs(a.theta(0.0)) < 1e-15
    assert a.omega(1.0) == pytest.approx(1.0) and a.theta(1.0) == pytest.approx(math.pi / 2)


def test_linear_tau_f_against_quadrature():
    a = angular_from_cartesian(linear_schedule())
    oracle = integrate.quad(lambda s: math.hypot(s, 1 - s), 0, 1, epsabs=1e-13)[0]
    assert abs(cumulative_gap(a).tau_f - oracle) < 1e-9


def test_cartesian_round_trip():
    c = linear_schedule()
    back = cartesian_from_angular(angular_from_cartesian(c))
    assert np.abs(back.A(S) - c.A(S)).max() < 1e-12
    assert np.abs(back.B(S) - c.B(S)).max() < 1e-12


def test_angular_round_trip_from_angular_side(pulses):
    _, a = pulses
    back = angular_from_cartesian(cartesian_from_angular(a))
    assert np.abs(back.theta(S) - a.theta(S)).max() < 1e-12
    assert np.abs(back.omega(S) - a.omega(S)).max() < 1e-12


def test_theta_unwrapping_across_branch():
    # rotates the axis through more than a full turn so atan2 wraps twice
    c = CartesianSchedule(lambda s: np.cos(2.25 * np.pi * np.asarray(s)),
                          lambda s: np.sin(2.25 * np.pi * np.asarray(s)),
                          lambda s: -2.25 * np.pi * np.sin(2.25 * np.pi * np.asarray(s)),
                          lambda s: 2.25 * np.pi * np.cos(2.25 * np.pi * np.asarray(s)))
    a = angular_from_cartesian(c)
    assert np.abs(a.theta(S) - 2.25 * np.pi * S).max() < 1e-12


def test_gap_closure_raises():
    c = CartesianSchedule(lambda s: (1 - 2 * np.asarray(s)) ** 2, lambda s: 0 * np.asarray(s))
    with pytest.raises(GapClosureError):
        angular_from_cartesian(c)


def test_cumulative_gap_values():
    flat = AngularSchedule(GapProfile.constant(1.0), lambda s: s)
    cg = cumulative_gap(flat)
    assert cg.tau_f == pytest.approx(1.0, abs=1e-12)
    assert np.abs(cg.tau(S) - S).max() < 1e-12
    two = AngularSchedule(GapProfile.two_crossing(), lambda s: s)
    assert cumulative_gap(two).tau_f == pytest.approx(0.505, abs=1e-10)


def test_cumulative_gap_strictly_increasing(pulses):
    _, a = pulses
    assert np.all(np.diff(a.cumulative.tau(S)) > 0)


def test_gaussian_normalization_and_peak():
    alpha, mu = 32.0, 101 / 800
    g = two_step_gaussian(alpha, mu, 1.0)
    c = alpha * math.sqrt(math.pi) / 4
    assert g.amplitude == pytest.approx(c, rel=1e-15)
    peak = g(0.5 - mu)
    assert peak == pytest.approx(c * (1 + math.exp(-(2 * alpha * mu) ** 2)), rel=1e-14)
    assert g.containment == pytest.approx(32 * 0.37375, rel=1e-12)
    total = integrate.quad(g, 0, 1, points=g.centers, epsabs=1e-14, epsrel=1e-14)[0]
    assert abs(total - math.pi / 2) < 1e-13


@pytest.mark.parametrize("x", [math.sqrt(math.pi), 2 * math.sqrt(math.pi), 1.77, 3.5])
def test_gaussian_truncation_obeys_bound(x):
    alpha = 8.0
    tau_f = 2 * x / alpha
    g = GaussianProgression(alpha, (0.0,), math.pi / 2, tau_f)
    truncated = integrate.quad(g, 0, tau_f, epsabs=1e-15, epsrel=1e-15)[0]
    err = abs(truncated - math.pi / 2) / (math.pi / 2)
    assert err <= fourier_extension_bound(alpha, g.tau_star).value


def test_poorly_contained_pulses_warn():
    with pytest.warns(ScheduleWarning):
        gaussian_progression_fn(GaussianProgression(4.0, (-0.3, 0.3), math.pi / 2, 1.0))


def test_single_centered_gaussian_symmetry():
    g = GaussianProgression(32.0, (0.0,), math.pi / 2, 1.0)
    a = synthesize_schedule(GapProfile.constant(1.0), g)
    assert a.theta(0.5) == pytest.approx(math.pi / 4, abs=1e-10)


def test_constant_gap_synthesis_matches_erf_sum():
    g = two_step_gaussian(32.0, 0.25, 1.0)
    a = synthesize_schedule(GapProfile.constant(1.0), g)
    assert np.abs(a.theta(S) - g.angle(S)).max() < 1e-8


def test_two_pulse_synthesis_endpoints(pulses):
    _, a = pulses
    c = cartesian_from_angular(a)
    assert abs(c.A(1.0)) < 1e-6 and abs(c.B(0.0)) < 1e-6
    assert abs(a.theta(1.0) - math.pi / 2) < 1e-6


def test_full_round_trip(pulses):
    prog, a = pulses
    recovered = progression_from_schedule(cartesian_from_angular(a))(S)
    assert np.abs(recovered - prog(a.cumulative.tau(S))).max() < 1e-6


def test_progression_integrates_to_quarter_turn(pulses):
    _, a = pulses
    f = lambda s: float(a.progression_s(s) * a.omega(s))
    total = integrate.quad(f, 0, 1, points=[0.25, 0.75], limit=200, epsabs=1e-12)[0]
    assert abs(total - math.pi / 2) < 1e-8


def test_synthesis_mismatch_warns():
    # a pulse too wide for the interval loses part of its area to truncation
    wide = GaussianProgression(3.0, (0.0,), math.pi / 2, 0.505)
    with pytest.warns(ScheduleWarning, match="theta"):
        synthesize_schedule(GapProfile.two_crossing(), wide)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.05, 1.0))
def test_cartesian_angular_round_trip_property(k, floor):
    # smooth positive-gap schedule with a non-monotone angle
    A = lambda s: (floor + np.asarray(s) ** 2) * np.cos(k * np.sin(np.pi * np.asarray(s)))
    B = lambda s: (floor + np.asarray(s) ** 2) * np.sin(k * np.sin(np.pi * np.asarray(s)))
    c = CartesianSchedule(A, B)
    back = cartesian_from_angular(angular_from_cartesian(c))
    assert np.abs(back.A(S) - A(S)).max() < 1e-12
    assert np.abs(back.B(S) - B(S)).max() < 1e-12


def test_schedule_json_forms():
    a = schedule_from_dict({"form": "gaussian2", "alpha": 32, "mu_fraction": 0.25,
                            "gap": {"form": "two_crossing"}})
    assert a.tau_f == pytest.approx(0.505, abs=1e-10)
    lin = schedule_from_dict({"form": "linear"})
    s = np.linspace(0, 1, 16)
    tab = schedule_from_dict({"form": "tabulated", "s": list(s), "A": list(1 - s), "B": list(s)})
    assert np.abs(tab.theta(S) - lin.theta(S)).max() < 1e-12
    with pytest.raises(ValueError):
        schedule_from_dict({"form": "tabulated", "s": [0, 1], "A": [1, 0], "B": [0, 1]})
    with pytest.raises(ValueError):
        gap_from_dict({"form": "tabulated", "s": [0, 0.3, 0.6, 1], "omega": [1, -0.1, 0.5, 1]})
    with pytest.raises(ValueError):
        schedule_from_dict({"form": "spiral"})


def test_schedule_json_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown keys"):
        gap_from_dict({"form": "constant", "omega": 1.0})
    with pytest.raises(ValueError, match="unknown keys"):
        schedule_from_dict({"form": "gaussian2", "alpha": 32, "mu": 0.1, "sigma": 2})
    with pytest.raises(ValueError):
        gap_from_dict({"form": "wiggle"})
