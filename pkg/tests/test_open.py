import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dsanneal.bath import (HBAR_OVER_KB, OhmicBath, correlation_function, gamma_rate,
                           spectral_pair)
from dsanneal.closed import ClosedRunSpec, interaction_propagator, solve_exact
from dsanneal.numerics import SIGMA_Y, SIGMA_Z
from dsanneal.opensystem import (FitError, OpenRunSpec, SemiEmpiricalParams,
                                 average_dephasing_rate, equilibrium_ground_probability,
                                 fit_effective_temperature, ground_probability_from_eigenbasis,
                                 rwa_closed_form, rwa_rates, semi_empirical, solve_lindblad_rwa,
                                 solve_redfield)
from dsanneal.schedule import AngularSchedule, GapProfile, synthesize_schedule, two_step_gaussian

E0 = 0.25
BATH = OhmicBath.from_temperature(2e-4, 4.0, 20.0)


@pytest.fixture(scope="module")
def pulses():
    return synthesize_schedule(GapProfile.two_crossing(), two_step_gaussian(32.0, 101 / 800, 0.505))


def ramp(gap=1.0):
    """Constant gap and constant angular speed."""
    return AngularSchedule(GapProfile.constant(gap), lambda s: 0.5 * math.pi * np.asarray(s),
                           lambda s: 0.5 * math.pi + 0 * np.asarray(s))


def test_spec_validation(pulses):
    cs = ClosedRunSpec(pulses, E0, 10.0)
    with pytest.raises(ValueError):
        OpenRunSpec(cs, BATH, -1.0)
    with pytest.raises(ValueError):
        OpenRunSpec(cs, BATH, 1.0, "bloch")
    assert OpenRunSpec(cs, BATH, 0.5).kappa2 == pytest.approx(25.0)


def test_equilibrium_probability():
    assert equilibrium_ground_probability(0.0, E0) == 0.5
    b = 3.0
    assert equilibrium_ground_probability(b, E0) == pytest.approx(
        math.exp(b * E0 / 2) / (2 * math.cosh(b * E0 / 2)), rel=1e-15)


@pytest.mark.parametrize("t_f", [35.0, 150.0])
def test_zero_coupling_reproduces_closed(pulses, t_f):
    cs = ClosedRunSpec(pulses, E0, t_f)
    exact = solve_exact(cs).p00
    for solver in (solve_lindblad_rwa, solve_redfield):
        r = solver(OpenRunSpec(cs, BATH, 0.0))
        assert abs(r.p_ground - exact) < 1e-8
    assert abs(rwa_closed_form(OpenRunSpec(cs, BATH, 0.0))["p_ground"] - exact) < 1e-8


def test_eigenbasis_identity_matches_direct_rotation(pulses):
    cs = ClosedRunSpec(pulses, E0, 77.0)
    u = interaction_propagator(cs).final
    rng = np.random.default_rng(3)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    w = cs.omega * pulses.tau_f
    # (+, -) vectors at the end of the anneal, in the computational basis
    ep = np.array([np.exp(-0.5j * w), np.exp(0.5j * w)]) / math.sqrt(2)
    em = np.array([np.exp(-0.5j * w), -np.exp(0.5j * w)]) / math.sqrt(2)
    v = np.stack([ep, em], axis=1)
    direct = (u @ v @ rho @ v.conj().T @ u.conj().T)[0, 0].real
    assert ground_probability_from_eigenbasis(rho, u, w) == pytest.approx(direct, abs=1e-11)


@pytest.mark.parametrize("t_f", [50.0, 200.0])
def test_lindblad_diagnostics_and_closed_form(pulses, t_f):
    spec = OpenRunSpec(ClosedRunSpec(pulses, E0, t_f), BATH, 1.0)
    r = solve_lindblad_rwa(spec)
    assert r.trace_err <= 1e-8 and r.herm_err <= 1e-8 and r.min_eig >= -1e-8
    assert abs(rwa_closed_form(spec)["p_ground"] - r.p_ground) <= 1e-3


@settings(max_examples=6, deadline=None)
@given(st.floats(5.0, 400.0))
def test_lindblad_stays_physical(t_f):
    sched = synthesize_schedule(GapProfile.two_crossing(), two_step_gaussian(32.0, 101 / 800, 0.505))
    hot = OhmicBath.from_temperature(1e-3, 4.0, 40.0)
    r = solve_lindblad_rwa(OpenRunSpec(ClosedRunSpec(sched, E0, t_f), hot, 1.0))
    assert r.min_eig >= -1e-8 and r.trace_err <= 1e-8
    assert 0.0 <= r.p_ground <= 1.0


def test_frozen_schedule_detailed_balance():
    cold = OhmicBath.from_temperature(2.0, 4.0, 1.0)
    spec = OpenRunSpec(ClosedRunSpec(ramp(), E0, 5.0), cold, 1.0)
    rho = rwa_closed_form(spec)["rho_pm"]
    delta = 0.5 * math.pi / 5.0
    assert (rho[0, 0].real / rho[1, 1].real) / math.exp(-cold.beta * delta) == pytest.approx(1, abs=1e-3)


def test_coherence_decays_with_dephasing_integral(pulses):
    spec = OpenRunSpec(ClosedRunSpec(pulses, E0, 120.0), BATH, 1.0)
    out = rwa_closed_form(spec, lamb=False)
    rho = out["rho_pm"]
    assert abs(rho[0, 1] + rho[1, 0] - math.exp(-out["dephasing_integral"])) < 1e-14
    gbar = average_dephasing_rate(pulses, BATH, 1.0, 120.0)
    assert out["dephasing_integral"] == pytest.approx(gbar * 120.0, rel=1e-8)


@pytest.mark.parametrize("t_f", [40.0, 180.0])
def test_weak_coupling_drop_is_semi_empirical(pulses, t_f):
    spec = OpenRunSpec(ClosedRunSpec(pulses, E0, t_f), BATH, 1.0)
    out = rwa_closed_form(spec, lamb=False, weak_coupling_drop=True)
    gbar = out["dephasing_integral"] / t_f
    se = semi_empirical(out["closed_p00"], SemiEmpiricalParams(gbar, 0.0, E0), t_f)
    assert abs(out["p_ground"] - se) < 1e-10


def test_semi_empirical_limits():
    p = SemiEmpiricalParams(0.0, 0.0, E0)
    assert semi_empirical(0.8, p, 100.0) == pytest.approx(0.8, abs=1e-15)
    cold = SemiEmpiricalParams(1e9, math.inf, E0)
    assert cold.P_E == 1.0 and semi_empirical(0.8, cold, 1.0) == pytest.approx(1.0, abs=1e-15)
    hot = SemiEmpiricalParams(0.01, 0.0, E0)
    t = np.array([10.0, 50.0])
    assert np.allclose(semi_empirical(lambda x: 0.9 + 0 * x, hot, t), 0.4 * np.exp(-0.01 * t) + 0.5)
    with pytest.raises(ValueError):
        SemiEmpiricalParams(0.0, -1.0, E0)


def test_average_dephasing_rate(pulses):
    assert average_dephasing_rate(pulses, BATH, 0.0, 100.0) == 0.0
    t_f = 30.0
    delta = 0.5 * math.pi / t_f
    flat = average_dephasing_rate(ramp(), BATH, 1.0, t_f)
    oracle = 0.5 * (gamma_rate(BATH, delta) + gamma_rate(BATH, -delta))
    assert flat == pytest.approx(oracle, rel=1e-12)
    s = np.linspace(0.0, 1.0, 10001)
    d = np.maximum(pulses.dtheta_ds(s) / t_f, 1e-12)
    gd = 0.5 * (gamma_rate(BATH, d) + gamma_rate(BATH, -d))
    assert average_dephasing_rate(pulses, BATH, 1.0, t_f) == pytest.approx(np.trapezoid(gd, s), rel=1e-6)


@settings(max_examples=50)
@given(st.floats(1e-3, 20.0))
def test_rwa_dephasing_rate_identity(theta_dot):
    rates = rwa_rates(OpenRunSpec(ClosedRunSpec(ramp(), E0, 1.0), BATH, 1.0))
    d = float(rates.Delta(0.3)) * theta_dot / (0.5 * math.pi)
    lhs = 0.5 * gamma_rate(BATH, d) * (1 + math.exp(-BATH.beta * d))
    assert lhs == pytest.approx(0.5 * (gamma_rate(BATH, d) + gamma_rate(BATH, -d)), rel=1e-12)


def _synthetic_sweep(T_mK):
    t = np.linspace(5.0, 400.0, 40)
    pc = 0.8 + 0.15 * np.cos(t / 15.9)
    gbar = 4e-3 + 0 * t
    params = SemiEmpiricalParams(gbar, HBAR_OVER_KB / T_mK, E0)
    return t, pc, gbar, semi_empirical(pc, params, t)


def test_fit_recovers_temperature():
    t, pc, gbar, po = _synthetic_sweep(35.0)
    fit = fit_effective_temperature(t, po, pc, gbar, E0, t_coh=99.5)
    assert abs(fit.T_star_mK / 35.0 - 1) < 1e-6
    assert fit.residual < 1e-10


def test_fit_errors():
    t, pc, gbar, po = _synthetic_sweep(35.0)
    with pytest.raises(ValueError):
        fit_effective_temperature(t[:9], po[:9], pc[:9], gbar[:9], E0)
    with pytest.raises(ValueError):
        fit_effective_temperature(t[:10], po[:10], pc[:10], gbar[:10], E0, t_coh=99.5)
    # an open signal pinned at the ground state needs T* -> 0
    damped = (pc - 0.5) * np.exp(-gbar * t)
    with pytest.raises(FitError) as exc:
        fit_effective_temperature(t, damped + 1.2, pc, gbar, E0)
    assert exc.value.residual_curve.shape == t.shape


def test_redfield_grid_convergence(pulses):
    spec = OpenRunSpec(ClosedRunSpec(pulses, E0, 120.0), BATH, 1.0)
    a = solve_redfield(spec)
    b = solve_redfield(spec, n=2 * a.extra["grid_points"])
    assert abs(a.p_ground - b.p_ground) < 1e-5
    assert a.trace_err < 1e-6


def _redfield_oracle(sched, bath, t_f, n=1024):
    """Memory integral by direct trapezoid at every lag, state by fixed-step RK4."""
    cs = ClosedRunSpec(sched, E0, t_f)
    s = np.linspace(0.0, 1.0, 2 * n + 1)
    h = s[1]
    tau, th, w = sched.cumulative.tau(s), sched.theta(s), cs.omega
    u = interaction_propagator(cs).matrix(tau)
    mu = np.empty((s.size, 2, 2), complex)
    for i in range(s.size):
        u0 = np.diag([np.exp(-0.5j * w * tau[i]), np.exp(0.5j * w * tau[i])])
        mu[i] = u0 @ (math.cos(th[i]) * SIGMA_Y + math.sin(th[i]) * SIGMA_Z) @ u0.conj().T
    a = np.conj(np.swapaxes(u, 1, 2)) @ mu @ u
    c = correlation_function(bath, t_f * s, tol=1e-11)
    lam = np.zeros_like(a)
    for k in range(1, s.size):
        wts = c[k::-1].copy()
        wts[0] *= 0.5
        wts[-1] *= 0.5
        lam[k] = h * np.tensordot(wts, a[:k + 1], axes=1)
    k2 = t_f ** 2

    def f(i, r):
        ai, li = a[i], lam[i]
        return -k2 * (ai @ li @ r - li @ r @ ai + r @ li.conj().T @ ai - ai @ r @ li.conj().T)

    r = np.diag([1.0, 0.0]).astype(complex)
    big = 2 * h
    for i in range(0, 2 * n, 2):
        k1 = f(i, r)
        k2_ = f(i + 1, r + big / 2 * k1)
        k3 = f(i + 1, r + big / 2 * k2_)
        k4 = f(i + 2, r + big * k3)
        r = r + big / 6 * (k1 + 2 * k2_ + 2 * k3 + k4)
    return (u[-1] @ r @ u[-1].conj().T)[0, 0].real


def test_redfield_against_direct_memory_route(pulses):
    t_f = 60.0
    got = solve_redfield(OpenRunSpec(ClosedRunSpec(pulses, E0, t_f), BATH, 1.0)).p_ground
    assert abs(got - _redfield_oracle(pulses, BATH, t_f)) < 1e-5


def test_lindblad_against_adiabatic_frame_route(pulses):
    """The same RWA equation written in the adiabatic frame, with the diabatic
    Hamiltonian explicit and the basis carried by the closed propagator."""
    t_f = 40.0
    spec = OpenRunSpec(ClosedRunSpec(pulses, E0, t_f), BATH, 1.0)
    cs, w = spec.closed, spec.closed.omega
    prop = interaction_propagator(cs)
    sp = spectral_pair(BATH)
    x = np.array([[0, 1], [1, 0]], dtype=complex)

    def rhs(s, y):
        rho = y.reshape(2, 2)
        tau, th = float(pulses.cumulative.tau(s)), float(pulses.dtheta_ds(s))
        u0 = np.diag([np.exp(0.5j * w * tau), np.exp(-0.5j * w * tau)])
        u = prop.matrix(np.array([tau]))[0]
        ph = np.exp(-0.5j * w * tau)
        b = u @ np.array([ph, ph.conjugate()]) / math.sqrt(2)
        a = u @ np.array([ph, -ph.conjugate()]) / math.sqrt(2)
        d = max(th / t_f, 1e-12)
        gt = float(gamma_rate(BATH, d))
        gd = 0.5 * gt * (1 + math.exp(-BATH.beta * d))
        pb, pa = np.outer(b, b.conj()), np.outer(a, a.conj())
        h = 0.5 * th * (u0.conj().T @ x @ u0) + t_f * (float(sp.S(d)) * pb + float(sp.S(-d)) * pa)
        rbb, raa = (b.conj() @ rho @ b).real, (a.conj() @ rho @ a).real
        out = -1j * (h @ rho - rho @ h)
        out -= t_f * gd * ((b.conj() @ rho @ a) * np.outer(b, a.conj())
                           + (a.conj() @ rho @ b) * np.outer(a, b.conj()))
        out += t_f * gt * (rbb - math.exp(-BATH.beta * d) * raa) * (pa - pb)
        return out.ravel()

    sol = integrate.solve_ivp(rhs, (0.0, 1.0), np.array([1, 0, 0, 0], dtype=complex),
                              method="DOP853", rtol=1e-10, atol=1e-12, max_step=1 / 512)
    assert abs(sol.y[0, -1].real - solve_lindblad_rwa(spec).p_ground) < 1e-8
