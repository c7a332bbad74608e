import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsanneal.numerics import (DEFAULT_TOL, IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, OdeFailure,
                               PauliVector, QuadratureError, ToleranceConfig, cauchy_pv, dawson,
                               density_diagnostics, erfc, erfc_cdf, integrate_ode, is_unitary,
                               quad, quad_pv, su2_exp)

finite = st.floats(-3.0, 3.0, allow_nan=False)


def series_exp(m, terms=30):
    """exp(m) by scaling-and-squaring of a truncated Taylor series."""
    k = max(0, int(np.ceil(np.log2(max(np.abs(m).max(), 1e-300)))) + 1)
    a = m / 2 ** k
    out, term = np.eye(2, dtype=complex), np.eye(2, dtype=complex)
    for n in range(1, terms):
        term = term @ a / n
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


def test_tolerance_defaults_and_validation():
    t = ToleranceConfig()
    assert (t.ode_rel_tol, t.ode_abs_tol, t.quad_tol) == (1e-10, 1e-12, 1e-10)
    with pytest.raises(ValueError):
        ToleranceConfig(ode_rel_tol=0.0)


@given(finite, finite, finite, finite)
def test_pauli_round_trip(c0, cx, cy, cz):
    p = PauliVector(c0 + 0.5j * cx, cx, cy - 1j * cz, cz)
    q = PauliVector.from_matrix(p.to_matrix())
    assert np.allclose([q.c0, q.cx, q.cy, q.cz], [p.c0, p.cx, p.cy, p.cz], atol=1e-15, rtol=0)


def test_pauli_hermiticity_is_reality():
    assert PauliVector(1.0, 0.2, -0.3, 0.4).is_hermitian()
    assert not PauliVector(0.0, 0.2j, 0.0, 0.0).is_hermitian()


def test_su2_exp_identity_and_quarter_turn():
    assert np.allclose(su2_exp(PauliVector(0, 0, 0, 0)), IDENTITY, atol=0)
    assert np.allclose(su2_exp(PauliVector(0, math.pi / 2, 0, 0)), -1j * SIGMA_X, atol=1e-15)


def test_su2_exp_rejects_non_hermitian():
    with pytest.raises(ValueError):
        su2_exp(PauliVector(0, 1j, 0, 0))


@settings(max_examples=200)
@given(finite, finite, finite, finite)
def test_su2_exp_matches_series_and_is_unitary(c0, cx, cy, cz):
    h = PauliVector(c0, cx, cy, cz)
    u = su2_exp(h)
    assert np.abs(u - series_exp(-1j * h.to_matrix())).max() < 1e-12
    assert is_unitary(u, 1e-12)
    assert abs(abs(np.linalg.det(u)) - 1) < 1e-12


def test_density_diagnostics():
    d = density_diagnostics(np.array([[0.7, 0.1j], [-0.1j, 0.3]]))
    assert d["trace_err"] < 1e-15 and d["herm_err"] < 1e-15 and d["min_eig"] > 0.2
    d = density_diagnostics(np.array([[1.2, 0.0], [0.0, -0.1]]))
    assert d["trace_err"] == pytest.approx(0.1) and d["min_eig"] == pytest.approx(-0.1)


def test_dawson_values():
    assert dawson(0.0) == 0.0
    oracle = math.exp(-1) * float(mpmath.quad(lambda t: mpmath.exp(t * t), [0, 1]))
    assert abs(dawson(1.0) - oracle) < 1e-12
    # the two-term asymptote alone is off by 3/(4 x^4) ~ 1.2e-7 at x = 50, so the
    # oracle keeps the next term of the series
    x = 50.0
    asym = 1 / (2 * x) + 1 / (4 * x ** 3) + 3 / (8 * x ** 5)
    assert abs(dawson(x) / asym - 1) < 1e-8


@given(st.floats(-20, 20))
def test_dawson_odd_and_ode(x):
    assert dawson(-x) == -dawson(x)
    h = 1e-4
    d = (dawson(x + h) - dawson(x - h)) / (2 * h)
    assert abs(d - (1 - 2 * x * dawson(x))) < 1e-8


@given(st.floats(-30, 30))
def test_normal_cdf_reflection(x):
    assert abs(erfc_cdf(x) + erfc_cdf(-x) - 1) < 1e-14


def test_normal_cdf_values():
    assert erfc_cdf(0.0) == 0.5 and erfc(0.0) == 1.0
    assert abs(erfc_cdf(1.0) - float(mpmath.ncdf(1))) < 1e-15


def test_ode_decay_and_rotation():
    sol = integrate_ode(lambda t, y: -y, [1.0], (0.0, 1.0))
    assert abs(sol.final[0] - math.exp(-1)) < 1e-9
    assert abs(sol(0.5)[0] - math.exp(-0.5)) < 1e-9
    rot = integrate_ode(lambda t, y: 1j * y, [1.0 + 0j], (0.0, 2 * math.pi))
    assert np.abs(np.abs(rot.y) - 1).max() < 1e-10
    # interpolated points between steps carry the dense-output error
    assert np.abs(np.abs(rot(np.linspace(0, 2 * math.pi, 101))) - 1).max() < 1e-9


def test_ode_matches_su2_exp():
    h = PauliVector(0.3, 0.7, -0.4, 1.1)
    hm = h.to_matrix()
    sol = integrate_ode(lambda t, y: -1j * hm @ y, [1.0 + 0j, 0j], (0.0, 2.0))
    assert np.abs(sol.final - su2_exp(h * 2.0)[:, 0]).max() < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2), st.floats(0.1, 2))
def test_ode_norm_preserved(a, b, w1, w2):
    def rhs(t, y):
        hm = a * math.cos(w1 * t) * SIGMA_X + b * math.sin(w2 * t) * SIGMA_Y + 0.5 * SIGMA_Z
        return -1j * hm @ y

    sol = integrate_ode(rhs, [1.0 + 0j, 0j], (0.0, 5.0))
    norms = np.linalg.norm(sol(np.linspace(0, 5, 51)), axis=0)
    assert np.abs(norms - 1).max() < 10 * DEFAULT_TOL.ode_rel_tol * 10


def test_ode_failure_names_time():
    with pytest.raises(OdeFailure) as exc:
        integrate_ode(lambda t, y: y ** 2, [1.0], (0.0, 2.0))
    assert abs(exc.value.time - 1.0) < 1e-3


def test_quad_semi_infinite_and_errors():
    assert abs(quad(lambda w: w * math.exp(-w), 0.0, math.inf, 1e-12) - 1) < 1e-12
    with pytest.raises(QuadratureError):
        quad(lambda x: 1 / x, 0.0, 1.0, 1e-12)


def test_principal_values():
    assert abs(quad_pv(lambda x: 1 / x, 0.0, -1.0, 1.0, 1e-12)) < 1e-12
    assert abs(quad_pv(lambda x: 1 / (x - 1), 1.0, 0.0, 2.0, 1e-12)) < 1e-12
    assert abs(quad_pv(lambda x: 1 / (x - 1), 1.0, 0.0, 3.0, 1e-12) - math.log(2)) < 1e-12
    assert abs(cauchy_pv(lambda x: 1.0, 1.0, 0.0, 3.0, 1e-12) - math.log(2)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(0.2, 3.0))
def test_quad_pv_reflection_antisymmetry(pole, k):
    g = lambda x: math.exp(k * x) / (1 + x * x)
    a, b = pole - 1.7, pole + 1.7
    left = quad_pv(lambda x: g(x) / (x - pole), pole, a, b, 1e-11)
    # reflecting the numerator about the pole flips the sign on a symmetric interval
    right = quad_pv(lambda x: g(2 * pole - x) / (x - pole), pole, a, b, 1e-11)
    assert abs(left + right) < 1e-9
    b2 = pole + 2.5
    assert abs(quad_pv(lambda x: g(x) / (x - pole), pole, a, b2, 1e-11)
               - cauchy_pv(g, pole, a, b2, 1e-11)) < 1e-9
