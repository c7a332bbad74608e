"""Open-system dynamics in the adiabatic interaction frame.

Solvers
-------
``solve_redfield``
    Second-order time-convolutionless (Redfield) equation with the full
    memory integral.
``solve_lindblad_rwa``
    Lindblad equation after the rotating-wave approximation, with
    thermalization, dephasing and Lamb shift in the instantaneous eigenbasis
    of the interaction Hamiltonian.
``rwa_closed_form``
    Exponential-integral solution of the RWA equation that treats that
    eigenbasis as fixed.
``semi_empirical``
    Closed-system curve damped toward a thermal value.

Both master equations are integrated for ``rho~ = U_I^dag rho U_I``, the
state with the closed-system motion removed, and mapped back at the end.
The ground-state probability is ``<0| U_I rho~ U_I^dag |0>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import interpolate, optimize, signal

from .bath import OhmicBath, correlation_table, gamma_rate, spectral_pair, tcl2_validity
from .closed import ClosedRunSpec, interaction_propagator
from .numerics import (DEFAULT_TOL, OdeFailure, ToleranceConfig, density_diagnostics,
                       integrate_ode, quad)

__all__ = [
    "OpenRunSpec",
    "OpenResult",
    "RwaRates",
    "SemiEmpiricalParams",
    "FitResult",
    "OpenSystemError",
    "PositivityWarning",
    "FitError",
    "equilibrium_ground_probability",
    "rwa_rates",
    "solve_redfield",
    "solve_lindblad_rwa",
    "rwa_closed_form",
    "ground_probability_from_eigenbasis",
    "semi_empirical",
    "average_dephasing_rate",
    "fit_effective_temperature",
]

_DELTA_FLOOR = 1e-12
METHODS = ("redfield", "lindblad_rwa", "rwa_closed_form", "semi_empirical")


class OpenSystemError(RuntimeError):
    """A master-equation run violated a hard diagnostic."""


class PositivityWarning(UserWarning):
    """Redfield state developed a negative eigenvalue."""


class FitError(RuntimeError):
    """Effective-temperature fit did not converge; carries the residual curve."""

    def __init__(self, message: str, residual_curve):
        super().__init__(message)
        self.residual_curve = residual_curve


@dataclass(frozen=True, eq=False)
class OpenRunSpec:
    """Closed-system run plus bath, coupling ``g`` (rad/ns) and solver name."""

    closed: ClosedRunSpec
    bath: OhmicBath
    g: float = 1.0
    method: str = "lindblad_rwa"
    grid_points: int | None = None

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")

    @property
    def kappa2(self) -> float:
        """``(g t_f)^2``, the prefactor of the memory term in ``s`` units."""
        return (self.g * self.closed.t_f) ** 2

    @property
    def tcl2_ratio(self) -> float:
        return tcl2_validity(self.bath, self.g, self.closed.t_f).ratio


@dataclass(frozen=True)
class OpenResult:
    """Open-system ground probability, sampled trajectory and diagnostics.

    ``rho`` holds the adiabatic-interaction-frame density matrix at the
    times ``s``.
    """

    p_ground: float
    s: np.ndarray
    rho: np.ndarray
    method: str
    trace_err: float
    herm_err: float
    min_eig: float
    tcl2_ratio: float
    extra: dict = field(default_factory=dict)


def equilibrium_ground_probability(beta: float, E0: float) -> float:
    """Gibbs ground probability ``e^{beta E0/2}/(2 cosh(beta E0/2))``."""
    return 0.5 * (1.0 + math.tanh(0.5 * beta * E0))


# ---------------------------------------------------------------------------
# Shared frame bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Frame:
    """Closed-system quantities along the anneal needed by every solver."""

    spec: OpenRunSpec
    prop: object
    tau: Callable
    theta: Callable
    theta_dot: Callable

    @classmethod
    def build(cls, spec: OpenRunSpec) -> "_Frame":
        a = spec.closed.schedule
        return cls(spec, interaction_propagator(spec.closed), a.cumulative.tau, a.theta,
                   a.dtheta_ds)

    @property
    def omega(self) -> float:
        return self.spec.closed.omega

    def u_i(self, s) -> np.ndarray:
        return self.prop.matrix(np.asarray(self.tau(np.atleast_1d(s)), dtype=float))

    def eigvecs(self, s):
        """``|e+->`` = ``U_0^dag |+->`` as arrays of shape ``(n, 2)``."""
        ph = np.exp(-0.5j * self.omega * np.asarray(self.tau(np.atleast_1d(s)), dtype=float))
        r = 1 / math.sqrt(2)
        plus = np.stack([r * ph, r * ph.conj()], axis=1)
        minus = np.stack([r * ph, -r * ph.conj()], axis=1)
        return plus, minus

    def to_lab(self, s, rho_t) -> np.ndarray:
        u = self.u_i(s)
        return u @ rho_t @ np.conj(np.swapaxes(u, 1, 2))


def ground_probability_from_eigenbasis(rho_pm, u_final, omega_tau_f: float) -> float:
    """Final ground probability from ``rho~`` written in the ``(+, -)`` eigenbasis.

    ``P = 1/2 + (r+- + r-+)(P_G - 1/2) + (r++ - r--) Re(a b*) + i (r-+ - r+-) Im(a b*)``
    with ``a = U^a_00``, ``b = U^a_01`` and ``U^a = U_I U_0^dag``. This is
    an identity; it equals ``<0| U_I rho~ U_I^dag |0>``.
    """
    r = np.asarray(rho_pm, dtype=complex)
    u = np.asarray(u_final, dtype=complex)
    ph = -0.5 * omega_tau_f
    a = u[0, 0] * np.exp(1j * ph)
    b = u[0, 1] * np.exp(-1j * ph)
    pg = abs(a) ** 2
    ab = a * np.conj(b)
    val = (0.5 + (r[0, 1] + r[1, 0]) * (pg - 0.5) + (r[0, 0] - r[1, 1]) * ab.real
           + 1j * (r[1, 0] - r[0, 1]) * ab.imag)
    return float(val.real)


def _finish(frame: _Frame, sol, s_out, method: str, extra=None) -> OpenResult:
    rho_t = np.moveaxis(sol(s_out).reshape(2, 2, -1), 2, 0)
    rho = frame.to_lab(s_out, rho_t)
    diag = density_diagnostics(rho)
    p = float(rho[-1, 0, 0].real)
    return OpenResult(p, np.asarray(s_out), rho, method, diag["trace_err"], diag["herm_err"],
                      diag["min_eig"], frame.spec.tcl2_ratio, extra or {})


def _output_grid(n: int = 201) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


# ---------------------------------------------------------------------------
# RWA rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RwaRates:
    """Rates of the RWA master equation as functions of ``s``.

    ``Delta`` is the Bohr frequency ``(d theta/ds)/t_f`` in rad/ns, floored
    at 1e-12; ``gamma_t = gamma(Delta)``, ``gamma_d = gamma_t (1 + e^{-beta Delta})/2``
    and ``lamb_splitting = g^2 t_f (S(Delta) - S(-Delta))``.
    """

    theta_dot: Callable
    bath: OhmicBath
    g: float
    t_f: float

    def Delta(self, s):
        return np.maximum(np.asarray(self.theta_dot(s), dtype=float) / self.t_f, _DELTA_FLOOR)

    def gamma_t(self, s):
        return gamma_rate(self.bath, self.Delta(s))

    def gamma_d(self, s):
        d = self.Delta(s)
        return 0.5 * gamma_rate(self.bath, d) * (1.0 + np.exp(-self.bath.beta * d))

    def lamb_splitting(self, s):
        d = self.Delta(s)
        sp = spectral_pair(self.bath)
        return self.g ** 2 * self.t_f * (sp.S(d) - sp.S(-d))

    def lamb_levels(self, s):
        """``g^2 t_f S(+Delta)`` and ``g^2 t_f S(-Delta)``."""
        d = self.Delta(s)
        sp = spectral_pair(self.bath)
        k = self.g ** 2 * self.t_f
        return k * sp.S(d), k * sp.S(-d)


def rwa_rates(spec: OpenRunSpec) -> RwaRates:
    return RwaRates(spec.closed.schedule.dtheta_ds, spec.bath, spec.g, spec.closed.t_f)


def _tabulate(f, s_grid):
    return interpolate.CubicSpline(s_grid, np.asarray(f(s_grid), dtype=float))


def _pulse_step(spec: OpenRunSpec) -> float:
    return 1.0 / 256


# ---------------------------------------------------------------------------
# Lindblad RWA
# ---------------------------------------------------------------------------

def solve_lindblad_rwa(spec: OpenRunSpec, lamb: bool = True, n_table: int = 4097,
                       s_out=None) -> OpenResult:
    """Integrate the RWA Lindblad equation.

    Jump ``|e-><e+|`` at ``g^2 t_f gamma_t`` and ``|e+><e-|`` at
    ``g^2 t_f gamma_t e^{-beta Delta}`` drive population toward the lower
    eigenstate ``|e->``; coherences decay at ``g^2 t_f gamma_d``. The Lamb
    shift ``g^2 t_f (S(Delta) P+ + S(-Delta) P-)`` is included unless
    ``lamb=False``.

    Raises
    ------
    OpenSystemError
        If the state loses positivity beyond 1e-8 (impossible for an exact
        Lindblad flow, so it flags an integration fault).
    """
    frame = _Frame.build(spec)
    rates = rwa_rates(spec)
    grid = np.linspace(0.0, 1.0, n_table)
    k = spec.g ** 2 * spec.closed.t_f
    beta = spec.bath.beta
    down = _tabulate(lambda s: k * rates.gamma_t(s), grid)
    up = _tabulate(lambda s: k * rates.gamma_t(s) * np.exp(-beta * rates.Delta(s)), grid)
    if lamb and spec.g > 0:
        lp, lm = rates.lamb_levels(grid)
        ls_p = interpolate.CubicSpline(grid, lp)
        ls_m = interpolate.CubicSpline(grid, lm)
    else:
        ls_p = ls_m = None
    w = spec.closed.omega
    tau = frame.tau
    r = 1 / math.sqrt(2)

    def rhs(s, y):
        rho = y.reshape(2, 2)
        ph = np.exp(-0.5j * w * float(tau(s)))
        ep = np.array([r * ph, r * ph.conjugate()])
        em = np.array([r * ph, -r * ph.conjugate()])
        pp = np.outer(ep, ep.conj())
        pm = np.outer(em, em.conj())
        rpp = (ep.conj() @ rho @ ep).real
        rmm = (em.conj() @ rho @ em).real
        kd, ku = float(down(s)), float(up(s))
        d = kd * rpp * pm + ku * rmm * pp
        d -= 0.5 * kd * (pp @ rho + rho @ pp) + 0.5 * ku * (pm @ rho + rho @ pm)
        if ls_p is not None:
            h = float(ls_p(s)) * pp + float(ls_m(s)) * pm
            d += -1j * (h @ rho - rho @ h)
        return d.ravel()

    y0 = np.array([1, 0, 0, 0], dtype=complex)
    sol = integrate_ode(rhs, y0, (0.0, 1.0), spec.closed.tol, max_step=_pulse_step(spec))
    s_out = _output_grid() if s_out is None else np.asarray(s_out, dtype=float)
    res = _finish(frame, sol, s_out, "lindblad_rwa")
    if res.min_eig < -1e-8:
        raise OpenSystemError(f"Lindblad state lost positivity: min eigenvalue {res.min_eig:.3g}")
    return res


# ---------------------------------------------------------------------------
# Closed-form RWA solution
# ---------------------------------------------------------------------------

def rwa_closed_form(spec: OpenRunSpec, lamb: bool = True, weak_coupling_drop: bool = False
                    ) -> dict:
    """Exponential-integral solution of the RWA equation in a fixed eigenbasis.

    ``r--(s) = e^{-2 I(s)} [1/2 + int_0^s F+ e^{2 I}]`` and
    ``r+-(s) = (1/2) exp(-int_0^s (i W + Sigma))`` with ``Sigma = g^2 t_f gamma_d``,
    ``I = int Sigma``, ``F+ = g^2 t_f gamma_t`` and the Lamb splitting ``W``.

    Parameters
    ----------
    lamb : bool
        Keep the Lamb splitting ``W``.
    weak_coupling_drop : bool
        Drop the population-imbalance term of the ground-probability
        identity, which is small when ``g^2 t_f`` is.

    Returns
    -------
    dict
        ``rho_pm`` (2x2 in the ``(+, -)`` basis), ``p_ground``,
        ``dephasing_integral`` and ``closed_p00``.
    """
    rates = rwa_rates(spec)
    k = spec.g ** 2 * spec.closed.t_f
    sigma = lambda s: k * float(rates.gamma_d(s))
    f_plus = lambda s: k * float(rates.gamma_t(s))
    w_ls = (lambda s: float(rates.lamb_splitting(s))) if lamb and spec.g > 0 else (lambda s: 0.0)

    def rhs(s, y):
        sg = sigma(s)
        return [sg, w_ls(s), f_plus(s) * math.exp(2 * y[0])]

    tol = ToleranceConfig(1e-12, 1e-14, spec.closed.tol.quad_tol)
    sol = integrate_ode(rhs, [0.0, 0.0, 0.0], (0.0, 1.0), tol, max_step=_pulse_step(spec))
    i_sig, i_w, j = sol.final
    r_mm = math.exp(-2 * i_sig) * (0.5 + j)
    r_pm = 0.5 * complex(math.cos(i_w), -math.sin(i_w)) * math.exp(-i_sig)
    rho_pm = np.array([[1 - r_mm, r_pm], [np.conj(r_pm), r_mm]], dtype=complex)
    prop = interaction_propagator(spec.closed)
    omega_tau_f = spec.closed.omega * spec.closed.schedule.tau_f
    use = rho_pm.copy()
    if weak_coupling_drop:
        use[0, 0] = use[1, 1] = 0.5
    p = ground_probability_from_eigenbasis(use, prop.final, omega_tau_f)
    return {"rho_pm": rho_pm, "p_ground": p, "dephasing_integral": float(i_sig),
            "closed_p00": float(abs(prop.final[0, 0]) ** 2)}


# ---------------------------------------------------------------------------
# Redfield
# ---------------------------------------------------------------------------

_CELL_X, _CELL_W = np.polynomial.legendre.leggauss(8)


def _grid_size(spec: OpenRunSpec) -> int:
    if spec.grid_points:
        return int(spec.grid_points)
    w = spec.closed.omega * spec.closed.schedule.tau_f
    n = 4096
    while n < 40 * w:
        n *= 2
    return n


def _kernel_moments(spec: OpenRunSpec, n: int) -> tuple:
    """Cell moments of ``K(u) = C(t_f u)`` against ``1`` and the local coordinate."""
    t_f = spec.closed.t_f
    h = 1.0 / n
    table = correlation_table(spec.bath, t_f * (1 + 2 * h))
    m = np.arange(n + 1)
    v = 0.5 * (_CELL_X + 1)                       # local coordinate in [0, 1]
    u = (m[:, None] + v[None, :]) * h
    kv = table(t_f * u)
    wv = 0.5 * _CELL_W * h
    i0 = (kv * wv).sum(axis=1)
    i1 = (kv * wv * v).sum(axis=1)
    return i0, i1


def _memory_operator(a_grid: np.ndarray, i0: np.ndarray, i1: np.ndarray) -> np.ndarray:
    """``L(s_n) = int_0^{s_n} K(s_n - s') A(s') ds'`` with ``A`` piecewise linear.

    ``a_grid`` has shape ``(n+1, 3)`` (Pauli components); the convolution
    weights are ``w_0 = I0_0 - I1_0`` and ``w_k = I1_{k-1} + I0_k - I1_k``,
    minus a boundary correction on the first sample.
    """
    n1 = a_grid.shape[0]
    r = i0 - i1
    w = np.empty(n1, dtype=complex)
    w[0] = r[0]
    w[1:] = i1[:n1 - 1] + r[1:n1]
    conv = signal.fftconvolve(w[:, None], a_grid, axes=0)[:n1]
    return conv - r[:n1, None] * a_grid[0][None, :]


def _pauli_stack(v: np.ndarray) -> np.ndarray:
    """Matrices ``v . sigma`` for complex 3-vectors of shape ``(n, 3)``."""
    x, y, z = v[:, 0], v[:, 1], v[:, 2]
    m = np.empty((v.shape[0], 2, 2), dtype=complex)
    m[:, 0, 0], m[:, 1, 1] = z, -z
    m[:, 0, 1], m[:, 1, 0] = x - 1j * y, x + 1j * y
    return m


def _pauli_components(m: np.ndarray) -> np.ndarray:
    return np.stack([0.5 * (m[:, 0, 1] + m[:, 1, 0]), 0.5j * (m[:, 0, 1] - m[:, 1, 0]),
                     0.5 * (m[:, 0, 0] - m[:, 1, 1])], axis=1)


def coupling_vector(theta, phi) -> np.ndarray:
    """System coupling direction ``(sin p cos t, cos p cos t, sin t)``."""
    theta, phi = np.asarray(theta, float), np.asarray(phi, float)
    return np.stack([np.sin(phi) * np.cos(theta), np.cos(phi) * np.cos(theta), np.sin(theta)],
                    axis=-1)


def redfield_generator_grid(spec: OpenRunSpec, n: int | None = None) -> dict:
    """Coupling and memory operators of the Redfield equation on a uniform grid.

    Returns ``s``, ``A`` (``U_I^dag mu.sigma U_I``) and ``Lam`` (its memory
    integral), both as stacks of 2x2 matrices in the ``rho~`` frame.
    """
    frame = _Frame.build(spec)
    n = n or _grid_size(spec)
    s = np.linspace(0.0, 1.0, n + 1)
    tau = np.asarray(frame.tau(s), dtype=float)
    mu = coupling_vector(np.asarray(frame.theta(s), dtype=float), -spec.closed.omega * tau)
    u = frame.prop.matrix(tau)
    ud = np.conj(np.swapaxes(u, 1, 2))
    a_t = ud @ _pauli_stack(mu.astype(complex)) @ u
    a_vec = _pauli_components(a_t)
    i0, i1 = _kernel_moments(spec, n)
    lam_vec = _memory_operator(a_vec, i0, i1)
    return {"s": s, "A": a_t, "Lam": _pauli_stack(lam_vec), "frame": frame}


def _liouvillian(a, lam, kappa2) -> np.ndarray:
    """Row-major superoperator of ``-k^2 ([A, L rho] + [rho L^dag, A])``."""
    eye = np.eye(2)
    n = a.shape[0]
    out = np.empty((n, 4, 4), dtype=complex)
    for i in range(n):
        A, L = a[i], lam[i]
        Ld = L.conj().T
        out[i] = -kappa2 * (np.kron(A @ L, eye) - np.kron(L, A.T)
                            + np.kron(eye, (Ld @ A).T) - np.kron(A, Ld.T))
    return out


def solve_redfield(spec: OpenRunSpec, n: int | None = None, s_out=None) -> OpenResult:
    """Integrate the Redfield equation with the full memory integral.

    The memory operator is built by product integration of the tabulated
    correlation function against the piecewise-linear coupling operator on
    a uniform grid (FFT convolution), and the resulting 4x4 generator is
    splined for the adaptive integrator.

    Raises
    ------
    OpenSystemError
        Trace or hermiticity drift beyond 1e-6.

    Warns
    -----
    PositivityWarning
        Minimum eigenvalue below -1e-6 (Redfield flows need not be
        completely positive).
    """
    g = redfield_generator_grid(spec, n)
    frame = g["frame"]
    gen = _liouvillian(g["A"], g["Lam"], spec.kappa2)
    spl = interpolate.CubicSpline(g["s"], gen.reshape(gen.shape[0], 16), axis=0)
    if spec.kappa2 == 0:
        rhs = lambda s, y: np.zeros(4, dtype=complex)
    else:
        rhs = lambda s, y: spl(s).reshape(4, 4) @ y
    y0 = np.array([1, 0, 0, 0], dtype=complex)
    h = g["s"][1]
    sol = integrate_ode(rhs, y0, (0.0, 1.0), spec.closed.tol, max_step=max(4 * h, 1 / 512))
    s_out = _output_grid() if s_out is None else np.asarray(s_out, dtype=float)
    res = _finish(frame, sol, s_out, "redfield", {"grid_points": g["s"].size - 1})
    if max(res.trace_err, res.herm_err) > 1e-6:
        raise OpenSystemError(f"Redfield drift: trace {res.trace_err:.3g}, "
                              f"hermiticity {res.herm_err:.3g}")
    if res.min_eig < -1e-6:
        warnings.warn(f"Redfield state has eigenvalue {res.min_eig:.3g}", PositivityWarning,
                      stacklevel=2)
    return res


# ---------------------------------------------------------------------------
# Semi-empirical model and fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemiEmpiricalParams:
    """Damping rate ``gamma_bar_d`` (1/ns) and effective inverse temperature.

    ``gamma_bar_d`` may be a number or a function of ``t_f``.
    """

    gamma_bar_d: float | Callable
    beta_eff: float
    E0: float

    def __post_init__(self):
        if self.beta_eff < 0:
            raise ValueError("beta_eff must be non-negative")

    @property
    def P_E(self) -> float:
        if math.isinf(self.beta_eff):
            return 1.0
        return equilibrium_ground_probability(self.beta_eff, self.E0)

    def rate(self, t_f):
        g = self.gamma_bar_d
        return np.vectorize(g, otypes=[float])(t_f) if callable(g) else g


def semi_empirical(P_G_closed, params: SemiEmpiricalParams, t_f):
    """``(P_G - 1/2) exp(-gamma_bar_d t_f) + P_E(beta_eff)``.

    ``P_G_closed`` is a value (or array) or a function of ``t_f``.
    """
    t_f = np.asarray(t_f, dtype=float)
    pg = P_G_closed(t_f) if callable(P_G_closed) else np.asarray(P_G_closed, dtype=float)
    out = (pg - 0.5) * np.exp(-params.rate(t_f) * t_f) + params.P_E
    return out if np.ndim(out) else float(out)


def average_dephasing_rate(schedule, bath: OhmicBath, g: float, t_f: float,
                           tol: float = 1e-8) -> float:
    """``g^2 int_0^1 gamma_d(s) ds`` in 1/ns."""
    if g == 0 or bath.eta == 0:
        return 0.0
    rates = RwaRates(schedule.dtheta_ds, bath, g, t_f)
    f = lambda s: float(rates.gamma_d(s))
    pts = list(np.linspace(0, 1, 17)[1:-1])
    return g * g * quad(f, 0.0, 1.0, tol, points=pts)


@dataclass(frozen=True)
class FitResult:
    T_star_mK: float
    beta_eff: float
    residual: float
    residual_curve: np.ndarray


def fit_effective_temperature(t_f, p_open, p_closed, gamma_bar_d, E0: float,
                              t_coh: float | None = None, bounds=(1.0, 1000.0)) -> FitResult:
    """Least-squares effective temperature of the semi-empirical model.

    ``gamma_bar_d`` (array over ``t_f`` or a number) is held fixed; only
    ``P_E`` varies, through ``T*`` in mK on ``bounds``.

    Raises
    ------
    ValueError
        Fewer than 10 points, or a span shorter than ``t_coh``.
    FitError
        If the optimum sits on a bound or the optimizer fails.
    """
    from .bath import HBAR_OVER_KB

    t_f = np.asarray(t_f, float)
    p_open = np.asarray(p_open, float)
    damped = (np.asarray(p_closed, float) - 0.5) * np.exp(-np.asarray(gamma_bar_d) * t_f)
    if t_f.size < 10:
        raise ValueError("fit needs at least 10 sweep points")
    if t_coh is not None and np.ptp(t_f) < t_coh:
        raise ValueError("sweep must span at least one oscillation period")

    def resid(T):
        return damped + equilibrium_ground_probability(HBAR_OVER_KB / T, E0) - p_open

    def cost(T):
        r = resid(T)
        return float(r @ r)

    lo, hi = bounds
    res = optimize.minimize_scalar(cost, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10 * lo, "maxiter": 2000})
    T = float(res.x)
    curve = resid(T)
    if not res.success or min(T - lo, hi - T) < 1e-6 * (hi - lo):
        raise FitError(f"effective-temperature fit did not converge (T* = {T:.6g} mK)", curve)
    return FitResult(T, HBAR_OVER_KB / T, float(np.sqrt(np.mean(curve ** 2))), curve)
