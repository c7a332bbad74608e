"""Closed-system dynamics of the driven two-level system.

Working variable is the cumulative gap ``tau``. In the adiabatic frame the
Hamiltonian is ``(theta' X - omega Z)/2`` with ``omega = E0 t_f``; removing
the free part gives the interaction-picture generator
``H_I = (theta'/2) X_I(tau)`` with ``X_I = cos(omega tau) X + sin(omega tau) Y``.
The ground state of the adiabatic frame is ``|0>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bounds import MAGNUS_RADIUS, magnus_convergence_check
from .numerics import (DEFAULT_TOL, PauliVector, ToleranceConfig, dawson,
                       integrate_ode, quad, su2_exp)
from .schedule import AngularSchedule, GaussianProgression, find_s_of_tau

__all__ = [
    "ClosedRunSpec",
    "ClosedResult",
    "MagnusTerms",
    "MagnusWarning",
    "InterferometerSpec",
    "InteractionPropagator",
    "solve_exact",
    "interaction_propagator",
    "phi_integral",
    "phi_two_step_closed",
    "magnus1_p00",
    "magnus1_propagator",
    "magnus2_p00",
    "k2_double_quadrature",
    "k2_single_gaussian_closed",
    "two_step_p00",
    "accumulated_phase",
    "beam_splitter_positions",
    "interferometer_p00",
    "computational_coherence",
    "extrema_spacing",
    "magnus1_result",
]


class MagnusWarning(UserWarning):
    """First-order Magnus norm outside the convergence radius."""


@dataclass(frozen=True, eq=False)
class ClosedRunSpec:
    """Schedule, energy scale ``E0`` (rad/ns) and anneal time ``t_f`` (ns).

    With ``frequency_convention='ordinary'`` the supplied ``E0`` is a
    frequency in GHz and is multiplied by ``2 pi``.
    """

    schedule: AngularSchedule
    E0: float
    t_f: float
    frequency_convention: str = "angular"
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if not self.E0 > 0:
            raise ValueError("E0 must be positive")
        if not self.t_f >= 0:
            raise ValueError("t_f must be non-negative")
        if self.frequency_convention not in ("angular", "ordinary"):
            raise ValueError("frequency_convention must be 'angular' or 'ordinary'")

    @property
    def energy(self) -> float:
        """``E0`` in rad/ns."""
        return self.E0 if self.frequency_convention == "angular" else 2 * math.pi * self.E0

    @property
    def omega(self) -> float:
        """Dimensionless level splitting ``E0 t_f`` of the adiabatic frame."""
        return self.energy * self.t_f

    def with_t_f(self, t_f: float) -> "ClosedRunSpec":
        return ClosedRunSpec(self.schedule, self.E0, t_f, self.frequency_convention, self.tol)


@dataclass(frozen=True)
class ClosedResult:
    """Ground-state probability with the final adiabatic-frame amplitudes."""

    p00: float
    final_state: np.ndarray
    method: str
    terms: "MagnusTerms | None" = None


@dataclass(frozen=True)
class MagnusTerms:
    """Truncated Magnus generator ``K = eta n.sigma``."""

    phi: complex
    K2_z: float
    eta: float
    n_hat: np.ndarray
    order: int

    @classmethod
    def build(cls, phi: complex, k2z: float = 0.0, order: int = 1) -> "MagnusTerms":
        v = np.array([phi.real, -phi.imag, k2z])
        eta = float(np.linalg.norm(v))
        n = v / eta if eta > 0 else np.array([1.0, 0.0, 0.0])
        return cls(complex(phi), float(k2z), eta, n, order)

    @property
    def generator(self) -> PauliVector:
        return PauliVector(0.0, self.phi.real, -self.phi.imag, self.K2_z)

    def propagator(self) -> np.ndarray:
        return su2_exp(self.generator)


def _u0(omega_tau):
    """Free propagator ``exp(i omega tau Z/2)`` as its diagonal."""
    h = 0.5 * np.asarray(omega_tau)
    return np.exp(1j * h), np.exp(-1j * h)


def _fast_prog(a: AngularSchedule) -> Callable:
    p = a.progression
    if isinstance(p, GaussianProgression):
        c, al, centers = p.amplitude, p.alpha, p.centers

        def f(tau):
            return c * sum(math.exp(-(al * (tau - ck)) ** 2) for ck in centers)

        return f
    prog = a.drive.prog
    return lambda tau: float(prog(tau))


def _pulse_windows(a: AngularSchedule, tau_f: float):
    """Sub-intervals of ``[0, tau_f]`` outside of which the drive is negligible."""
    p = a.progression
    if not isinstance(p, GaussianProgression):
        return [(0.0, tau_f)]
    half = 9.0 / p.alpha  # exp(-81) is far below any tolerance
    wins = []
    for c in sorted(p.centers):
        lo, hi = max(0.0, c - half), min(tau_f, c + half)
        if wins and lo <= wins[-1][1]:
            wins[-1] = (wins[-1][0], hi)
        else:
            wins.append((lo, hi))
    return wins


def _evolve_column(spec: ClosedRunSpec, y0):
    """Propagate an interaction-picture column vector over ``[0, tau_f]``."""
    a = spec.schedule
    tau_f = a.tau_f
    w = spec.omega
    prog = _fast_prog(a)
    step = a.drive.max_step

    def rhs(tau, y):
        h = -0.5j * prog(tau)
        e = complex(math.cos(w * tau), -math.sin(w * tau))
        return np.array([h * e * y[1], h * e.conjugate() * y[0]])

    y = np.asarray(y0, dtype=complex)
    pieces = []
    for lo, hi in _pulse_windows(a, tau_f):
        traj = integrate_ode(rhs, y, (lo, hi), spec.tol, max_step=step)
        y = traj.final
        pieces.append((lo, hi, traj))
    return y, pieces


def solve_exact(spec: ClosedRunSpec) -> ClosedResult:
    """Integrate the Schrodinger equation in ``tau`` from the ground state.

    Returns the probability of ending in the instantaneous ground state
    together with the adiabatic-frame amplitudes.
    """
    y, _ = _evolve_column(spec, [1.0, 0.0])
    norm = float(np.vdot(y, y).real)
    if abs(norm - 1) > 1e-8:
        raise RuntimeError(f"norm drift {norm - 1:.3g} in exact propagation")
    d0, d1 = _u0(spec.omega * spec.schedule.tau_f)
    psi = np.array([d0 * y[0], d1 * y[1]])
    return ClosedResult(float(min(1.0, abs(y[0]) ** 2)), psi, "exact")


@dataclass(frozen=True)
class InteractionPropagator:
    """Dense interaction-picture propagator ``U_I(tau)``.

    Only the first column is integrated; the second follows from
    ``U in SU(2)``.
    """

    pieces: tuple
    tau_f: float
    omega: float
    final: np.ndarray

    def column(self, tau):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty((2, tau.size), dtype=complex)
        filled = np.zeros(tau.size, dtype=bool)
        prev = np.array([1.0, 0.0], dtype=complex)
        edge = 0.0
        for lo, hi, traj in self.pieces:
            gap = (tau >= edge) & (tau < lo) & ~filled
            out[:, gap] = prev[:, None]
            filled |= gap
            inside = (tau >= lo) & (tau <= hi) & ~filled
            if inside.any():
                out[:, inside] = traj(tau[inside])
            filled |= inside
            prev, edge = traj.final, hi
        out[:, ~filled] = prev[:, None]
        return out

    def matrix(self, tau) -> np.ndarray:
        """``U_I(tau)`` stacked as shape ``(n, 2, 2)``."""
        a, b = self.column(tau)
        u = np.empty((a.size, 2, 2), dtype=complex)
        u[:, 0, 0], u[:, 1, 0] = a, b
        u[:, 0, 1], u[:, 1, 1] = -b.conj(), a.conj()
        return u


def interaction_propagator(spec: ClosedRunSpec) -> InteractionPropagator:
    """Dense ``U_I(tau)`` for the open-system solvers."""
    y, pieces = _evolve_column(spec, [1.0, 0.0])
    u = np.array([[y[0], -y[1].conjugate()], [y[1], y[0].conjugate()]])
    return InteractionPropagator(tuple(pieces), spec.schedule.tau_f, spec.omega, u)


# ---------------------------------------------------------------------------
# Magnus expansion
# ---------------------------------------------------------------------------

def phi_integral(prog: Callable, omega: float, tau_f: float, tol: float | None = None,
                 points=None) -> complex:
    """``phi = (1/2) int_0^tau_f prog(tau) exp(-i omega tau) d tau``.

    ``points`` marks pulse centers so the adaptive rule does not miss them.
    """
    tol = DEFAULT_TOL.quad_tol if tol is None else tol
    f = lambda t: float(prog(t))
    if points is None:
        points = list(np.linspace(0.0, tau_f, 33)[1:-1])
    re = quad(lambda t: f(t) * math.cos(omega * t), 0.0, tau_f, tol, points=points)
    im = quad(lambda t: -f(t) * math.sin(omega * t), 0.0, tau_f, tol, points=points)
    return 0.5 * complex(re, im)


def _schedule_phi(spec: ClosedRunSpec, tol: float | None = None) -> complex:
    a = spec.schedule
    d = a.drive
    pts = d.centers or None
    prog = _fast_prog(a)
    if isinstance(a.progression, GaussianProgression):
        wins = _pulse_windows(a, d.tau_f)
        total = 0j
        for lo, hi in wins:
            total += _phi_window(prog, spec.omega, lo, hi, tol, [c for c in d.centers if lo < c < hi])
        return total
    return phi_integral(prog, spec.omega, d.tau_f, tol, pts)


def _phi_window(prog, omega, lo, hi, tol, pts):
    tol = DEFAULT_TOL.quad_tol if tol is None else tol
    re = quad(lambda t: prog(t) * math.cos(omega * t), lo, hi, tol, points=pts)
    im = quad(lambda t: -prog(t) * math.sin(omega * t), lo, hi, tol, points=pts)
    return 0.5 * complex(re, im)


def phi_two_step_closed(alpha: float, mu: float, omega: float, tau_f: float,
                        total_angle: float = math.pi / 2) -> complex:
    """Full-line closed form ``(psi/2) e^{-i omega tau_f/2} e^{-(omega/2 alpha)^2} cos(mu omega)``."""
    return (0.5 * total_angle * np.exp(-0.5j * omega * tau_f)
            * math.exp(-(omega / (2 * alpha)) ** 2) * math.cos(mu * omega))


def magnus1_p00(phi: complex) -> float:
    """First-order ground-state probability ``cos^2 |phi|``."""
    return math.cos(abs(phi)) ** 2


def magnus1_propagator(phi: complex) -> np.ndarray:
    """Explicit first-order propagator with rotation angle ``|phi|`` and phase ``arg phi``."""
    r, arg = abs(phi), np.angle(phi)
    c, s = math.cos(r), math.sin(r)
    return np.array([[c, -1j * s * np.exp(1j * arg)], [-1j * s * np.exp(-1j * arg), c]])


def two_step_p00(t_f, alpha: float, mu: float, E0: float) -> np.ndarray:
    """Closed-form damped oscillation of the two-pulse schedule.

    ``cos^2[(pi/4) exp(-(t_f/t_ad)^2) cos(pi t_f/t_coh)]`` with
    ``t_ad = 2 alpha/E0`` and ``t_coh = pi/(mu E0)``.
    """
    t_f = np.asarray(t_f, dtype=float)
    t_ad = 2 * alpha / E0
    # pi t_f / t_coh written as mu E0 t_f so that mu = 0 (one pulse) is allowed
    return np.cos(0.25 * math.pi * np.exp(-(t_f / t_ad) ** 2) * np.cos(mu * E0 * t_f)) ** 2


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def k2_double_quadrature(prog: Callable, omega: float, tau_f: float,
                         max_panel: float | None = None) -> float:
    """Z coefficient of the second Magnus term.

    ``K2_z = -int_0^tau_f d t1 l(t1) int_0^t1 d t2 l(t2) sin(omega (t1 - t2))``
    with ``l = prog/2``. The sine of a difference is split so the inner
    integral becomes two cumulative integrals, evaluated with composite
    16-point Gauss-Legendre panels (the outer nodes of each panel carry
    their own partial-panel rule).
    """
    h = max_panel or tau_f / 64
    if omega > 0:
        h = min(h, 1.0 / omega)
    n_pan = max(8, int(math.ceil(tau_f / h)))
    edges = np.linspace(0.0, tau_f, n_pan + 1)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    x = lo[:, None] + half[:, None] * (_GL_X + 1)[None, :]          # (P, n)
    lam = 0.5 * np.asarray(prog(x.ravel()), dtype=float).reshape(x.shape)
    wx = half[:, None] * _GL_W[None, :]
    c_full = (wx * lam * np.cos(omega * x)).sum(axis=1)
    s_full = (wx * lam * np.sin(omega * x)).sum(axis=1)
    c_before = np.concatenate([[0.0], np.cumsum(c_full)[:-1]])
    s_before = np.concatenate([[0.0], np.cumsum(s_full)[:-1]])
    # partial panel [lo, x_i] for every outer node x_i
    hp = 0.5 * (x - lo[:, None])                                      # (P, n)
    y = lo[:, None, None] + hp[:, :, None] * (_GL_X + 1)[None, None, :]  # (P, n, n)
    lam_y = 0.5 * np.asarray(prog(y.ravel()), dtype=float).reshape(y.shape)
    wy = hp[:, :, None] * _GL_W[None, None, :]
    c_part = (wy * lam_y * np.cos(omega * y)).sum(axis=2)
    s_part = (wy * lam_y * np.sin(omega * y)).sum(axis=2)
    cc = c_before[:, None] + c_part
    cs = s_before[:, None] + s_part
    inner = np.sin(omega * x) * cc - np.cos(omega * x) * cs
    return float(-(wx * lam * inner).sum())


def k2_single_gaussian_closed(total_angle: float, alpha: float, omega: float) -> float:
    """Full-line ``K2_z = -(psi^2/(4 sqrt pi)) D(sqrt(2) r)``, ``r = omega/(2 alpha)``."""
    r = omega / (2 * alpha)
    return float(-(total_angle ** 2) / (4 * math.sqrt(math.pi)) * dawson(math.sqrt(2) * r))


def _vector_prog(a: AngularSchedule) -> Callable:
    p = a.progression
    if isinstance(p, GaussianProgression):
        return p.__call__
    prog = a.drive.prog
    return lambda t: np.asarray(prog(t), dtype=float)


def magnus2_p00(spec: ClosedRunSpec, order: int = 2) -> ClosedResult:
    """Magnus propagator truncated at ``order`` (1 or 2), exponentiated exactly.

    Warns
    -----
    MagnusWarning
        When ``|phi|`` exceeds the convergence radius.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    phi = _schedule_phi(spec)
    report = magnus_convergence_check(abs(phi))
    if report.status != "pass":
        warnings.warn(f"|phi| = {abs(phi):.4g} exceeds the Magnus radius {MAGNUS_RADIUS}",
                      MagnusWarning, stacklevel=2)
    k2 = 0.0
    if order == 2:
        a = spec.schedule
        k2 = k2_double_quadrature(_vector_prog(a), spec.omega, a.tau_f, a.drive.max_step)
    terms = MagnusTerms.build(phi, k2, order)
    u = terms.propagator()
    d0, d1 = _u0(spec.omega * spec.schedule.tau_f)
    psi = np.array([d0 * u[0, 0], d1 * u[1, 0]])
    return ClosedResult(float(abs(u[0, 0]) ** 2), psi, f"magnus{order}", terms)


def magnus1_result(spec: ClosedRunSpec) -> ClosedResult:
    """First-order Magnus result from the numerically integrated ``phi``."""
    phi = _schedule_phi(spec)
    terms = MagnusTerms.build(phi, 0.0, 1)
    u = magnus1_propagator(phi)
    d0, d1 = _u0(spec.omega * spec.schedule.tau_f)
    return ClosedResult(magnus1_p00(phi), np.array([d0 * u[0, 0], d1 * u[1, 0]]), "magnus1", terms)


# ---------------------------------------------------------------------------
# Interferometer picture
# ---------------------------------------------------------------------------

def accumulated_phase(a: AngularSchedule, s_minus: float, s_plus: float, E0: float,
                      t_f: float) -> float:
    """Relative phase ``E0 t_f int_{s-}^{s+} Omega(s) ds`` between the two paths."""
    if not 0.0 <= s_minus <= s_plus <= 1.0:
        raise ValueError("need 0 <= s_minus <= s_plus <= 1")
    if s_plus == s_minus:
        return 0.0
    om = lambda s: float(np.asarray(a.gap(s)).reshape(-1)[0])
    return E0 * t_f * quad(om, s_minus, s_plus, 1e-12)


def beam_splitter_positions(a: AngularSchedule, mu: float) -> tuple:
    """``s_-+`` solving ``tau(s) = tau_f/2 -+ mu`` by bracketing (tol 1e-10)."""
    tf = a.tau_f
    return find_s_of_tau(a, 0.5 * tf - mu), find_s_of_tau(a, 0.5 * tf + mu)


@dataclass(frozen=True)
class InterferometerSpec:
    """Two-beam-splitter model parameters.

    Parameters
    ----------
    t_ad : float
        Adiabatic onset time ``2 alpha/E0`` in ns.
    t_coh : float
        Oscillation period ``pi/(mu E0)`` in ns.
    delta_tau : float
        Separation of the two splitters in ``tau``.
    gamma_deph : float
        Dephasing rate per unit ``tau``.
    xi_phase : float, optional
        Path phase per ns of anneal time (``xi = xi_phase * t_f``); by
        default ``E0 * delta_tau``.
    tau_f : float
        Total cumulative gap, bounds ``delta_tau``.
    """

    t_ad: float
    t_coh: float
    delta_tau: float
    gamma_deph: float = 0.0
    xi_phase: float | None = None
    tau_f: float = 1.0

    def __post_init__(self):
        if not (self.t_ad > 0 and self.t_coh > 0):
            raise ValueError("t_ad and t_coh must be positive")
        if not 0 < self.delta_tau < self.tau_f:
            raise ValueError("delta_tau must lie in (0, tau_f)")
        if self.gamma_deph < 0:
            raise ValueError("gamma_deph must be non-negative")

    @classmethod
    def from_two_step(cls, alpha: float, mu: float, E0: float, tau_f: float,
                      gamma_deph: float = 0.0, schedule: AngularSchedule | None = None
                      ) -> "InterferometerSpec":
        xi = None
        if schedule is not None:
            sm, sp = beam_splitter_positions(schedule, mu)
            xi = accumulated_phase(schedule, sm, sp, E0, 1.0)
        return cls(2 * alpha / E0, math.pi / (mu * E0), 2 * mu, gamma_deph, xi, tau_f)

    def xi(self, t_f: float) -> float:
        rate = self.xi_phase if self.xi_phase is not None else 2 * math.pi / self.t_coh
        return rate * t_f


def interferometer_p00(ispec: InterferometerSpec, t_f) -> np.ndarray:
    """Ground probability behind two beam splitters with dephasing in between.

    ``sin^4|phi| + cos^4|phi| - 2 e^{-Gamma dtau} sin^2|phi| cos^2|phi| cos(xi)``
    with ``|phi| = (pi/8) exp(-(t_f/t_ad)^2)``.
    """
    t_f = np.asarray(t_f, dtype=float)
    r = (math.pi / 8) * np.exp(-(t_f / ispec.t_ad) ** 2)
    s2, c2 = np.sin(r) ** 2, np.cos(r) ** 2
    damp = math.exp(-ispec.gamma_deph * ispec.delta_tau)
    return s2 * s2 + c2 * c2 - 2 * damp * s2 * c2 * np.cos(ispec.xi(1.0) * t_f)


def computational_coherence(rho_energy, theta: float, phi_angle: float) -> complex:
    """``<0|rho|1>`` from a state given in the instantaneous energy basis.

    The basis is ``|e0> = cos(t)|0> + e^{i p} sin(t)|1>`` and
    ``|e1> = sin(t)|0> - e^{i p} cos(t)|1>``. Writes the result as
    ``e^{-i p} (C sin(2t - v) + i Im r10)`` with
    ``C cos v = r00 - 1/2`` and ``C sin v = Re r10``.
    """
    r = np.asarray(rho_energy, dtype=complex)
    x, y = r[0, 0].real - 0.5, r[1, 0].real
    c, v = math.hypot(x, y), math.atan2(y, x)
    return complex(np.exp(-1j * phi_angle) * (c * math.sin(2 * theta - v) + 1j * r[1, 0].imag))


def extrema_spacing(t, p) -> float:
    """Mean spacing of interior local maxima and minima of a sampled curve.

    Adjacent extrema of opposite type are half a period apart, so the
    returned value is the oscillation period.
    """
    t, p = np.asarray(t, float), np.asarray(p, float)
    dp = np.diff(p)
    idx = np.where(np.sign(dp[:-1]) * np.sign(dp[1:]) < 0)[0] + 1
    if idx.size < 2:
        return float("nan")
    # refine each extremum with a parabola through three samples
    refined = []
    for i in idx:
        y0, y1, y2 = p[i - 1], p[i], p[i + 1]
        den = y0 - 2 * y1 + y2
        off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        refined.append(t[i] + off * (t[i + 1] - t[i]))
    return float(2 * np.mean(np.diff(refined)))
