"""Annealing schedules in Cartesian ``(A, B)``, angular ``(Omega, theta)``
and angular-progression ``d theta / d tau`` form.

The system Hamiltonian is ``H(s) = -(E0/2) [A(s) Z + B(s) Y]``, with
``A = Omega cos(theta)`` and ``B = Omega sin(theta)``. The cumulative gap
``tau(s) = int_0^s Omega`` is the natural clock of the adiabatic frame and
the progression ``d theta/d tau`` is the only quantity that drives diabatic
transitions.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import interpolate, optimize, special

from .numerics import DEFAULT_TOL, ToleranceConfig, integrate_ode

__all__ = [
    "GapClosureError",
    "ScheduleWarning",
    "CartesianSchedule",
    "AngularSchedule",
    "GapProfile",
    "GaussianProgression",
    "CumulativeGap",
    "linear_schedule",
    "angular_from_cartesian",
    "cartesian_from_angular",
    "cumulative_gap",
    "progression_from_schedule",
    "gaussian_progression_fn",
    "two_step_gaussian",
    "synthesize_schedule",
    "schedule_from_dict",
]

_FD_STEP = 1e-5
_TABLE_POINTS = 2048


class GapClosureError(ValueError):
    """The gap ``Omega(s)`` vanishes somewhere on ``[0, 1]``."""


class ScheduleWarning(UserWarning):
    """Progression and gap are inconsistent, or a pulse is poorly contained."""


def _central_diff(f: Callable, s):
    h = _FD_STEP
    return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h)


@dataclass(frozen=True)
class CartesianSchedule:
    """Schedule pair ``A(s)``, ``B(s)`` on ``s`` in ``[0, 1]``.

    Derivatives fall back to fourth-order central differences when not
    supplied.
    """

    A: Callable
    B: Callable
    dA: Callable | None = None
    dB: Callable | None = None

    def __post_init__(self):
        for s in (0.0, 1.0):
            if self.A(s) < -1e-12 or self.B(s) < -1e-12:
                raise ValueError(f"A and B must be non-negative at s = {s:g}")

    def derivatives(self, s):
        dA = self.dA(s) if self.dA is not None else _central_diff(self.A, s)
        dB = self.dB(s) if self.dB is not None else _central_diff(self.B, s)
        return dA, dB

    def gap(self, s):
        return np.hypot(self.A(s), self.B(s))


@dataclass(frozen=True)
class GapProfile:
    """Dimensionless gap ``Omega(s)`` with values in ``(0, 1]``.

    Use the named constructors; ``integral`` is an optional closed-form
    cumulative gap used as a cross-check.
    """

    omega: Callable
    derivative: Callable | None = None
    name: str = "custom"
    integral: Callable | None = None

    def __call__(self, s):
        return self.omega(s)

    def validate(self, n: int = 4097) -> None:
        v = np.asarray(self.omega(np.linspace(0.0, 1.0, n)), dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("gap values must be finite")
        if v.min() <= 0.0:
            raise GapClosureError(f"gap must be strictly positive, min is {v.min():.3g}")
        if v.max() > 1.0 + 1e-12:
            raise ValueError(f"gap values must lie in (0, 1], max is {v.max():.6g}")

    def dot(self, s):
        if self.derivative is not None:
            return self.derivative(s)
        return _central_diff(self.omega, s)

    @classmethod
    def constant(cls, value: float = 1.0) -> "GapProfile":
        v = float(value)
        g = cls(lambda s: v + 0.0 * np.asarray(s, dtype=float),
                lambda s: 0.0 * np.asarray(s, dtype=float), f"constant({v:g})",
                lambda s: v * np.asarray(s, dtype=float))
        g.validate()
        return g

    @classmethod
    def two_crossing(cls, depth: float = 0.99, floor: float = 0.01) -> "GapProfile":
        """``Omega(s) = depth cos^2(2 pi s) + floor``; narrowest at s = 1/4, 3/4."""
        def omega(s):
            return depth * np.cos(2 * np.pi * np.asarray(s)) ** 2 + floor

        def d_omega(s):
            return -2 * np.pi * depth * np.sin(4 * np.pi * np.asarray(s))

        def integral(s):
            s = np.asarray(s, dtype=float)
            return floor * s + depth * (s / 2 + np.sin(4 * np.pi * s) / (8 * np.pi))

        g = cls(omega, d_omega, f"two_crossing({depth:g},{floor:g})", integral)
        g.validate()
        return g

    @classmethod
    def tabulated(cls, s: Sequence[float], omega: Sequence[float]) -> "GapProfile":
        s = np.asarray(s, dtype=float)
        w = np.asarray(omega, dtype=float)
        if s.shape != w.shape or s.size < 4:
            raise ValueError("tabulated gap needs matching s and omega arrays of length >= 4")
        if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
            raise ValueError("tabulated gap grid must increase strictly from 0 to 1")
        if w.min() <= 0.0 or w.max() > 1.0:
            raise ValueError("tabulated gap values must lie in (0, 1]")
        sp = interpolate.CubicSpline(s, w)
        g = cls(sp, sp.derivative(), "tabulated")
        g.validate()
        return g


@dataclass(frozen=True)
class GaussianProgression:
    """Gaussian pulse train for ``d theta/d tau``.

    ``d theta/d tau = c * sum_k exp(-alpha^2 (tau - tau_k)^2)`` with centers
    ``tau_k = tau_f/2 + offset_k``. The amplitude ``c`` normalizes the
    full-line integral to ``total_angle``; the part lost by truncating to
    ``[0, tau_f]`` is bounded by :attr:`containment`.
    """

    alpha: float
    offsets: tuple = (0.0,)
    total_angle: float = math.pi / 2
    tau_f: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(float(o) for o in self.offsets))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.tau_f > 0:
            raise ValueError("tau_f must be positive")
        if not self.offsets:
            raise ValueError("at least one pulse is required")
        if any(not 0.0 < c < self.tau_f for c in self.centers):
            raise ValueError("pulse centers must lie inside (0, tau_f)")

    @property
    def centers(self) -> tuple:
        return tuple(0.5 * self.tau_f + o for o in self.offsets)

    @property
    def amplitude(self) -> float:
        return self.total_angle * self.alpha / (len(self.offsets) * math.sqrt(math.pi))

    @property
    def tau_star(self) -> float:
        return min(min(c, self.tau_f - c) for c in self.centers)

    @property
    def containment(self) -> float:
        """``alpha * tau_star``; values below about 2 leak visible pulse weight."""
        return self.alpha * self.tau_star

    @property
    def width(self) -> float:
        return 1.0 / self.alpha

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = sum(np.exp(-(self.alpha * (tau - c)) ** 2) for c in self.centers)
        return self.amplitude * out

    def angle(self, tau):
        """Closed-form ``theta(tau) = int_0^tau d theta/d tau``, a sum of erf terms."""
        tau = np.asarray(tau, dtype=float)
        a = self.alpha
        k = self.amplitude * math.sqrt(math.pi) / (2 * a)
        return k * sum(special.erf(a * (tau - c)) + special.erf(a * c) for c in self.centers)


def two_step_gaussian(alpha: float, mu: float, tau_f: float,
                      total_angle: float = math.pi / 2) -> GaussianProgression:
    """Two pulses at ``tau_f/2 -+ mu`` sharing ``total_angle`` (``c = alpha sqrt(pi)/4``)."""
    return GaussianProgression(alpha, (-mu, mu), total_angle, tau_f)


def gaussian_progression_fn(g: GaussianProgression) -> Callable:
    """Return ``d theta/d tau`` of ``g`` as a function of ``tau``.

    Warns (:class:`ScheduleWarning`) when ``alpha * tau_star < 2``.
    """
    if g.containment < 2.0:
        warnings.warn(f"Gaussian pulses poorly contained: alpha*tau_star = {g.containment:.3g} < 2",
                      ScheduleWarning, stacklevel=2)
    return g.__call__


@dataclass(frozen=True)
class CumulativeGap:
    """``tau(s)`` and its inverse ``s(tau)`` as dense interpolants."""

    tau: Callable
    s_of_tau: Callable
    tau_f: float


def _scalar(f):
    return lambda x: float(np.asarray(f(x)).reshape(-1)[0])


@dataclass(frozen=True, eq=False)
class AngularSchedule:
    """Angular schedule ``(Omega(s), theta(s))`` on ``s`` in ``[0, 1]``.

    Parameters
    ----------
    gap : GapProfile
        ``Omega(s)``.
    theta : callable
        Rotation angle in radians.
    theta_dot : callable, optional
        ``d theta/d s``; central differences when omitted.
    progression : GaussianProgression, optional
        Set by :func:`synthesize_schedule`; lets solvers use the exact
        pulse train in ``tau`` instead of inverting ``tau(s)``.
    tau_fn : callable, optional
        Precomputed ``tau(s)``.
    """

    gap: GapProfile
    theta: Callable
    theta_dot: Callable | None = None
    progression: GaussianProgression | None = None
    tau_fn: Callable | None = None
    label: str = "angular"
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False)

    def omega(self, s):
        return self.gap(s)

    def dtheta_ds(self, s):
        if self.theta_dot is not None:
            return self.theta_dot(s)
        return _central_diff(self.theta, s)

    def progression_s(self, s):
        """``d theta/d tau`` as a function of ``s``."""
        return self.dtheta_ds(s) / self.gap(s)

    @functools.cached_property
    def cumulative(self) -> CumulativeGap:
        return cumulative_gap(self)

    @property
    def tau_f(self) -> float:
        return self.cumulative.tau_f

    @functools.cached_property
    def drive(self) -> "Drive":
        """``d theta/d tau`` as a function of ``tau`` plus step hints."""
        if self.progression is not None:
            p = self.progression
            return Drive(p.__call__, p.tau_f, p.centers, 0.5 * p.width, p.total_angle)
        cum = self.cumulative
        s_of_tau = cum.s_of_tau

        def prog(tau):
            s = s_of_tau(tau)
            return self.progression_s(s)

        return Drive(prog, cum.tau_f, (), cum.tau_f / 256,
                     float(self.theta(1.0) - self.theta(0.0)))


@dataclass(frozen=True)
class Drive:
    """Progression in ``tau`` with hints for quadrature and ODE steps."""

    prog: Callable
    tau_f: float
    centers: tuple
    max_step: float
    total_angle: float


def linear_schedule() -> CartesianSchedule:
    """``A(s) = 1 - s``, ``B(s) = s`` with analytic derivatives."""
    return CartesianSchedule(lambda s: 1.0 - np.asarray(s, dtype=float),
                             lambda s: np.asarray(s, dtype=float) + 0.0,
                             lambda s: -1.0 + 0.0 * np.asarray(s, dtype=float),
                             lambda s: 1.0 + 0.0 * np.asarray(s, dtype=float))


def angular_from_cartesian(c: CartesianSchedule, label: str = "cartesian") -> AngularSchedule:
    """Convert ``(A, B)`` to ``(Omega, theta)`` with ``theta`` unwrapped from s = 0.

    Raises
    ------
    GapClosureError
        If ``A^2 + B^2`` vanishes on the check grid.
    """
    grid = np.linspace(0.0, 1.0, _TABLE_POINTS)
    a, b = np.asarray(c.A(grid), float), np.asarray(c.B(grid), float)
    om = np.hypot(a, b)
    i = int(np.argmin(om))
    # a zero can fall between grid points; refine around the smallest sample
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(lambda s: float(c.A(s)) ** 2 + float(c.B(s)) ** 2,
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    if min(om[i], math.sqrt(max(res.fun, 0.0))) <= 1e-7:
        raise GapClosureError(f"gap closes near s = {res.x:.6g}")
    unwrapped = np.unwrap(np.arctan2(b, a))

    def theta(s):
        s_arr = np.asarray(s, dtype=float)
        raw = np.arctan2(c.B(s_arr), c.A(s_arr))
        ref = np.interp(s_arr, grid, unwrapped)
        return raw + 2 * np.pi * np.round((ref - raw) / (2 * np.pi))

    def theta_dot(s):
        A, B = c.A(s), c.B(s)
        dA, dB = c.derivatives(s)
        return (dB * A - dA * B) / (A * A + B * B)

    def omega(s):
        s = np.asarray(s, dtype=float)
        return np.hypot(c.A(s), c.B(s))

    def d_omega(s):
        A, B = c.A(s), c.B(s)
        dA, dB = c.derivatives(s)
        return (A * dA + B * dB) / np.hypot(A, B)

    return AngularSchedule(GapProfile(omega, d_omega, "from_cartesian"), theta, theta_dot, label=label)


def cartesian_from_angular(a: AngularSchedule) -> CartesianSchedule:
    """``A = Omega cos(theta)``, ``B = Omega sin(theta)`` with chain-rule derivatives."""
    def A(s):
        return a.gap(s) * np.cos(a.theta(s))

    def B(s):
        return a.gap(s) * np.sin(a.theta(s))

    def dA(s):
        th = a.theta(s)
        return a.gap.dot(s) * np.cos(th) - a.gap(s) * a.dtheta_ds(s) * np.sin(th)

    def dB(s):
        th = a.theta(s)
        return a.gap.dot(s) * np.sin(th) + a.gap(s) * a.dtheta_ds(s) * np.cos(th)

    return CartesianSchedule(A, B, dA, dB)


def cumulative_gap(a: AngularSchedule, tol: ToleranceConfig | None = None) -> CumulativeGap:
    """Solve ``d tau/d s = Omega(s)`` and the inverse ``d s/d tau = 1/Omega``."""
    tol = tol or a.tol
    om = _scalar(a.gap)
    if a.tau_fn is not None:
        tau = a.tau_fn
        tau_f = float(tau(1.0))
    else:
        fwd = integrate_ode(lambda s, y: [om(s)], [0.0], (0.0, 1.0), tol, max_step=1 / 64)
        tau_f = float(fwd.final[0])

        def tau(s, fwd=fwd):
            return fwd(s)[0]

    inv = integrate_ode(lambda t, y: [1.0 / om(min(max(y[0], 0.0), 1.0))], [0.0],
                        (0.0, tau_f), tol, max_step=tau_f / 64)

    def s_of_tau(t, inv=inv):
        return np.clip(inv(t)[0], 0.0, 1.0)

    return CumulativeGap(tau, s_of_tau, tau_f)


def progression_from_schedule(c: CartesianSchedule) -> Callable:
    """``d theta/d tau = (B'A - A'B)/Omega^3`` as a function of ``s``.

    Raises
    ------
    GapClosureError
        When evaluated where ``Omega = 0``.
    """
    def prog(s):
        A, B = c.A(s), c.B(s)
        dA, dB = c.derivatives(s)
        om2 = A * A + B * B
        if np.any(np.asarray(om2) <= 0.0):
            raise GapClosureError("gap closes: A = B = 0")
        return (dB * A - dA * B) / om2 ** 1.5

    return prog


def synthesize_schedule(gap: GapProfile, prog: GaussianProgression,
                        tol: ToleranceConfig | None = None,
                        rescale_to_gap: bool = False) -> AngularSchedule:
    """Build the schedule whose progression in ``tau`` is ``prog``.

    Integrates ``d tau/d s = Omega``, ``d theta/d s = Omega prog(tau)`` from
    ``theta(0) = 0``. ``prog.tau_f`` must equal the cumulative gap of
    ``gap``; with ``rescale_to_gap`` the progression is rebuilt on that
    duration, keeping offsets as fractions of ``tau_f``.

    Warns
    -----
    ScheduleWarning
        If ``theta(1)`` misses ``prog.total_angle`` by more than 1e-3.
    """
    tol = tol or DEFAULT_TOL
    gap.validate()
    om = _scalar(gap)
    if gap.integral is not None:
        tau_f = float(gap.integral(1.0))
    else:
        tau_f = float(integrate_ode(lambda s, y: [om(s)], [0.0], (0.0, 1.0), tol,
                                    max_step=1 / 64).final[0])
    if rescale_to_gap and abs(prog.tau_f - tau_f) > 1e-12:
        k = tau_f / prog.tau_f
        prog = GaussianProgression(prog.alpha / k, tuple(o * k for o in prog.offsets),
                                   prog.total_angle, tau_f)
    if abs(prog.tau_f - tau_f) > 1e-9 * max(1.0, tau_f):
        raise ValueError(f"progression duration {prog.tau_f:.12g} does not match "
                         f"the cumulative gap {tau_f:.12g}")
    p = prog.__call__
    sol = integrate_ode(lambda s, y: [om(s), om(s) * float(p(y[0]))], [0.0, 0.0], (0.0, 1.0),
                        tol, max_step=0.25 * prog.width)

    def tau(s, sol=sol):
        return sol(s)[0]

    def theta(s, sol=sol):
        return sol(s)[1]

    def theta_dot(s):
        return gap(s) * p(tau(s))

    dev = float(sol.final[1]) - prog.total_angle
    if abs(dev) > 1e-3:
        warnings.warn(f"synthesized theta(1) misses the target angle by {dev:.3g}; "
                      "progression and gap are inconsistent", ScheduleWarning, stacklevel=2)
    return AngularSchedule(gap, theta, theta_dot, progression=prog, tau_fn=tau,
                           label="synthesized", tol=tol)


def _tabulated_cartesian(d: dict) -> CartesianSchedule:
    s = np.asarray(d["s"], dtype=float)
    A = np.asarray(d["A"], dtype=float)
    B = np.asarray(d["B"], dtype=float)
    if not (s.shape == A.shape == B.shape) or s.ndim != 1 or s.size < 16:
        raise ValueError("tabulated schedule needs arrays s, A, B of equal length >= 16")
    if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
        raise ValueError("tabulated s must increase strictly from 0 to 1")
    a_sp, b_sp = interpolate.CubicSpline(s, A), interpolate.CubicSpline(s, B)
    return CartesianSchedule(a_sp, b_sp, a_sp.derivative(), b_sp.derivative())


_GAP_KEYS = {"constant": {"value"}, "two_crossing": {"depth", "floor"},
             "tabulated": {"s", "omega"}}
_SCHEDULE_KEYS = {"linear": set(), "tabulated": {"s", "A", "B"},
                  "gaussian2": {"alpha", "mu", "mu_fraction", "total_angle", "gap"}}


def _check_keys(d: dict, allowed: dict, what: str, default=None) -> str:
    form = d.get("form", default)
    if form not in allowed:
        raise ValueError(f"unknown {what} form {form!r}")
    extra = set(d) - allowed[form] - {"form"}
    if extra:
        raise ValueError(f"unknown keys for {what} form {form!r}: {sorted(extra)}")
    return form


def gap_from_dict(d: dict | None) -> GapProfile:
    """Gap block: ``{"form": "constant", "value": v}``, ``{"form": "two_crossing",
    "depth": .., "floor": ..}`` or ``{"form": "tabulated", "s": [..], "omega": [..]}``."""
    if d is None:
        return GapProfile.constant(1.0)
    form = _check_keys(d, _GAP_KEYS, "gap", "constant")
    if form == "constant":
        return GapProfile.constant(d.get("value", 1.0))
    if form == "two_crossing":
        return GapProfile.two_crossing(d.get("depth", 0.99), d.get("floor", 0.01))
    return GapProfile.tabulated(d["s"], d["omega"])


def schedule_from_dict(d: dict) -> AngularSchedule:
    """Build a schedule from its JSON block.

    Forms: ``linear``; ``gaussian2`` with ``alpha``, ``mu`` (or
    ``mu_fraction`` of the cumulative gap), optional ``total_angle`` and
    ``gap``; ``tabulated`` with arrays ``s``, ``A``, ``B``.
    """
    form = _check_keys(d, _SCHEDULE_KEYS, "schedule")
    if form == "linear":
        return angular_from_cartesian(linear_schedule(), label="linear")
    if form == "tabulated":
        return angular_from_cartesian(_tabulated_cartesian(d), label="tabulated")
    if form == "gaussian2":
        gap = gap_from_dict(d.get("gap"))
        tau_f = float(gap.integral(1.0)) if gap.integral is not None else \
            cumulative_gap(AngularSchedule(gap, lambda s: s)).tau_f
        if "mu" in d:
            mu = float(d["mu"])
        elif "mu_fraction" in d:
            mu = float(d["mu_fraction"]) * tau_f
        else:
            raise ValueError("gaussian2 schedule needs 'mu' or 'mu_fraction'")
        prog = two_step_gaussian(float(d["alpha"]), mu, tau_f,
                                 float(d.get("total_angle", math.pi / 2)))
        return synthesize_schedule(gap, prog)


def find_s_of_tau(a: AngularSchedule, tau_target: float, xtol: float = 1e-10) -> float:
    """Invert ``tau(s) = tau_target`` by bracketing root search."""
    tau = a.cumulative.tau
    if not 0.0 <= tau_target <= a.tau_f:
        raise ValueError("target outside [0, tau_f]")
    return float(optimize.brentq(lambda s: float(tau(s)) - tau_target, 0.0, 1.0, xtol=xtol))
