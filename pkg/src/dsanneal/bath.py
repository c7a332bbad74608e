"""Ohmic bath: spectral density, correlation function, one-sided Fourier
transforms and validity diagnostics.

Units are rad/ns for frequencies and ns for times. The bath strength ``eta``
multiplies every bath quantity linearly, so passing the product ``eta g^2``
as ``eta`` together with ``g = 1`` is equivalent to the split form.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate

from .numerics import DEFAULT_TOL, _real_quad, fourier_quad, quad

__all__ = [
    "HBAR_OVER_KB",
    "OhmicBath",
    "BathTimescales",
    "SpectralPair",
    "TCL2Validity",
    "RWAValidity",
    "spectral_density",
    "gamma_rate",
    "lamb_shift_S",
    "spectral_pair",
    "correlation_function",
    "correlation_table",
    "timescales",
    "tcl2_validity",
    "rwa_validity",
]

# hbar/k_B in ns*mK, so that beta[ns] = HBAR_OVER_KB / T[mK]
HBAR_OVER_KB = 7.6382


@dataclass(frozen=True)
class OhmicBath:
    """Ohmic bath ``J(omega) = eta omega exp(-omega/omega_c)`` at inverse temperature ``beta``."""

    eta: float
    omega_c: float
    beta: float

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if not (self.omega_c > 0 and self.beta > 0):
            raise ValueError("omega_c and beta must be positive")

    @classmethod
    def from_temperature(cls, eta: float, omega_c: float, temperature_mK: float) -> "OhmicBath":
        if not temperature_mK > 0:
            raise ValueError("temperature must be positive")
        return cls(eta, omega_c, HBAR_OVER_KB / temperature_mK)

    @property
    def temperature_mK(self) -> float:
        return HBAR_OVER_KB / self.beta

    def scaled(self, eta: float) -> "OhmicBath":
        return OhmicBath(eta, self.omega_c, self.beta)


@dataclass(frozen=True)
class BathTimescales:
    """``tau_B = beta/2pi``, ``tau_M = sqrt(2 beta/omega_c)``, ``tau_tr = beta ln(beta omega_c)``."""

    tau_B: float
    tau_M: float
    tau_tr: float


def spectral_density(b: OhmicBath, omega):
    """``J(omega) = eta omega exp(-omega/omega_c)`` for ``omega >= 0``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    return b.eta * w * np.exp(-w / b.omega_c)


def gamma_rate(b: OhmicBath, omega):
    """Emission/absorption rate ``gamma(omega)``.

    ``2 pi J(omega)/(1 - exp(-beta omega))`` for positive frequencies,
    ``2 pi eta/beta`` at zero and ``exp(beta omega) gamma(|omega|)`` for
    negative frequencies, which satisfies detailed balance by construction.
    """
    w = np.asarray(omega, dtype=float)
    a = np.abs(w)
    x = b.beta * a
    cut = np.exp(-a / b.omega_c)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pos = np.where(x > 0, a / -np.expm1(-x), 1.0 / b.beta)
        neg = np.where(x > 0, a / np.expm1(x), 1.0 / b.beta)
    out = 2 * np.pi * b.eta * cut * np.where(w >= 0, pos, neg)
    return out if out.ndim else float(out)


def _pv_support(b: OhmicBath) -> float:
    return 40.0 * b.omega_c


def lamb_shift_S(b: OhmicBath, omega, tol: float | None = None):
    """``S(omega) = (1/2pi) PV int gamma(w')/(omega - w') dw'`` on ``|w'| <= 40 omega_c``.

    The integral is split at the cutoff kink ``w' = 0``; the half holding the
    pole uses QUADPACK's Cauchy-weight rule, the other half is regular.
    """
    tol = 1e-10 if tol is None else tol
    if b.eta == 0:
        out = 0.0 * np.asarray(omega, dtype=float)
        return out if out.ndim else 0.0
    L = _pv_support(b)
    unit = b.scaled(1.0)
    g = lambda x: float(gamma_rate(unit, x))

    def one(w):
        if w == 0.0:
            # pole on the kink: fold the two halves onto each other
            return -b.eta * quad(lambda x: (g(x) - g(-x)) / x if x > 0 else 0.0,
                                0.0, L, tol) / (2 * np.pi)
        total = 0.0
        for lo, hi in ((-L, 0.0), (0.0, L)):
            if lo < w < hi:
                total += _real_quad(g, lo, hi, tol, weight="cauchy", wvar=w)
            else:
                total += quad(lambda x: g(x) / (x - w), lo, hi, tol)
        return -b.eta * total / (2 * np.pi)

    w = np.asarray(omega, dtype=float)
    out = np.vectorize(one, otypes=[float])(w)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SpectralPair:
    """``gamma(omega)`` and a tabulated ``S(omega)`` for one bath.

    ``S`` is interpolated in ``log|omega|`` on each side of zero, where the
    cutoff kink of ``gamma`` leaves an ``omega log|omega|`` term that a
    spline in ``omega`` would smear.
    """

    bath: OhmicBath
    s0: float
    pos: object
    neg: object
    lo: float
    hi: float

    def gamma(self, omega):
        return gamma_rate(self.bath, omega)

    def S(self, omega):
        w = np.asarray(omega, dtype=float)
        a = np.abs(w)
        out = np.empty_like(w)
        small = a < self.lo
        big = a > self.hi
        mid = ~(small | big)
        out[small] = self.s0
        u = np.log(a[mid])
        out[mid] = np.where(w[mid] > 0, self.pos(u), self.neg(u))
        if big.any():
            out[big] = lamb_shift_S(self.bath.scaled(1.0), w[big])
        return self.bath.eta * out if out.ndim else float(self.bath.eta * out)


@functools.lru_cache(maxsize=32)
def _unit_lamb_table(omega_c: float, beta: float, n: int) -> tuple:
    unit = OhmicBath(1.0, omega_c, beta)
    lo, hi = 1e-9, 10.0 * omega_c
    u = np.linspace(math.log(lo), math.log(hi), n)
    w = np.exp(u)
    pos = interpolate.CubicSpline(u, lamb_shift_S(unit, w))
    neg = interpolate.CubicSpline(u, lamb_shift_S(unit, -w))
    return float(lamb_shift_S(unit, 0.0)), pos, neg, lo, hi


def spectral_pair(b: OhmicBath, n: int = 161) -> SpectralPair:
    """:class:`SpectralPair` backed by a table cached per ``(omega_c, beta)``."""
    return SpectralPair(b, *_unit_lamb_table(b.omega_c, b.beta, n))


# integrands carry exp(-w/omega_c); exp(-60) is below double precision
_CORR_SUPPORT = 60.0


def _corr_quadrature(b: OhmicBath, t: float, tol: float) -> complex:
    wc, beta = b.omega_c, b.beta

    def re_f(w):
        if w == 0.0:
            return 2.0 / beta
        x = 0.5 * beta * w
        return w * math.exp(-w / wc) / math.tanh(x)

    def im_f(w):
        return w * math.exp(-w / wc)

    top = _CORR_SUPPORT * wc
    re = fourier_quad(re_f, abs(t), "cos", 0.0, top, tol)
    im = -fourier_quad(im_f, abs(t), "sin", 0.0, top, tol)
    if t < 0:
        im = -im
    return complex(b.eta * re, b.eta * im)


def correlation_function(b: OhmicBath, t, tol: float | None = None):
    """Bath correlation ``C(t) = int J(w)[coth(beta w/2) cos(wt) - i sin(wt)] dw``.

    Evaluated by oscillatory quadrature for each ``t``.
    """
    tol = DEFAULT_TOL.quad_tol if tol is None else tol
    t_arr = np.asarray(t, dtype=float)
    out = np.array([_corr_quadrature(b, float(x), tol) for x in t_arr.ravel()],
                   dtype=complex).reshape(t_arr.shape)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class CorrelationTable:
    """Spline of ``C(t)`` for ``0 <= t <= t_max`` (conjugated for ``t < 0``)."""

    t_max: float
    re: object
    im: object
    eta: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        if np.any(a > self.t_max * (1 + 1e-12)):
            raise ValueError(f"C(t) table covers |t| <= {self.t_max}")
        v = self.re(a) + 1j * np.sign(t + (t == 0)) * self.im(a)
        return self.eta * v


@functools.lru_cache(maxsize=16)
def _unit_table(omega_c: float, beta: float, t_max: float) -> tuple:
    unit = OhmicBath(1.0, omega_c, beta)
    # resolve the short-time scale min(beta, 1/omega_c) uniformly, then go geometric
    t_short = 8.0 * max(beta, 1.0 / omega_c)
    n_short = 801
    ts = np.linspace(0.0, t_short, n_short)
    tl = np.geomspace(t_short, t_max, max(2, int(60 * math.log10(t_max / t_short)) + 2))[1:]
    t = np.concatenate([ts, tl])
    # C(0) grows like omega_c^2; keep the absolute tolerance relative to it
    c = correlation_function(unit, t, tol=1e-12 * max(1.0, (omega_c / 4.0) ** 2))
    # spline in log t on the tail keeps the power-law decay smooth
    return t, c


def correlation_table(b: OhmicBath, t_max: float) -> CorrelationTable:
    """Cached spline table of ``C(t)`` up to at least ``t_max`` ns."""
    span = 64.0
    while span < t_max:
        span *= 2
    t, c = _unit_table(b.omega_c, b.beta, span)
    re = interpolate.CubicSpline(t, c.real)
    im = interpolate.CubicSpline(t, c.imag)
    return CorrelationTable(span, re, im, b.eta)


def timescales(b: OhmicBath) -> BathTimescales:
    """Thermal, memory and transition times of the bath (ns)."""
    if b.beta * b.omega_c <= 1.0:
        raise ValueError("transition time requires beta * omega_c > 1")
    return BathTimescales(b.beta / (2 * math.pi), math.sqrt(2 * b.beta / b.omega_c),
                          b.beta * math.log(b.beta * b.omega_c))


@dataclass(frozen=True)
class TCL2Validity:
    ratio: float
    threshold: float

    @property
    def ok(self) -> bool:
        return self.ratio <= self.threshold


def tcl2_validity(b: OhmicBath, g: float, t_f: float, threshold: float = 0.2) -> TCL2Validity:
    """Second-order validity ratio ``g^2 eta t_f / beta``; small means trustworthy."""
    return TCL2Validity(g * g * b.eta * t_f / b.beta, threshold)


@dataclass(frozen=True)
class RWAValidity:
    """Where the Bohr-frequency separation beats the inverse thermal time."""

    inverse_tau_B: float
    min_separation: float
    failing_fraction: float

    @property
    def ok(self) -> bool:
        return self.failing_fraction == 0.0


def rwa_validity(b: OhmicBath, schedule, t_f: float, n: int = 2001) -> RWAValidity:
    """Compare ``1/tau_B`` with the separation ``|d theta/ds|/t_f`` (rad/ns) along the anneal.

    Returns the fraction of the ``s`` grid where the separation is smaller;
    outside localized pulses this is expected and is not an error.
    """
    s = np.linspace(0.0, 1.0, n)
    sep = np.abs(np.asarray(schedule.dtheta_ds(s), dtype=float)) / t_f
    inv = 2 * math.pi / b.beta
    return RWAValidity(inv, float(sep.min()), float(np.mean(sep <= inv)))
