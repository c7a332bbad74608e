"""Numeric substrate: 2x2 algebra over the Pauli basis, special functions,
adaptive ODE integration and quadrature (including principal values).

Everything here is a pure function of its inputs. Tolerances are collected
in :class:`ToleranceConfig` so that callers can tighten or relax them in one
place.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "PauliVector",
    "IDENTITY",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "su2_exp",
    "is_unitary",
    "density_diagnostics",
    "dawson",
    "erfc",
    "erfc_cdf",
    "Trajectory",
    "OdeFailure",
    "integrate_ode",
    "QuadratureError",
    "quad",
    "quad_pv",
    "cauchy_pv",
    "fourier_quad",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Solver tolerances shared by every numerical routine.

    Parameters
    ----------
    ode_rel_tol, ode_abs_tol : float
        Relative and absolute local error targets of the ODE integrator.
    quad_tol : float
        Absolute (and relative) target of adaptive quadratures.
    """

    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    quad_tol: float = 1e-10

    def __post_init__(self):
        for name in ("ode_rel_tol", "ode_abs_tol", "quad_tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


DEFAULT_TOL = ToleranceConfig()

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# ---------------------------------------------------------------------------
# Pauli algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PauliVector:
    """Operator ``c0*I + cx*X + cy*Y + cz*Z`` on a single qubit.

    Coefficients are complex in general. Real coefficients mean a Hermitian
    operator.
    """

    c0: complex = 0.0
    cx: complex = 0.0
    cy: complex = 0.0
    cz: complex = 0.0

    @classmethod
    def from_matrix(cls, m) -> "PauliVector":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(
            c0=complex(0.5 * (m[0, 0] + m[1, 1])),
            cx=complex(0.5 * (m[0, 1] + m[1, 0])),
            cy=complex(0.5j * (m[0, 1] - m[1, 0])),
            cz=complex(0.5 * (m[0, 0] - m[1, 1])),
        )

    def to_matrix(self) -> np.ndarray:
        c0, cx, cy, cz = self.c0, self.cx, self.cy, self.cz
        return np.array([[c0 + cz, cx - 1j * cy], [cx + 1j * cy, c0 - cz]], dtype=complex)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.cz], dtype=complex)

    def is_hermitian(self, atol: float = 0.0) -> bool:
        return all(abs(complex(c).imag) <= atol for c in (self.c0, self.cx, self.cy, self.cz))

    def __add__(self, other: "PauliVector") -> "PauliVector":
        return PauliVector(self.c0 + other.c0, self.cx + other.cx,
                           self.cy + other.cy, self.cz + other.cz)

    def __mul__(self, k) -> "PauliVector":
        return PauliVector(k * self.c0, k * self.cx, k * self.cy, k * self.cz)

    __rmul__ = __mul__


def su2_exp(h: PauliVector) -> np.ndarray:
    """Return ``exp(-i h)`` for a Hermitian Pauli vector.

    Uses ``exp(-i eta n.sigma) = cos(eta) I - i sin(eta) n.sigma`` with the
    identity coefficient contributing a global phase.

    Parameters
    ----------
    h : PauliVector
        Hermitian generator (all coefficients real).

    Returns
    -------
    numpy.ndarray
        2x2 complex unitary.

    Raises
    ------
    ValueError
        If any coefficient has a non-zero imaginary part.
    """
    scale = max(1.0, *(abs(complex(c)) for c in (h.c0, h.cx, h.cy, h.cz)))
    if not h.is_hermitian(atol=1e-14 * scale):
        raise ValueError("su2_exp requires a Hermitian generator (real Pauli coefficients)")
    v = np.array([complex(h.cx).real, complex(h.cy).real, complex(h.cz).real])
    eta = math.sqrt(float(v @ v))
    # sin(eta)/eta stays finite as eta -> 0
    sinc = np.sinc(eta / math.pi)
    nx, ny, nz = sinc * v
    c = math.cos(eta)
    u = np.array([[c - 1j * nz, -1j * nx - ny], [-1j * nx + ny, c + 1j * nz]], dtype=complex)
    return np.exp(-1j * complex(h.c0).real) * u


def is_unitary(u, atol: float = 1e-12) -> bool:
    u = np.asarray(u, dtype=complex)
    return bool(np.allclose(u.conj().T @ u, IDENTITY, rtol=0, atol=atol)
                and abs(abs(np.linalg.det(u)) - 1) <= atol)


def density_diagnostics(rho) -> dict:
    """Trace error, hermiticity error and minimum eigenvalue of ``rho``.

    Accepts a single 2x2 matrix or a stack of shape ``(n, 2, 2)``; the
    returned values are worst cases over the stack.
    """
    r = np.asarray(rho, dtype=complex).reshape(-1, 2, 2)
    tr = np.abs(r[:, 0, 0] + r[:, 1, 1] - 1)
    herm = np.abs(r - np.conj(np.swapaxes(r, 1, 2))).max(axis=(1, 2))
    hs = 0.5 * (r + np.conj(np.swapaxes(r, 1, 2)))
    eig = np.linalg.eigvalsh(hs)[:, 0]
    return {"trace_err": float(tr.max()), "herm_err": float(herm.max()),
            "min_eig": float(eig.min())}


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

def dawson(x):
    """Dawson integral ``D(x) = exp(-x^2) * int_0^x exp(t^2) dt``."""
    return special.dawsn(x)


def erfc(x):
    """Complementary error function."""
    return special.erfc(x)


def erfc_cdf(x):
    """Standard normal cumulative distribution ``(1 + erf(x/sqrt 2))/2``.

    Evaluated as ``erfc(-x/sqrt 2)/2`` which keeps full relative accuracy
    in the lower tail.
    """
    return 0.5 * special.erfc(-np.asarray(x) / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# ODE integration
# ---------------------------------------------------------------------------

class OdeFailure(RuntimeError):
    """Integrator gave up; ``time`` is where the step size collapsed."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (at t = {time:.9g})")
        self.time = time


@dataclass(frozen=True)
class Trajectory:
    """Dense ODE solution on ``[t0, t1]``.

    Calling the trajectory interpolates the state at arbitrary interior
    points; ``t`` and ``y`` hold the accepted steps.
    """

    t: np.ndarray
    y: np.ndarray
    dense: Callable
    nfev: int

    def __call__(self, t):
        return self.dense(t)

    @property
    def final(self) -> np.ndarray:
        return self.y[:, -1]


def integrate_ode(rhs: Callable, y0, span: Sequence[float],
                  tol: ToleranceConfig | None = None, max_step: float = np.inf,
                  first_step: float | None = None) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` with an adaptive 8(5,3) Runge-Kutta pair.

    Parameters
    ----------
    rhs : callable
        Right-hand side ``rhs(t, y)``. Complex states are supported.
    y0 : array_like
        Initial state.
    span : (float, float)
        Integration interval.
    tol : ToleranceConfig, optional
        Error targets, :data:`DEFAULT_TOL` when omitted.
    max_step : float, optional
        Upper bound on the step; needed whenever the generator has features
        narrower than the interval (e.g. localized pulses) that the
        controller could otherwise step over.

    Returns
    -------
    Trajectory

    Raises
    ------
    OdeFailure
        If the step size underflows.
    """
    tol = tol or DEFAULT_TOL
    y0 = np.atleast_1d(np.asarray(y0))
    t0, t1 = float(span[0]), float(span[1])
    if t1 == t0:
        y = y0.reshape(-1, 1)
        return Trajectory(np.array([t0]), y, lambda t: y0 if np.ndim(t) == 0 else
                          np.repeat(y, np.size(t), axis=1), 0)
    sol = integrate.solve_ivp(rhs, (t0, t1), y0, method="DOP853", dense_output=True,
                              rtol=tol.ode_rel_tol, atol=tol.ode_abs_tol,
                              max_step=max_step, first_step=first_step)
    if sol.status != 0:
        raise OdeFailure(f"ODE integration failed: {sol.message}", float(sol.t[-1]))
    return Trajectory(sol.t, sol.y, sol.sol, int(sol.nfev))


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach its tolerance."""


_QUAD_LIMIT = 2000


def _real_quad(f, a, b, tol, points=None, weight=None, wvar=None):
    kw = dict(epsabs=tol, epsrel=tol, limit=_QUAD_LIMIT)
    if points is not None and weight is None:
        pts = [p for p in points if a < p < b]
        if pts:
            kw["points"] = sorted(pts)
    if weight is not None:
        kw.update(weight=weight, wvar=wvar)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {exc}") from None
    if not math.isfinite(val):
        raise QuadratureError(f"quadrature on [{a}, {b}] returned {val}")
    return val


def quad(f: Callable, a: float, b: float, tol: float | None = None, *,
         points: Sequence[float] | None = None, scale: float = 1.0,
         is_complex: bool = False):
    """Adaptive quadrature of ``f`` over ``[a, b]``.

    A semi-infinite upper limit is mapped onto ``[0, 1)`` by
    ``x = a + scale*u/(1-u)``; choose ``scale`` at the decay length of
    the integrand. Complex integrands are split into real and imaginary
    parts when ``is_complex`` is set.

    Raises
    ------
    QuadratureError
        If the error estimate stays above the tolerance.
    """
    tol = DEFAULT_TOL.quad_tol if tol is None else tol
    if math.isinf(b):
        if math.isinf(a):
            raise ValueError("only the upper limit may be infinite")

        def g(u, f=f):
            if u >= 1.0:
                return 0.0
            return f(a + scale * u / (1 - u)) * scale / (1 - u) ** 2

        mapped = None
        if points is not None:
            mapped = [(p - a) / (p - a + scale) for p in points if p > a]
        return quad(g, 0.0, 1.0, tol, points=mapped, is_complex=is_complex)
    if is_complex:
        re = _real_quad(lambda x: complex(f(x)).real, a, b, tol, points)
        im = _real_quad(lambda x: complex(f(x)).imag, a, b, tol, points)
        return complex(re, im)
    return _real_quad(f, a, b, tol, points)


def quad_pv(f: Callable, pole: float, a: float, b: float, tol: float | None = None, *,
            points: Sequence[float] | None = None) -> float:
    """Cauchy principal value of ``int_a^b f(x) dx`` with a simple pole of ``f``.

    The interval symmetric about the pole, ``[pole-d, pole+d]``, is folded
    onto ``[0, d]`` where ``f(pole+u) + f(pole-u)`` is regular; the
    remainder is integrated directly.
    """
    tol = DEFAULT_TOL.quad_tol if tol is None else tol
    if not a < pole < b:
        raise ValueError(f"pole {pole} must lie strictly inside ({a}, {b})")
    d = 0.5 * min(pole - a, b - pole)
    pts = list(points or [])
    core = _real_quad(lambda u: f(pole + u) + f(pole - u), 0.0, d, tol,
                      [abs(p - pole) for p in pts])
    left = _real_quad(f, a, pole - d, tol, pts)
    right = _real_quad(f, pole + d, b, tol, pts)
    return core + left + right


def cauchy_pv(g: Callable, pole: float, a: float, b: float, tol: float | None = None, *,
              points: Sequence[float] | None = None) -> float:
    """Principal value of ``int_a^b g(x)/(x - pole) dx`` for regular ``g``.

    Singularity subtraction: the regular part ``(g(x) - g(pole))/(x - pole)``
    is integrated adaptively and the subtracted term contributes
    ``g(pole) * log((b - pole)/(pole - a))``.
    """
    tol = DEFAULT_TOL.quad_tol if tol is None else tol
    if not a < pole < b:
        raise ValueError(f"pole {pole} must lie strictly inside ({a}, {b})")
    g0 = g(pole)

    def h(x):
        dx = x - pole
        return 0.0 if dx == 0.0 else (g(x) - g0) / dx

    pts = [pole] + list(points or [])
    return _real_quad(h, a, b, tol, pts) + g0 * math.log((b - pole) / (pole - a))


def fourier_quad(f: Callable, t: float, kind: str, a: float, b: float,
                 tol: float | None = None) -> float:
    """``int_a^b f(x) cos(t x) dx`` (``kind='cos'``) or the sine analogue.

    Oscillatory weights are handled by QUADPACK's modified Clenshaw-Curtis
    rules, which stay accurate for large ``t`` where plain adaptive rules
    stall. The interval must be finite; truncate decaying integrands.
    """
    tol = DEFAULT_TOL.quad_tol if tol is None else tol
    if kind not in ("cos", "sin"):
        raise ValueError("kind must be 'cos' or 'sin'")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("fourier_quad needs a finite interval")
    if t == 0.0:
        return 0.0 if kind == "sin" else _real_quad(f, a, b, tol)
    return _real_quad(f, a, b, tol, weight=kind, wvar=t)
