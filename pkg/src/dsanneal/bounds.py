"""Analytic error bounds used as validity certificates.

Bounds annotate results; nothing in the package refuses to compute because a
bound is violated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "MAGNUS_RADIUS",
    "BoundReport",
    "fourier_extension_bound",
    "k2_extension_bound",
    "magnus_convergence_check",
    "tcl2_bound_report",
]

# sufficient convergence radius of the Magnus series for 2x2 generators
MAGNUS_RADIUS = 1.08686870


@dataclass(frozen=True)
class BoundReport:
    """Value of a bound, its inputs, and a pass/warn verdict against ``threshold``."""

    name: str
    value: float
    threshold: float
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("bound values are non-negative")

    @property
    def status(self) -> str:
        return "pass" if self.value <= self.threshold else "warn"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "status": self.status, "inputs": dict(self.inputs)}


def fourier_extension_bound(alpha: float, tau_star: float, threshold: float = 0.014) -> BoundReport:
    """Error from extending a Gaussian pulse integral to the whole line.

    ``eps <= exp(-x^2)/(sqrt(pi) x)`` with ``x = alpha tau_star``.
    """
    x = alpha * tau_star
    if not x > 0:
        raise ValueError("alpha * tau_star must be positive")
    value = math.exp(-x * x) / (math.sqrt(math.pi) * x)
    return BoundReport("fourier_extension", value, threshold,
                       {"alpha": alpha, "tau_star": tau_star})


def k2_extension_bound(alpha: float, tau_star: float, threshold: float = math.exp(-4.0)
                       ) -> BoundReport:
    """Error of the whole-line second-order term: ``eps2 <= exp(-(alpha tau_star)^2)``."""
    x = alpha * tau_star
    if x < 0:
        raise ValueError("alpha * tau_star must be non-negative")
    return BoundReport("k2_extension", math.exp(-x * x), threshold,
                       {"alpha": alpha, "tau_star": tau_star})


def magnus_convergence_check(phi_norm: float) -> BoundReport:
    """Pass iff the first-order norm ``|phi|`` lies inside the Magnus radius."""
    return BoundReport("magnus_convergence", abs(phi_norm), MAGNUS_RADIUS, {"phi_norm": phi_norm})


def tcl2_bound_report(bath, g: float, t_f: float, threshold: float = 0.2) -> BoundReport:
    """Second-order truncation certificate ``g^2 eta t_f / beta``."""
    from .bath import tcl2_validity

    v = tcl2_validity(bath, g, t_f, threshold)
    return BoundReport("tcl2_ratio", v.ratio, threshold,
                       {"eta": bath.eta, "beta": bath.beta, "g": g, "t_f": t_f})
