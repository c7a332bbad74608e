"""Diabatic-interference annealing: closed and open two-level dynamics
driven by angular schedules."""

from . import bath, bounds, closed, numerics, opensystem, schedule
from .bath import OhmicBath
from .closed import ClosedRunSpec, solve_exact
from .opensystem import OpenRunSpec, solve_lindblad_rwa, solve_redfield
from .schedule import GapProfile, synthesize_schedule, two_step_gaussian

__all__ = [
    "bath", "bounds", "closed", "numerics", "opensystem", "schedule",
    "OhmicBath", "ClosedRunSpec", "solve_exact", "OpenRunSpec", "solve_lindblad_rwa",
    "solve_redfield", "GapProfile", "synthesize_schedule", "two_step_gaussian",
]
__version__ = "0.1.0"
