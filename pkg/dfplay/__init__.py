"""Decentralized fictitious play in near-potential games.

Agents best-respond to local estimates of everyone's empirical action
frequencies, and refine those estimates by weighted averaging with their
neighbours on a time-varying communication graph.
"""

from .engine import DfpSettings, run, Trajectory
from .exc import AssumptionError, ConfigError, DfpError, GuardError, ShapeError
from .normal_form import JointMixedProfile, MixedStrategy, NormalFormGame


__version__ = "0.1.0"

__all__ = (
    "AssumptionError",
    "ConfigError",
    "DfpError",
    "DfpSettings",
    "GuardError",
    "JointMixedProfile",
    "MixedStrategy",
    "NormalFormGame",
    "run",
    "ShapeError",
    "Trajectory",
)
