"""Simulation and verification lab for the exclusion-voter particle system.

Modules
-------
config       configurations, staircases and the two move types
kernel       exact one-step law, samplers, reachability
lyapunov     staircase functionals and the inequalities between them
drift        closed-form drifts checked against exact enumeration
coloured     the coloured-particle coupling
experiments  Monte Carlo: hitting times, tail indices, growth
"""

__version__ = "0.1.0"

from ._accel import backend_name
from .config import D1, GROUND, Configuration, from_blocks, from_string, parse
from .kernel import Params, step_distribution

__all__ = [
    "Configuration", "GROUND", "D1", "from_blocks", "from_string", "parse",
    "Params", "step_distribution", "backend_name", "__version__",
]
