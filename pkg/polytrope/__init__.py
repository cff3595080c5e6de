"""
polytrope

Lane-Emden polytropes: numerical integration from the regular center, the
scaling-symmetry reduction to a first-order (Abel) equation, the invariant
singular solution, and exact symmetry computations.
"""

from polytrope.core_ode import Index, PhaseState, SolverConfig, Termination, Trajectory, first_zero, integrate
from polytrope.errors import ConvergenceError, DomainError, PolytropeError

__all__ = [
    "ConvergenceError",
    "DomainError",
    "Index",
    "PhaseState",
    "PolytropeError",
    "SolverConfig",
    "Termination",
    "Trajectory",
    "first_zero",
    "integrate",
]
