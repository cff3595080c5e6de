"""
polytrope/symmetry_solutions.py

The invariant (singular) solution of the Lane-Emden equation and the
one-parameter scaling group acting on solutions.

Invariant solution (n > 3):

    psi_s(r) = K r^(-2/(n-1)),   K = [2(n-3)/(n-1)^2]^(1/(n-1))

which solves psi^n = 2(n-3)/(n-1)^2 * psi/r^2. The group element with
parameter lam > 0 maps a solution psi to lam^(2/(n-1)) psi(lam r).
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from polytrope.core_ode import Index, IndexLike, PhaseState, Termination, Trajectory, as_index
from polytrope.errors import DomainError, EmptySourceError
from polytrope.reduction import canonical_exponent

#####################################
# Invariant Solution
#####################################


def _singular_index(n: IndexLike) -> Index:
    idx = as_index(n)
    if idx.value <= 3.0:
        raise DomainError(f"the invariant solution is real and positive only for n > 3, got n={idx}")
    return idx


def singular_coefficient(n: IndexLike) -> float:
    """2(n-3)/(n-1)^2, the right-hand factor of psi^n = c psi / r^2."""
    nv = as_index(n).value
    return 2.0 * (nv - 3.0) / (nv - 1.0) ** 2


@dataclass(frozen=True)
class SingularSolution:
    n: Index
    K: float

    @classmethod
    def for_index(cls, n: IndexLike) -> "SingularSolution":
        idx = _singular_index(n)
        return cls(idx, singular_coefficient(idx) ** (1.0 / (idx.value - 1.0)))

    @property
    def exponent(self) -> float:
        return canonical_exponent(self.n)

    def value(self, r: float) -> float:
        if r <= 0:
            raise DomainError("the invariant solution is singular at r = 0")
        return self.K * r ** (-self.exponent)


def singular_value(n: IndexLike, r: float) -> float:
    """psi_s(r) = K(n) r^(-2/(n-1))."""
    return SingularSolution.for_index(n).value(r)


def singular_state(n: IndexLike, r: float) -> PhaseState:
    """(r, psi_s, psi_s') with psi_s' = -2 psi_s/((n-1) r)."""
    solution = SingularSolution.for_index(n)
    psi = solution.value(r)
    return PhaseState(r, psi, -solution.exponent * psi / r)


def singular_second_derivative(n: IndexLike, r: float) -> float:
    """psi_s'' = 2(n+1) psi_s / ((n-1)^2 r^2)."""
    idx = _singular_index(n)
    psi = singular_value(idx, r)
    return 2.0 * (idx.value + 1.0) * psi / ((idx.value - 1.0) ** 2 * r * r)


def singular_samples(n: IndexLike, r_grid: Iterable[float]) -> list[PhaseState]:
    return [singular_state(n, float(r)) for r in r_grid]


#####################################
# Scaling Group
#####################################


@dataclass(frozen=True)
class GroupElement:
    """Element lam = e^(eps k) of the scaling group (k absorbed into lam)."""

    lam: float

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"group parameter must be positive and finite, got {self.lam}")

    def compose(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.lam * other.lam)

    def inverse(self) -> "GroupElement":
        return GroupElement(1.0 / self.lam)

    def act(self, n: IndexLike, state: PhaseState) -> PhaseState:
        """
        Image of a solution sample: the transformed solution takes at
        r/lam the value lam^p psi(r) and slope lam^(p+1) psi'(r).
        """
        p = canonical_exponent(n)
        weight = self.lam**p
        return PhaseState(state.r / self.lam, weight * state.psi, weight * self.lam * state.dpsi)


Source = Union[Trajectory, Sequence[PhaseState]]


def scale_solution(n: IndexLike, lam: float, source: Source) -> Trajectory:
    """
    Apply the scaling group to a sampled solution.

    Returns psi~(r) = lam^(2/(n-1)) psi(lam r) on the rescaled grid r/lam;
    a trajectory source keeps its termination and has xi1 rescaled.
    """
    idx = as_index(n)
    element = GroupElement(lam)
    samples = source.samples if isinstance(source, Trajectory) else tuple(source)
    if not samples:
        raise EmptySourceError("scale_solution needs at least one sample")
    scaled = tuple(element.act(idx, s) for s in samples)
    if isinstance(source, Trajectory):
        xi1 = None if source.xi1 is None else source.xi1 / lam
        return Trajectory(idx, scaled, source.termination, xi1)
    return Trajectory(idx, scaled, Termination.REACHED_END)


#####################################
# Consistency Checks
#####################################


def invariant_defect(n: IndexLike, r: float) -> float:
    """Relative defect |psi^n - c psi/r^2| / |psi^n| of the invariant solution at r."""
    idx = _singular_index(n)
    psi = singular_value(idx, r)
    lhs = psi**idx.value
    return abs(lhs - singular_coefficient(idx) * psi / (r * r)) / abs(lhs)
