"""
polytrope/core_ode.py

Evaluate and integrate the Lane-Emden equation

    psi'' + (2/r) psi' = -psi^n

from the regular center psi(0) = 1, psi'(0) = 0, detect the first zero xi1,
and provide the closed-form solutions (n = 0, 1, 5) used as oracles.

Integration starts at r_switch from the Taylor series of the regular
solution, then hands over to the adaptive Dormand-Prince pair in
polytrope.integrator.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from polytrope.errors import ConvergenceError, DomainError, UnsupportedIndexError
from polytrope.integrator import Step, dopri_step, dormand_prince_steps
from utils.utils_logger import logger

#####################################
# Domain Types
#####################################

MAX_INDEX = 10.0
ZERO_MAX_ITER = 200


@dataclass(frozen=True)
class Index:
    """Polytropic index n, with an exact rational twin when one is known."""

    value: float
    exact: Optional[Fraction] = None

    @classmethod
    def of(cls, n: "IndexLike") -> "Index":
        if isinstance(n, Index):
            return n
        if isinstance(n, bool):
            raise DomainError("polytropic index must be a number")
        if isinstance(n, (int, Fraction)):
            return cls(float(n), Fraction(n))
        if isinstance(n, str):
            exact = Fraction(n.strip())
            try:
                value = float(exact)
            except OverflowError:
                value = math.inf
            if not math.isfinite(value):
                raise DomainError(f"polytropic index must be finite, got {n!r}")
            return cls(value, exact)
        value = float(n)
        if not math.isfinite(value):
            raise DomainError(f"polytropic index must be finite, got {n!r}")
        # shortest decimal repr: 1.5 -> 3/2, 0.1 -> 1/10
        return cls(value, Fraction(repr(value)))

    @property
    def is_integer(self) -> bool:
        return float(self.value).is_integer()

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return format(self.value, "g")


IndexLike = Union[Index, int, float, Fraction, str]


def as_index(n: IndexLike) -> Index:
    """Coerce a number (or numeric string such as '3/2') to an Index."""
    return Index.of(n)


def check_numeric_index(n: Index) -> None:
    """Numeric integration accepts 0 <= n <= 10."""
    if n.value < 0:
        raise DomainError(f"negative polytropic index n={n} is not supported")
    if n.value > MAX_INDEX:
        raise DomainError(f"polytropic index n={n} exceeds the supported range [0, {MAX_INDEX:g}]")


class Termination(str, Enum):
    """Why an integration stopped."""

    FIRST_ZERO = "first_zero"
    REACHED_R_MAX = "reached_r_max"
    STEP_BUDGET_EXHAUSTED = "step_budget_exhausted"
    BLOW_UP = "blow_up"
    REACHED_END = "reached_end"


@dataclass(frozen=True)
class PhaseState:
    """A point (r, psi, psi') on a solution curve."""

    r: float
    psi: float
    dpsi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r) and math.isfinite(self.psi) and math.isfinite(self.dpsi)):
            raise DomainError(f"phase state must be finite: {self}")
        if self.r < 0:
            raise DomainError(f"radius must be nonnegative, got r={self.r}")


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and limits shared by every adaptive integration."""

    rtol: float = 1e-10
    atol: float = 1e-12
    r_switch: float = 1e-3
    r_max: float = 20.0
    max_steps: int = 1_000_000

    def __post_init__(self) -> None:
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError(f"tolerances must be positive (rtol={self.rtol}, atol={self.atol})")
        if not (0 < self.r_switch < self.r_max):
            raise DomainError(f"need 0 < r_switch < r_max (r_switch={self.r_switch}, r_max={self.r_max})")
        if self.max_steps <= 0:
            raise DomainError(f"max_steps must be positive, got {self.max_steps}")

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    """Ordered solution samples plus the reason the integration stopped."""

    n: Index
    samples: tuple[PhaseState, ...]
    termination: Termination
    xi1: Optional[float] = None

    def __post_init__(self) -> None:
        radii = [s.r for s in self.samples]
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise DomainError("trajectory samples must be strictly increasing in r")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def r(self) -> np.ndarray:
        return np.array([s.r for s in self.samples])

    @property
    def psi(self) -> np.ndarray:
        return np.array([s.psi for s in self.samples])

    @property
    def dpsi(self) -> np.ndarray:
        return np.array([s.dpsi for s in self.samples])

    @property
    def minus_dpsi_at_xi1(self) -> Optional[float]:
        """-psi'(xi1) when the trajectory ends on its first zero."""
        if self.xi1 is None:
            return None
        for state in reversed(self.samples):
            if state.r == self.xi1:
                return -state.dpsi
        return None

    def value_at(self, r: float, rel: float = 1e-12) -> PhaseState:
        """Return the sample at radius r (grid lookup, not interpolation)."""
        radii = self.r
        i = int(np.argmin(np.abs(radii - r)))
        if abs(radii[i] - r) > rel * max(1.0, abs(r)):
            raise KeyError(f"no sample at r={r}")
        return self.samples[i]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.r, "psi": self.psi, "dpsi": self.dpsi})


#####################################
# Right-Hand Side
#####################################


def _power(psi: float, n: Index) -> float:
    if n.is_integer:
        return psi ** int(n.value)
    if psi < 0:
        raise DomainError(f"psi={psi} < 0 has no real power for non-integer n={n}")
    return psi**n.value


def le_rhs(n: IndexLike, state: PhaseState) -> tuple[float, float]:
    """
    First-order form of the Lane-Emden equation.

    Returns:
        (psi', omega) with omega = -psi^n - 2 psi'/r.

    Raises:
        DomainError: at r = 0 (use series_start there) or for psi < 0 with
        non-integer n.
    """
    idx = as_index(n)
    if state.r <= 0:
        raise DomainError("le_rhs is singular at r=0; start from series_start")
    return state.dpsi, -_power(state.psi, idx) - 2.0 * state.dpsi / state.r


def _integration_rhs(n: Index):
    """Vector field for the integrator; beyond the zero, non-integer powers are clipped at 0."""
    if n.is_integer:
        k = int(n.value)

        def rhs(r: float, y: np.ndarray) -> np.ndarray:
            return np.array([y[1], -(y[0] ** k) - 2.0 * y[1] / r])

    else:
        p = n.value

        def rhs(r: float, y: np.ndarray) -> np.ndarray:
            return np.array([y[1], -(max(y[0], 0.0) ** p) - 2.0 * y[1] / r])

    return rhs


#####################################
# Series Start
#####################################


def series_start(n: IndexLike, r0: float, r_switch: float = 1.0) -> PhaseState:
    """
    Regular solution near the center from its Taylor series.

        psi  = 1 - r^2/6 + n r^4/120 - n(8n-5) r^6/15120
        psi' =   - r/3   + n r^3/30  - n(8n-5) r^5/2520

    r_switch bounds the radius the series may be used at.
    """
    idx = as_index(n)
    if not (0 < r0 <= r_switch):
        raise DomainError(f"series start needs 0 < r0 <= {r_switch:g}, got r0={r0}")
    nv = idx.value
    c6 = nv * (8.0 * nv - 5.0)
    r2 = r0 * r0
    psi = 1.0 - r2 / 6.0 + nv * r2 * r2 / 120.0 - c6 * r2 * r2 * r2 / 15120.0
    dpsi = -r0 / 3.0 + nv * r2 * r0 / 30.0 - c6 * r2 * r2 * r0 / 2520.0
    return PhaseState(r0, psi, dpsi)


#####################################
# Integration
#####################################


def _refine_zero(rhs, step: Step, atol: float) -> PhaseState:
    """Locate psi = 0 inside an accepted step by re-stepping from its left end."""
    x0, y0 = step.x_prev, step.y_prev

    def psi_at(r: float) -> float:
        y, _, _ = dopri_step(rhs, x0, y0, r - x0)
        return float(y[0])

    if step.y[0] == 0.0 or psi_at(step.x) > 0.0:
        return PhaseState(step.x, float(step.y[0]), float(step.y[1]))

    root = brentq(psi_at, x0, step.x, xtol=1e-14, maxiter=ZERO_MAX_ITER)
    y, _, _ = dopri_step(rhs, x0, y0, root - x0)
    if abs(y[0]) > atol:
        logger.warning(f"zero refinement stopped at |psi|={abs(y[0]):.3e} > atol={atol:.1e}")
    return PhaseState(float(root), float(y[0]), float(y[1]))


def integrate(
    n: IndexLike,
    config: Optional[SolverConfig] = None,
    *,
    r_eval: Optional[Sequence[float]] = None,
    start: Optional[PhaseState] = None,
    continue_past_zero: bool = False,
) -> Trajectory:
    """
    Integrate the Lane-Emden equation outward from the regular center.

    Args:
        n:       polytropic index, 0 <= n <= 10.
        config:  tolerances and limits (defaults: SolverConfig()).
        r_eval:  optional increasing grid; samples are then taken exactly on
                 it (points at or below the start radius come from the series).
                 Without it every accepted step is a sample.
        start:   regular state to start from instead of series_start(n, r_switch).
        continue_past_zero: integer n only; keep going to r_max after xi1.

    Returns:
        Trajectory ending at the first zero, at r_max, or where the step
        budget ran out (termination says which).
    """
    idx = as_index(n)
    check_numeric_index(idx)
    config = config or SolverConfig()
    if continue_past_zero and not idx.is_integer:
        raise DomainError(f"psi^n is undefined past the zero for non-integer n={idx}")

    from_series = start is None
    if start is None:
        start = series_start(idx, config.r_switch, r_switch=config.r_switch)
    if not (0 < start.r < config.r_max):
        raise DomainError(f"start radius {start.r} must lie in (0, r_max={config.r_max})")

    samples: list[PhaseState] = []
    stops: Sequence[float] = ()
    stop_set: set[float] = set()
    if r_eval is not None:
        grid = np.asarray(r_eval, dtype=float)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or (grid.size and (grid[0] < 0 or grid[-1] > config.r_max)):
            raise DomainError("r_eval must be strictly increasing within [0, r_max]")
        inner = grid[grid <= start.r]
        if inner.size and not from_series:
            raise DomainError("r_eval points below a custom start radius cannot be sampled")
        for r in inner:
            if r == start.r:
                samples.append(start)
            elif r == 0.0:
                samples.append(PhaseState(0.0, 1.0, 0.0))
            else:
                samples.append(series_start(idx, float(r), r_switch=config.r_switch))
        stops = [float(r) for r in grid[grid > start.r]]
        stop_set = set(stops)
    else:
        samples.append(start)

    rhs = _integration_rhs(idx)
    termination: Optional[Termination] = None
    xi1: Optional[float] = None
    x_last = start.r
    steps = 0

    for step in dormand_prince_steps(
        rhs,
        start.r,
        (start.psi, start.dpsi),
        config.r_max,
        rtol=config.rtol,
        atol=config.atol,
        max_steps=config.max_steps,
        stops=stops,
    ):
        steps += 1
        x_last = step.x
        if xi1 is None and step.y_prev[0] > 0.0 and step.y[0] <= 0.0:
            zero = _refine_zero(rhs, step, config.atol)
            xi1 = zero.r
            if not continue_past_zero:
                samples.append(zero)
                termination = Termination.FIRST_ZERO
                break
            if r_eval is None and zero.r < step.x:
                samples.append(zero)
        if r_eval is None or (step.hit_stop and step.x in stop_set):
            samples.append(PhaseState(step.x, float(step.y[0]), float(step.y[1])))

    if termination is None:
        if x_last >= config.r_max:
            termination = Termination.REACHED_R_MAX
        else:
            termination = Termination.STEP_BUDGET_EXHAUSTED
            logger.warning(f"n={idx}: step budget of {config.max_steps} exhausted at r={x_last:.6g}")

    logger.debug(f"n={idx}: {steps} accepted steps, {len(samples)} samples, termination={termination.value}")
    return Trajectory(n=idx, samples=tuple(samples), termination=termination, xi1=xi1)


def first_zero(n: IndexLike, config: Optional[SolverConfig] = None) -> Optional[float]:
    """
    Smallest r > 0 with psi(r) = 0, or None if psi stays positive up to r_max.

    Raises:
        ConvergenceError: if the step budget runs out before a verdict.
    """
    trajectory = integrate(n, config)
    if trajectory.termination is Termination.STEP_BUDGET_EXHAUSTED:
        raise ConvergenceError(f"n={trajectory.n}: step budget exhausted before the first zero or r_max")
    return trajectory.xi1


#####################################
# Closed Forms
#####################################

CLOSED_FORM_INDICES = (0, 1, 5)


def _closed_form_case(n: IndexLike) -> int:
    idx = as_index(n)
    if idx.is_integer and int(idx.value) in CLOSED_FORM_INDICES:
        return int(idx.value)
    raise UnsupportedIndexError(f"no closed-form solution for n={idx}; known for n in {CLOSED_FORM_INDICES}")


def closed_form(n: IndexLike, r):
    """
    Regular closed-form solutions with psi(0) = 1.

        n = 0: 1 - r^2/6
        n = 1: sin(r)/r            (1 at r = 0)
        n = 5: (1 + r^2/3)^(-1/2)

    Accepts a scalar or an array of radii.
    """
    case = _closed_form_case(n)
    rr = np.asarray(r, dtype=float)
    if np.any(rr < 0):
        raise DomainError("closed_form needs r >= 0")
    if case == 0:
        out = 1.0 - rr**2 / 6.0
    elif case == 1:
        out = np.sinc(rr / np.pi)
    else:
        out = (1.0 + rr**2 / 3.0) ** -0.5
    return float(out) if out.ndim == 0 else out


def closed_form_derivative(n: IndexLike, r):
    """psi'(r) of the closed-form solutions."""
    case = _closed_form_case(n)
    rr = np.asarray(r, dtype=float)
    if np.any(rr < 0):
        raise DomainError("closed_form_derivative needs r >= 0")
    if case == 0:
        out = -rr / 3.0
    elif case == 1:
        small = rr < 1e-3
        safe = np.where(small, 1.0, rr)
        out = np.where(small, -rr / 3.0 + rr**3 / 30.0, (safe * np.cos(safe) - np.sin(safe)) / safe**2)
    else:
        out = -(rr / 3.0) * (1.0 + rr**2 / 3.0) ** -1.5
    return float(out) if out.ndim == 0 else out


def sample_closed_form(n: IndexLike, r_grid: Iterable[float]) -> list[PhaseState]:
    """Closed-form solution as phase states on a grid."""
    grid = np.asarray(list(r_grid), dtype=float)
    psi = np.atleast_1d(closed_form(n, grid))
    dpsi = np.atleast_1d(closed_form_derivative(n, grid))
    return [PhaseState(float(r), float(p), float(d)) for r, p, d in zip(grid, psi, dpsi)]


#####################################
# Residual Check
#####################################


def _derivative(r: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, slice]:
    """
    Centered finite-difference derivative of f at interior points.

    Uniform grids use the sixth-order stencil from seven points on and the
    fourth-order one for five or six points. Shorter or uneven grids fall
    back to the second-order three-point formula for uneven spacing.
    Returns the derivative and the slice of points it belongs to.
    """
    h = np.diff(r)
    uniform = r.size >= 5 and np.allclose(h, h[0], rtol=1e-6, atol=0.0)
    if uniform:
        step = (r[-1] - r[0]) / (r.size - 1)
        if r.size >= 7:
            d = (
                -f[:-6] + 9.0 * f[1:-5] - 45.0 * f[2:-4] + 45.0 * f[4:-2] - 9.0 * f[5:-1] + f[6:]
            ) / (60.0 * step)
            return d, slice(3, -3)
        d = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * step)
        return d, slice(2, -2)
    hm, hp = h[:-1], h[1:]
    d = (hm**2 * f[2:] - hp**2 * f[:-2] + (hp**2 - hm**2) * f[1:-1]) / (hm * hp * (hm + hp))
    return d, slice(1, -1)


def residual_check(n: IndexLike, samples: Sequence[PhaseState]) -> float:
    """
    sup |psi'' + 2 psi'/r + psi^n| over interior samples, with psi''
    estimated by centered differences of the sampled psi'.
    """
    idx = as_index(n)
    if len(samples) < 3:
        raise DomainError(f"residual_check needs at least 3 samples, got {len(samples)}")
    r = np.array([s.r for s in samples])
    psi = np.array([s.psi for s in samples])
    dpsi = np.array([s.dpsi for s in samples])
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise DomainError("residual_check needs strictly increasing r > 0")
    if not idx.is_integer and np.any(psi < 0):
        raise DomainError(f"psi < 0 in samples for non-integer n={idx}")

    ddpsi, inner = _derivative(r, dpsi)
    power = psi[inner] ** (int(idx.value) if idx.is_integer else idx.value)
    residual = ddpsi + 2.0 * dpsi[inner] / r[inner] + power
    return float(np.max(np.abs(residual)))
