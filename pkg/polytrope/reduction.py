"""
polytrope/reduction.py

Order reduction of the Lane-Emden equation along its scaling symmetry
(xi, eta) = (r, -2 psi/(n-1)).

Canonical variables (n != 1, p = 2/(n-1)):

    s = ln r,   t = psi * r^p          inverse: r = e^s, psi = t e^(-p s)

With u(t) = ds/dt the equation becomes first order,

    u' = a u^2 + (b t + t^n) u^3,    a = (n-5)/(n-1),  b = 2(3-n)/(n-1)^2,

and y = -1/u gives the Abel form y' = a - (b t + t^n)/y.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from polytrope.core_ode import (
    Index,
    IndexLike,
    PhaseState,
    SolverConfig,
    Termination,
    as_index,
    check_numeric_index,
    integrate,
)
from polytrope.errors import ConvergenceError, DomainError, UnusableIntervalError
from polytrope.integrator import dormand_prince_steps
from utils.utils_logger import logger

#####################################
# Constants
#####################################

BLOW_UP_LIMIT = 1e12
# near a finite-t singularity the step size underflows long before |u| = 1e12
UNDERFLOW_BLOW_UP_HINT = 1e6
MIN_WINDOW_SAMPLES = 16
# a 5-point stencil whose u varies by more than this fraction is not resolved
STENCIL_VARIATION_LIMIT = 0.05
DEGENERATE_EPS = 64.0 * np.finfo(float).eps

Number = Union[float, Fraction]

#####################################
# Domain Types
#####################################


@dataclass(frozen=True)
class CanonicalPoint:
    """(s, t, u) with s = ln r, t = psi r^(2/(n-1)), u = ds/dt."""

    s: float
    t: float
    u: float
    degenerate: bool = False

    @property
    def r(self) -> float:
        return math.exp(self.s)


@dataclass(frozen=True)
class AbelConstants:
    a: Number
    b: Number


class ReducedForm(str, Enum):
    U = "u"
    Y = "y"


@dataclass(frozen=True)
class ReducedTrajectory:
    """Samples (t, value) of the reduced equation (u-form) or the Abel form (y-form)."""

    n: Index
    form: ReducedForm
    samples: tuple[tuple[float, float], ...]
    termination: Termination

    def __post_init__(self) -> None:
        ts = [t for t, _ in self.samples]
        steps = np.diff(ts)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise DomainError("reduced trajectory samples must be strictly monotone in t")

    @property
    def t(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "value": self.values})


#####################################
# Helpers
#####################################


def _reduction_index(n: IndexLike) -> Index:
    idx = as_index(n)
    if idx.value == 1.0:
        raise DomainError("the scaling reduction is undefined for n = 1")
    return idx


def canonical_exponent(n: IndexLike) -> float:
    """p = 2/(n-1), the psi-weight of the scaling symmetry."""
    return 2.0 / (_reduction_index(n).value - 1.0)


def _t_power(t: float, n: Index) -> float:
    if t == 0.0 and n.value < 0:
        raise DomainError(f"t = 0 is a pole of t^n for negative n={n}")
    if n.is_integer:
        return t ** int(n.value)
    if t < 0:
        raise DomainError(f"t={t} < 0 has no real power for non-integer n={n}")
    return t**n.value


def reduced_to_abel(u: float) -> float:
    return -1.0 / u


def abel_to_reduced(y: float) -> float:
    return -1.0 / y


#####################################
# Constants and Point Transform
#####################################


def abel_constants(n: Union[IndexLike, Fraction]) -> AbelConstants:
    """
    a = (n-5)/(n-1), b = 2(3-n)/(n-1)^2.

    Exact (Fraction) results for int or Fraction input, floats otherwise.
    """
    if isinstance(n, (int, Fraction)) and not isinstance(n, bool):
        nn = Fraction(n)
        if nn == 1:
            raise DomainError("Abel constants are undefined for n = 1")
        return AbelConstants(a=(nn - 5) / (nn - 1), b=2 * (3 - nn) / (nn - 1) ** 2)
    nv = _reduction_index(n).value
    return AbelConstants(a=(nv - 5.0) / (nv - 1.0), b=2.0 * (3.0 - nv) / (nv - 1.0) ** 2)


def to_canonical(n: IndexLike, state: PhaseState) -> CanonicalPoint:
    """
    Map a phase state to canonical variables.

    u = (1/r) / (dt/dr) with dt/dr = r^(p-1) (psi' r + p psi). Where dt/dr
    vanishes the point lies on the invariant solution; the result is then
    flagged degenerate and u is infinite.
    """
    p = canonical_exponent(n)
    if state.r <= 0:
        raise DomainError("canonical variables need r > 0")
    s = math.log(state.r)
    t = state.psi * math.exp(p * s)
    g = state.dpsi * state.r + p * state.psi
    if abs(g) <= DEGENERATE_EPS * (abs(state.dpsi * state.r) + abs(p * state.psi)):
        logger.debug(f"degenerate direction at r={state.r:.6g} (dt/dr = 0)")
        return CanonicalPoint(s=s, t=t, u=math.inf, degenerate=True)
    return CanonicalPoint(s=s, t=t, u=math.exp(-p * s) / g)


def from_canonical(n: IndexLike, s: float, t: float) -> tuple[float, float]:
    """Inverse point transform: r = e^s, psi = t e^(2s/(1-n))."""
    p = canonical_exponent(n)
    return math.exp(s), t * math.exp(-p * s)


#####################################
# Reduced and Abel Equations
#####################################


def reduced_rhs(n: IndexLike, t: float, u: float) -> float:
    """u' = a u^2 + (b t + t^n) u^3."""
    idx = _reduction_index(n)
    c = abel_constants(idx)
    return c.a * u * u + (c.b * t + _t_power(t, idx)) * u**3


def abel_rhs(n: IndexLike, t: float, y: float) -> float:
    """y' = a - (b t + t^n)/y."""
    idx = _reduction_index(n)
    if y == 0:
        raise DomainError("the Abel form is singular at y = 0")
    c = abel_constants(idx)
    return c.a - (c.b * t + _t_power(t, idx)) / y


def conserved_n5(t: float, y: float) -> float:
    """Q = y^2/2 - t^2/8 + t^6/6, constant along n = 5 Abel solutions (a = 0)."""
    return 0.5 * y * y - t * t / 8.0 + t**6 / 6.0


def _vector_field(idx: Index, form: ReducedForm):
    c = abel_constants(idx)
    a, b = float(c.a), float(c.b)

    if form is ReducedForm.U:

        def rhs(t: float, v: np.ndarray) -> np.ndarray:
            u = v[0]
            return np.array([a * u * u + (b * t + _t_power(t, idx)) * u**3])

    else:

        def rhs(t: float, v: np.ndarray) -> np.ndarray:
            y = v[0]
            if y == 0.0:
                return np.array([math.inf])
            return np.array([a - (b * t + _t_power(t, idx)) / y])

    return rhs


def _escaped(form: ReducedForm, value: float, limit: float) -> bool:
    if not math.isfinite(value) or abs(value) > limit:
        return True
    return form is ReducedForm.Y and abs(value) < 1.0 / limit


def integrate_reduced(
    n: IndexLike,
    start: tuple[float, float],
    t1: float,
    form: Union[ReducedForm, str] = ReducedForm.U,
    config: Optional[SolverConfig] = None,
    *,
    t_eval: Optional[Sequence[float]] = None,
) -> ReducedTrajectory:
    """
    Integrate the reduced equation (u-form) or its Abel form (y-form).

    Args:
        n:      polytropic index, n != 1.
        start:  (t0, value0).
        t1:     end of the t-interval (may be below t0).
        form:   'u' or 'y'.
        config: tolerances and step budget (r_switch/r_max are not used).
        t_eval: optional points between t0 and t1 to sample exactly.

    Stops early with termination blow_up when |value| exceeds 1e12 (in the
    y-form also when |y| < 1e-12, i.e. |u| > 1e12), or when the step size
    underflows while the solution is already escaping.
    """
    idx = _reduction_index(n)
    form = ReducedForm(form)
    config = config or SolverConfig()
    t0, v0 = float(start[0]), float(start[1])
    if form is ReducedForm.Y and v0 == 0.0:
        raise DomainError("the y-form cannot start at y = 0")
    if not idx.is_integer and min(t0, t1) < 0:
        raise DomainError(f"t < 0 is outside the real domain for non-integer n={idx}")
    if idx.value < 0 and min(t0, t1) <= 0.0 <= max(t0, t1):
        raise DomainError(f"t = 0 is a pole of t^n for negative n={idx}")

    samples: list[tuple[float, float]] = [(t0, v0)]
    if t0 == t1:
        return ReducedTrajectory(idx, form, tuple(samples), Termination.REACHED_END)

    stops: Sequence[float] = ()
    stop_set: set[float] = set()
    if t_eval is not None:
        stops = [float(t) for t in t_eval if (t - t0) * (t1 - t) >= 0 and t != t0]
        stop_set = set(stops)

    rhs = _vector_field(idx, form)
    termination: Optional[Termination] = None
    t_last, v_last = t0, v0
    try:
        for step in dormand_prince_steps(
            rhs, t0, (v0,), t1, rtol=config.rtol, atol=config.atol, max_steps=config.max_steps, stops=stops
        ):
            t_last, v_last = step.x, float(step.y[0])
            escaped = _escaped(form, v_last, BLOW_UP_LIMIT)
            if t_eval is None or escaped or (step.hit_stop and step.x in stop_set):
                samples.append((t_last, v_last))
            if escaped:
                termination = Termination.BLOW_UP
                break
    except ConvergenceError as e:
        if not _escaped(form, v_last, UNDERFLOW_BLOW_UP_HINT):
            raise
        logger.warning(f"n={idx}: {form.value}-form escaping near t={t_last:.9g} ({e})")
        termination = Termination.BLOW_UP

    if termination is None:
        termination = Termination.REACHED_END if t_last == t1 else Termination.STEP_BUDGET_EXHAUSTED
    if termination is not Termination.REACHED_END:
        logger.warning(f"n={idx}: reduced integration stopped at t={t_last:.9g} ({termination.value})")
    return ReducedTrajectory(idx, form, tuple(samples), termination)


#####################################
# Round-Trip Check
#####################################


def _longest_sign_run(g: np.ndarray) -> slice:
    """Longest run of consecutive entries with the same nonzero sign."""
    signs = np.sign(g)
    best, best_len = slice(0, 0), 0
    start = 0
    for i in range(1, signs.size + 1):
        if i == signs.size or signs[i] != signs[start]:
            if signs[start] != 0 and i - start > best_len:
                best, best_len = slice(start, i), i - start
            start = i
    return best


def roundtrip_residual(
    n: IndexLike,
    config: Optional[SolverConfig] = None,
    *,
    r_lo: float = 0.1,
    r_hi: Optional[float] = None,
    dr: float = 1e-3,
) -> float:
    """
    Check the reduced equation against an integrated Lane-Emden solution.

    The solution is sampled on a uniform r-grid over [r_lo, r_hi] (r_hi
    defaults to r_max; the grid ends at the first zero), mapped to (t, u) on
    the longest window where dt/dr keeps one sign, and du/dt is estimated as
    (du/dr)/(dt/dr) with centered differences in r. Points whose stencil does
    not resolve u (near turning points of t) are skipped; the count goes to
    the debug log.

    Returns:
        sup |du/dt - reduced_rhs(n, t, u)| / max(1, |reduced_rhs|).

    Raises:
        UnusableIntervalError: fewer than 16 usable samples.
    """
    idx = _reduction_index(n)
    check_numeric_index(idx)
    config = config or SolverConfig()
    top = min(r_hi if r_hi is not None else config.r_max, config.r_max)
    if not (0 < r_lo < top):
        raise DomainError(f"need 0 < r_lo < r_hi (r_lo={r_lo}, r_hi={top})")
    m = max(int(round((top - r_lo) / dr)), 1)
    grid = np.linspace(r_lo, top, m + 1)
    if grid[0] <= config.r_switch:
        raise DomainError(f"r_lo={r_lo} must exceed r_switch={config.r_switch}")

    trajectory = integrate(idx, config, r_eval=grid)
    r, psi, dpsi = trajectory.r, trajectory.psi, trajectory.dpsi
    on_grid = np.isin(r, grid) & (psi > 0)
    r, psi, dpsi = r[on_grid], psi[on_grid], dpsi[on_grid]

    p = 2.0 / (idx.value - 1.0)
    g = dpsi * r + p * psi
    window = _longest_sign_run(g)
    r, psi, g = r[window], psi[window], g[window]
    if r.size < MIN_WINDOW_SAMPLES:
        raise UnusableIntervalError(f"n={idx}: no monotone-t window with {MIN_WINDOW_SAMPLES} samples")

    t = psi * np.exp(p * np.log(r))
    u = np.exp(-p * np.log(r)) / g
    dt_dr = np.exp((p - 1.0) * np.log(r)) * g
    h = (r[-1] - r[0]) / (r.size - 1)
    du_dr = (u[:-4] - 8.0 * u[1:-3] + 8.0 * u[3:-1] - u[4:]) / (12.0 * h)

    inner = slice(2, -2)
    resolved = np.abs(u[4:] - u[:-4]) <= STENCIL_VARIATION_LIMIT * np.abs(u[inner])
    skipped = resolved.size - int(np.count_nonzero(resolved))
    logger.debug(f"n={idx}: skipped {skipped} of {resolved.size} samples whose stencil does not resolve u")
    if np.count_nonzero(resolved) < MIN_WINDOW_SAMPLES:
        raise UnusableIntervalError(f"n={idx}: fewer than {MIN_WINDOW_SAMPLES} resolved samples in the window")

    tt, uu = t[inner][resolved], u[inner][resolved]
    du_dt = du_dr[resolved] / dt_dr[inner][resolved]
    c = abel_constants(idx)
    power = tt ** (int(idx.value) if idx.is_integer else idx.value)
    expected = float(c.a) * uu**2 + (float(c.b) * tt + power) * uu**3
    residual = np.abs(du_dt - expected) / np.maximum(1.0, np.abs(expected))
    worst = float(np.max(residual))
    logger.info(f"n={idx}: round-trip residual {worst:.3e} over {tt.size} samples in r=[{r[0]:.4g}, {r[-1]:.4g}]")
    return worst
