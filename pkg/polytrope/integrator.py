"""
polytrope/integrator.py

Embedded Dormand-Prince 5(4) Runge-Kutta pair with PI step-size control.

The integrator is a generator: it yields every accepted step and leaves the
decisions about events (zero crossings, blow-ups) and sampling to the caller.
Steps are clipped so that requested output points are hit exactly.

Error control (per component i, max norm):

    |err_i| <= atol + rtol * max(|y_i(x)|, |y_i(x + h)|)

Coefficients: Hairer, Norsett & Wanner, Solving ODEs I, table 5.2.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from polytrope.errors import ConvergenceError

Rhs = Callable[[float, np.ndarray], np.ndarray]

#####################################
# Butcher Tableau
#####################################

C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0

A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)

# 5th-order weights (also the last stage row: FSAL)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0

# 5th minus 4th order weights
E1 = B1 - 5179.0 / 57600.0
E3 = B3 - 7571.0 / 16695.0
E4 = B4 - 393.0 / 640.0
E5 = B5 - (-92097.0 / 339200.0)
E6 = B6 - 187.0 / 2100.0
E7 = -1.0 / 40.0

#####################################
# Step Control Constants
#####################################

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
PI_BETA = 0.04
PI_ALPHA = 0.2 - 0.75 * PI_BETA
ERR_FLOOR = 1.0e-4


@dataclass(frozen=True)
class Step:
    """One accepted step: the state after the step and the step just taken."""

    x_prev: float
    y_prev: np.ndarray
    x: float
    y: np.ndarray
    h: float
    hit_stop: bool
    attempts: int


def dopri_step(rhs: Rhs, x: float, y: np.ndarray, h: float, k1: Optional[np.ndarray] = None):
    """
    Take a single Dormand-Prince step of size h.

    Returns:
        (y_new, err, k7) where err is the embedded error estimate and k7 the
        derivative at the new point (reused as k1 of the next step).
    """
    if k1 is None:
        k1 = rhs(x, y)
    k2 = rhs(x + C2 * h, y + h * (A21 * k1))
    k3 = rhs(x + C3 * h, y + h * (A31 * k1 + A32 * k2))
    k4 = rhs(x + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
    k5 = rhs(x + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
    k6 = rhs(x + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
    y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
    k7 = rhs(x + h, y_new)
    err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
    return y_new, err, k7


def error_norm(err: np.ndarray, y_old: np.ndarray, y_new: np.ndarray, rtol: float, atol: float) -> float:
    """Max-norm of the error scaled by atol + rtol*|y|; inf when anything is non-finite."""
    if not (np.all(np.isfinite(err)) and np.all(np.isfinite(y_new))):
        return math.inf
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def initial_step(rhs: Rhs, x0: float, y0: np.ndarray, span: float, rtol: float, atol: float) -> float:
    """Starting step from the ratio of state and derivative magnitudes."""
    f0 = rhs(x0, y0)
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale)) if np.all(np.isfinite(f0)) else math.inf
    if d0 < 1e-5 or d1 < 1e-5 or not math.isfinite(d1):
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    return min(h0, abs(span))


def dormand_prince_steps(
    rhs: Rhs,
    x0: float,
    y0: Sequence[float],
    x_end: float,
    *,
    rtol: float,
    atol: float,
    max_steps: int,
    stops: Sequence[float] = (),
    h0: Optional[float] = None,
) -> Iterator[Step]:
    """
    Yield accepted steps from x0 towards x_end (either direction).

    Args:
        rhs:       f(x, y) returning dy/dx as an array.
        x0, y0:    initial point.
        x_end:     where to stop.
        rtol/atol: tolerances of the local error test.
        max_steps: budget of step attempts (accepted + rejected); the
                   generator simply stops when it is spent, so the caller
                   can tell budget exhaustion from the last x.
        stops:     points (in the direction of travel) that must be hit exactly.
        h0:        optional first step size.

    Raises:
        ConvergenceError: if the step size underflows.
    """
    x = float(x0)
    y = np.asarray(y0, dtype=float)
    span = float(x_end) - x
    if span == 0.0:
        return
    direction = 1.0 if span > 0 else -1.0

    pending = sorted(
        (float(s) for s in stops if direction * (float(s) - x) > 0 and direction * (float(x_end) - float(s)) >= 0),
        key=lambda s: direction * s,
    )
    pending.append(float(x_end))
    stop_index = 0

    h = abs(h0) if h0 else initial_step(rhs, x, y, span, rtol, atol)
    k1 = rhs(x, y)
    err_prev = ERR_FLOOR
    rejected_last = False
    attempts = 0

    while attempts < max_steps:
        while stop_index < len(pending) and direction * (pending[stop_index] - x) <= 0:
            stop_index += 1
        if stop_index >= len(pending):
            return
        target = pending[stop_index]

        if h < 16.0 * np.finfo(float).eps * max(abs(x), 1.0):
            raise ConvergenceError(f"step size underflow at x={x:.17g} (h={h:.3e})")

        remaining = abs(target - x)
        clipped = h >= remaining
        h_try = remaining if clipped else h

        attempts += 1
        y_new, err, k7 = dopri_step(rhs, x, y, direction * h_try, k1)
        err_norm = error_norm(err, y, y_new, rtol, atol)

        if err_norm <= 1.0:
            if err_norm == 0.0:
                fac = FAC_MAX
            else:
                fac = SAFETY * err_norm ** (-PI_ALPHA) * max(err_prev, ERR_FLOOR) ** PI_BETA
                fac = min(FAC_MAX, max(FAC_MIN, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            err_prev = err_norm
            rejected_last = False

            x_prev, y_prev = x, y
            x = target if clipped else x + direction * h_try
            y = y_new
            k1 = k7
            # a clipped step says nothing about how large the next step may be
            h = min(h, h * fac) if clipped else h_try * fac
            yield Step(x_prev=x_prev, y_prev=y_prev, x=x, y=y, h=direction * h_try, hit_stop=clipped, attempts=attempts)
        else:
            if math.isfinite(err_norm):
                fac = max(FAC_MIN, SAFETY * err_norm ** (-0.2))
            else:
                fac = FAC_MIN
            h = h_try * fac
            rejected_last = True
