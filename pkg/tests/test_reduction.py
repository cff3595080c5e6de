"""
tests/test_reduction.py

Canonical variables, the reduced (u) and Abel (y) equations, their
integration, and the round-trip check against integrated solutions.

Usage:
  pytest -q tests/test_reduction.py
"""

#####################################
# Imports
#####################################

import math
from fractions import Fraction

import numpy as np
import pytest

from polytrope.core_ode import PhaseState, Termination, closed_form, closed_form_derivative
from polytrope.errors import DomainError, UnusableIntervalError
from polytrope.reduction import (
    abel_constants,
    abel_rhs,
    abel_to_reduced,
    canonical_exponent,
    conserved_n5,
    from_canonical,
    integrate_reduced,
    reduced_rhs,
    reduced_to_abel,
    roundtrip_residual,
    to_canonical,
)
from polytrope.symmetry_solutions import singular_state
from utils.utils_logger import logger

#####################################
# Constants
#####################################


@pytest.mark.parametrize(
    "n, a, b",
    [(5, Fraction(0), Fraction(-1, 4)), (3, Fraction(-1), Fraction(0)), (0, Fraction(5), Fraction(6))],
)
def test_abel_constants_exact(n, a, b):
    c = abel_constants(n)
    assert (c.a, c.b) == (a, b)


@pytest.mark.parametrize("n", [Fraction(0), Fraction(1, 2), Fraction(2), Fraction(7, 2), Fraction(9)])
def test_abel_constant_identities(n):
    c = abel_constants(n)
    assert c.a * (n - 1) == n - 5
    assert c.b * (n - 1) ** 2 == 2 * (3 - n)


def test_abel_constants_float_input():
    c = abel_constants(1.5)
    assert c.a == pytest.approx(-7.0)
    assert c.b == pytest.approx(12.0)


def test_n_equal_one_is_rejected():
    with pytest.raises(DomainError):
        abel_constants(1)
    with pytest.raises(DomainError):
        canonical_exponent(1.0)
    with pytest.raises(DomainError):
        reduced_rhs(1, 1.0, 1.0)


#####################################
# Point Transform
#####################################


def test_to_canonical_at_unit_radius():
    point = to_canonical(3, PhaseState(1.0, 0.42, -0.1))
    assert point.s == 0.0
    assert point.t == 0.42


def test_to_canonical_n5_closed_form_point():
    psi = closed_form(5, 1.0)
    dpsi = closed_form_derivative(5, 1.0)
    point = to_canonical(5, PhaseState(1.0, psi, dpsi))
    assert point.t == pytest.approx(0.8660254, abs=1e-7)
    assert point.u == pytest.approx(4.618802, abs=1e-6)
    assert not point.degenerate


def test_to_canonical_flags_invariant_solution():
    point = to_canonical(5, singular_state(5, 2.0))
    assert point.degenerate
    assert math.isinf(point.u)
    assert point.t == pytest.approx(0.25**0.25)


def test_to_canonical_needs_positive_radius():
    with pytest.raises(DomainError):
        to_canonical(3, PhaseState(0.0, 1.0, 0.0))


@pytest.mark.parametrize(
    "n, s, t, expected",
    [
        (3, 0.0, 0.5, (1.0, 0.5)),
        (3, 1.0, 1.0, (math.e, 0.3678794)),
        (5, math.log(4.0), 0.7071068, (4.0, 0.3535534)),
    ],
)
def test_from_canonical_examples(n, s, t, expected):
    r, psi = from_canonical(n, s, t)
    assert r == pytest.approx(expected[0], rel=1e-12)
    assert psi == pytest.approx(expected[1], abs=1e-7)


@pytest.mark.parametrize("n", [0, 0.5, 2, 3, 5])
@pytest.mark.parametrize("r", [1e-3, 0.37, 1.0, 12.5, 1e3])
@pytest.mark.parametrize("psi", [1e-6, 0.8, 1e3])
def test_point_transform_inverts_to_a_few_ulp(n, r, psi):
    p = canonical_exponent(n)
    point = to_canonical(n, PhaseState(r, psi, -0.3))
    r_back, psi_back = from_canonical(n, point.s, point.t)
    log_r = abs(math.log(r))
    # exp(log r) loses accuracy in proportion to |log r|
    assert abs(r_back - r) <= 4 * math.ulp(r) * (1.0 + log_r)
    assert abs(point.r - r) <= 4 * math.ulp(r) * (1.0 + log_r)
    assert abs(psi_back - psi) <= 4 * math.ulp(psi) * (1.0 + abs(p) * log_r)


#####################################
# Reduced and Abel Equations
#####################################


@pytest.mark.parametrize("n, t, u, expected", [(5, 1.0, 1.0, 0.75), (3, 1.0, 1.0, 0.0), (0, 0.0, 1.0, 6.0)])
def test_reduced_rhs_examples(n, t, u, expected):
    assert reduced_rhs(n, t, u) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("n, t, y, expected", [(5, 1.0, -1.0, 0.75), (3, 0.0, 7.0, -1.0), (0, 1.0, 1.0, -2.0)])
def test_abel_rhs_examples(n, t, y, expected):
    assert abel_rhs(n, t, y) == pytest.approx(expected, abs=1e-15)


def test_abel_rhs_singular_at_zero():
    with pytest.raises(DomainError):
        abel_rhs(3, 1.0, 0.0)


def test_reduced_rhs_rejects_negative_t_for_fractional_index():
    with pytest.raises(DomainError):
        reduced_rhs(1.5, -0.5, 1.0)


@pytest.mark.parametrize("n", [0, 2, 3, 1.5, 5])
@pytest.mark.parametrize("t", [0.0, 0.3, 1.7])
@pytest.mark.parametrize("u", [-2.5, 0.4, 3.0])
def test_abel_and_reduced_forms_agree(n, t, u):
    expected = reduced_rhs(n, t, u) / (u * u)
    assert abel_rhs(n, t, reduced_to_abel(u)) == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_abel_conversion_is_an_involution():
    assert abel_to_reduced(reduced_to_abel(0.25)) == pytest.approx(0.25)


def test_conserved_n5_values():
    assert conserved_n5(0.0, 1.0) == 0.5
    assert conserved_n5(1.0, 1.0) == pytest.approx(0.5416667, abs=1e-7)


#####################################
# Integration
#####################################


def test_n5_abel_trajectory_conserves_q():
    trajectory = integrate_reduced(5, (0.0, 1.0), 1.0, "y")
    assert trajectory.termination is Termination.REACHED_END
    drift = [abs(conserved_n5(t, y) - 0.5) for t, y in trajectory.samples]
    assert max(drift) <= 1e-8


def test_n5_u_form_matches_transformed_closed_form():
    def canonical(r):
        return to_canonical(5, PhaseState(r, closed_form(5, r), closed_form_derivative(5, r)))

    # t(r) is increasing on (0, sqrt(3))
    start, end = canonical(0.5), canonical(1.5)
    trajectory = integrate_reduced(5, (start.t, start.u), end.t, "u")
    assert trajectory.termination is Termination.REACHED_END
    assert trajectory.samples[-1][0] == end.t
    assert trajectory.samples[-1][1] == pytest.approx(end.u, abs=1e-6)


def test_sampling_on_requested_points():
    t_eval = np.linspace(0.0, 1.0, 11)
    trajectory = integrate_reduced(5, (0.0, 1.0), 1.0, "y", t_eval=t_eval)
    np.testing.assert_array_equal(trajectory.t, t_eval)
    assert list(trajectory.to_frame().columns) == ["t", "value"]


def test_empty_interval_gives_single_sample():
    trajectory = integrate_reduced(3, (0.4, 2.0), 0.4)
    assert trajectory.samples == ((0.4, 2.0),)
    assert trajectory.termination is Termination.REACHED_END


def test_backward_integration():
    trajectory = integrate_reduced(5, (1.0, 1.0), 0.0, "y")
    assert trajectory.t[-1] == 0.0
    assert np.all(np.diff(trajectory.t) < 0)


def test_cubic_growth_blows_up():
    trajectory = integrate_reduced(3, (1.0, 10.0), 10.0, "u")
    assert trajectory.termination is Termination.BLOW_UP
    assert trajectory.t[-1] < 10.0


def test_y_form_cannot_start_at_zero():
    with pytest.raises(DomainError):
        integrate_reduced(3, (0.0, 0.0), 1.0, "y")


@pytest.mark.parametrize("n", [-2, -0.5])
def test_negative_index_cannot_cross_t_zero(n):
    with pytest.raises(DomainError):
        integrate_reduced(n, (0.0, 1.0), 1.0)
    with pytest.raises(DomainError):
        reduced_rhs(n, 0.0, 1.0)


#####################################
# Round-Trip Check
#####################################


@pytest.mark.parametrize("n", [0, 2, 3])
def test_roundtrip_residual_small(n):
    assert roundtrip_residual(n) <= 1e-5


def test_roundtrip_residual_n5_window():
    assert roundtrip_residual(5, r_lo=0.5, r_hi=3.0) <= 1e-5


def test_roundtrip_logs_skipped_samples():
    messages = []
    sink = logger.add(messages.append, level="DEBUG", format="{message}")
    try:
        roundtrip_residual(3)
    finally:
        logger.remove(sink)
    assert any("skipped" in m and "samples whose stencil" in m for m in messages)


def test_roundtrip_needs_enough_samples():
    with pytest.raises(UnusableIntervalError):
        roundtrip_residual(3, r_lo=0.1, r_hi=0.11)


def test_roundtrip_rejects_n_equal_one():
    with pytest.raises(DomainError):
        roundtrip_residual(1)
