"""
tests/test_core_ode.py

Lane-Emden integration from the center: closed forms, first zeros,
termination tags, finite-difference residuals and input validation.

Usage:
  pytest -q tests/test_core_ode.py
  pytest -q -m slow            (fixed-step RK4 oracle comparisons)
"""

#####################################
# Imports
#####################################

import math
from fractions import Fraction

import numpy as np
import pytest

from polytrope.core_ode import (
    Index,
    PhaseState,
    SolverConfig,
    Termination,
    Trajectory,
    _derivative,
    closed_form,
    closed_form_derivative,
    first_zero,
    integrate,
    le_rhs,
    residual_check,
    sample_closed_form,
    series_start,
)
from polytrope.errors import ConvergenceError, DomainError, UnsupportedIndexError
from verify_oracles import REFERENCE_XI1, rk4_first_zero

#####################################
# Index and Phase States
#####################################


def test_index_parses_rational_strings():
    idx = Index.of("3/2")
    assert idx.value == 1.5
    assert idx.exact == Fraction(3, 2)


@pytest.mark.parametrize("text", ["1e400", "-1e400"])
def test_index_rejects_strings_that_overflow(text):
    with pytest.raises(DomainError):
        Index.of(text)


def test_index_reads_floats_through_shortest_repr():
    assert Index.of(0.1).exact == Fraction(1, 10)
    assert Index.of(3).is_integer
    assert not Index.of(1.5).is_integer


def test_phase_state_rejects_non_finite_and_negative_radius():
    with pytest.raises(DomainError):
        PhaseState(1.0, math.nan, 0.0)
    with pytest.raises(DomainError):
        PhaseState(-0.1, 1.0, 0.0)


def test_solver_config_validates_limits():
    with pytest.raises(DomainError):
        SolverConfig(rtol=0.0)
    with pytest.raises(DomainError):
        SolverConfig(r_switch=30.0, r_max=20.0)
    assert SolverConfig().replace(r_max=8.0).r_max == 8.0


#####################################
# Right-Hand Side and Series
#####################################


def test_le_rhs_value():
    dpsi, omega = le_rhs(2, PhaseState(1.0, 0.5, -0.25))
    assert dpsi == -0.25
    assert omega == pytest.approx(-(0.5**2) + 0.5)


def test_le_rhs_is_singular_at_center():
    with pytest.raises(DomainError):
        le_rhs(3, PhaseState(0.0, 1.0, 0.0))


def test_le_rhs_rejects_negative_psi_for_fractional_index():
    with pytest.raises(DomainError):
        le_rhs(1.5, PhaseState(4.0, -0.1, -0.2))
    # integer powers are fine past the zero
    le_rhs(3, PhaseState(7.0, -0.1, -0.2))


@pytest.mark.parametrize("n", [0, 1, 5])
def test_series_start_matches_closed_forms(n):
    r0 = 1e-2
    state = series_start(n, r0, r_switch=1e-2)
    assert state.psi == pytest.approx(closed_form(n, r0), abs=1e-14)
    assert state.dpsi == pytest.approx(closed_form_derivative(n, r0), abs=1e-12)


def test_series_start_rejects_radius_beyond_switch():
    with pytest.raises(DomainError):
        series_start(3, 0.5, r_switch=1e-3)


#####################################
# Closed Forms
#####################################


def test_closed_form_values():
    assert closed_form(0, math.sqrt(6.0)) == pytest.approx(0.0, abs=1e-15)
    assert closed_form(1, 0.0) == 1.0
    assert closed_form(5, 3.0) == pytest.approx(0.5)
    np.testing.assert_allclose(closed_form(1, np.array([math.pi / 2, math.pi])), [2 / math.pi, 0.0], atol=1e-15)


def test_closed_form_derivative_at_first_zero():
    assert -closed_form_derivative(0, math.sqrt(6.0)) == pytest.approx(math.sqrt(6.0) / 3.0)
    assert -closed_form_derivative(1, math.pi) == pytest.approx(1.0 / math.pi)


def test_closed_form_unknown_index():
    with pytest.raises(UnsupportedIndexError):
        closed_form(2, 1.0)
    with pytest.raises(UnsupportedIndexError):
        closed_form(1.5, 1.0)


def test_sixth_order_stencil_is_exact_for_quintics():
    r = np.linspace(1.0, 2.0, 11)
    d, inner = _derivative(r, r**5)
    assert inner == slice(3, -3)
    np.testing.assert_allclose(d, 5.0 * r[inner] ** 4, rtol=1e-11)


def test_short_and_uneven_grids_use_lower_order_stencils():
    _, inner = _derivative(np.linspace(1.0, 2.0, 6), np.ones(6))
    assert inner == slice(2, -2)
    r = np.array([1.0, 1.1, 1.3, 1.6, 2.0, 2.5, 3.1])
    d, inner = _derivative(r, r**2)
    assert inner == slice(1, -1)
    np.testing.assert_allclose(d, 2.0 * r[inner], rtol=1e-12)


def test_closed_form_samples_pass_residual_check():
    grid = np.linspace(0.1, 10.0, 9901)
    assert residual_check(5, sample_closed_form(5, grid)) < 1e-8
    assert residual_check(1, sample_closed_form(1, grid)) < 1e-8


#####################################
# Integration
#####################################


def test_n5_matches_closed_form_on_grid():
    grid = np.linspace(0.0, 10.0, 1001)
    trajectory = integrate(5, SolverConfig(r_max=10.0), r_eval=grid)
    assert trajectory.termination is Termination.REACHED_R_MAX
    assert trajectory.xi1 is None
    np.testing.assert_array_equal(trajectory.r, grid)
    assert np.max(np.abs(trajectory.psi - closed_form(5, grid))) <= 1e-8


def test_n1_first_zero_is_pi():
    assert first_zero(1) == pytest.approx(math.pi, abs=1e-6)


def test_n0_first_zero_is_sqrt6():
    assert first_zero(0) == pytest.approx(math.sqrt(6.0), abs=1e-6)


def test_first_zero_slope_for_n1():
    trajectory = integrate(1)
    assert trajectory.termination is Termination.FIRST_ZERO
    assert trajectory.samples[-1].r == trajectory.xi1
    assert trajectory.minus_dpsi_at_xi1 == pytest.approx(1.0 / math.pi, abs=1e-6)


def test_integration_from_a_given_state():
    start = PhaseState(1.0, closed_form(1, 1.0), closed_form_derivative(1, 1.0))
    trajectory = integrate(1, start=start)
    assert trajectory.samples[0].r == 1.0
    assert trajectory.xi1 == pytest.approx(math.pi, abs=1e-6)


def test_n5_has_no_zero():
    assert first_zero(5) is None


def test_step_budget_exhaustion():
    config = SolverConfig(max_steps=5)
    trajectory = integrate(3, config)
    assert trajectory.termination is Termination.STEP_BUDGET_EXHAUSTED
    with pytest.raises(ConvergenceError):
        first_zero(3, config)


def test_continue_past_zero_for_integer_index():
    trajectory = integrate(1, SolverConfig(r_max=5.0), continue_past_zero=True)
    assert trajectory.termination is Termination.REACHED_R_MAX
    assert trajectory.xi1 == pytest.approx(math.pi, abs=1e-6)
    assert trajectory.psi[-1] < 0


def test_continue_past_zero_rejected_for_fractional_index():
    with pytest.raises(DomainError):
        integrate(1.5, continue_past_zero=True)


@pytest.mark.parametrize("n", [-0.5, 10.5])
def test_index_outside_numeric_range(n):
    with pytest.raises(DomainError):
        integrate(n)


def test_integrated_solution_passes_residual_check():
    grid = np.linspace(0.0, 6.5, 6501)
    trajectory = integrate(3, SolverConfig(r_max=6.5), r_eval=grid)
    interior = [s for s in trajectory.samples if 0.1 <= s.r <= 6.0]
    assert residual_check(3, interior) < 1e-6


def test_residual_check_needs_three_samples():
    with pytest.raises(DomainError):
        residual_check(1, sample_closed_form(1, [1.0, 2.0]))


def test_trajectory_frame_and_lookup():
    grid = np.linspace(0.0, 2.0, 21)
    trajectory = integrate(1, SolverConfig(r_max=2.0), r_eval=grid)
    frame = trajectory.to_frame()
    assert list(frame.columns) == ["r", "psi", "dpsi"]
    assert len(frame) == 21
    assert trajectory.value_at(1.0).psi == pytest.approx(math.sin(1.0), abs=1e-9)
    with pytest.raises(KeyError):
        trajectory.value_at(1.05)


def test_trajectory_requires_increasing_radii():
    with pytest.raises(DomainError):
        Trajectory(Index.of(1), (PhaseState(1.0, 0.8, -0.3), PhaseState(0.5, 0.9, -0.2)), Termination.REACHED_END)


#####################################
# Solution Invariants
#####################################

MONOTONE_INDICES = [0, 0.5, 1, 1.5, 2, 3, 4, 4.5, 5]


@pytest.mark.parametrize("n", MONOTONE_INDICES)
def test_slope_stays_negative_before_first_zero(n):
    trajectory = integrate(n)
    assert all(s.dpsi < 0 for s in trajectory.samples if s.r > 0)


@pytest.mark.parametrize("n", MONOTONE_INDICES)
def test_enclosed_mass_is_nondecreasing(n):
    config = SolverConfig()
    trajectory = integrate(n, config)
    positive = trajectory.psi > 0
    mass = -(trajectory.r[positive] ** 2) * trajectory.dpsi[positive]
    assert np.min(np.diff(mass)) >= -10.0 * config.atol


@pytest.mark.parametrize("n", [0, 1.5, 3, 5])
def test_series_handoff_agrees_with_integration(n):
    config = SolverConfig(r_max=0.01)
    r_switch = config.r_switch
    halfway = series_start(n, r_switch / 2.0, r_switch=r_switch)
    reached = integrate(n, config, start=halfway, r_eval=[r_switch]).value_at(r_switch)
    direct = series_start(n, r_switch, r_switch=r_switch)
    bound = 10.0 * (config.rtol + config.atol)
    assert abs(reached.psi - direct.psi) <= bound
    assert abs(reached.dpsi - direct.dpsi) <= bound


@pytest.mark.parametrize("n", [0, 1, 5])
def test_closed_form_oracle_agreement(n):
    config = SolverConfig(rtol=1e-10, atol=1e-10, r_max=10.0)
    trajectory = integrate(n, config, r_eval=np.linspace(0.0, 10.0, 1001))
    assert np.max(np.abs(trajectory.psi - closed_form(n, trajectory.r))) <= 1e-8


def _closed_form_error(n, rtol, r_max):
    config = SolverConfig(rtol=rtol, atol=1e-14, r_max=r_max)
    trajectory = integrate(n, config, r_eval=np.linspace(0.0, r_max, 301))
    return float(np.max(np.abs(trajectory.psi - closed_form(n, trajectory.r))))


@pytest.mark.parametrize("n, r_max", [(1, 3.0), (5, 10.0)])
@pytest.mark.parametrize("rtol", [1e-6, 1e-8])
def test_halving_rtol_does_not_double_the_error(n, r_max, rtol):
    coarse = _closed_form_error(n, rtol, r_max)
    fine = _closed_form_error(n, rtol / 2.0, r_max)
    # floor at roundoff so two near-exact runs do not compare noise
    assert fine <= 2.0 * coarse + 1e-13


#####################################
# Fixed-Step Oracle (slow)
#####################################


@pytest.mark.slow
@pytest.mark.parametrize("n", sorted(REFERENCE_XI1))
def test_first_zero_matches_rk4_oracle(n):
    adaptive = first_zero(n)
    oracle = rk4_first_zero(n)
    assert abs(adaptive - oracle) <= 1e-5
    assert adaptive == pytest.approx(REFERENCE_XI1[n], abs=1e-5)
