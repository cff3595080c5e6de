"""
polytrope/errors.py

Exception classes shared by the solver, reduction and algebra layers.

The CLI maps each class to an exit code (see exit_code_for); library code only
raises, it never exits.
"""


class PolytropeError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(PolytropeError, ValueError):
    """An input lies outside the domain where an operation is defined."""


class UnsupportedIndexError(DomainError):
    """No closed-form solution is known for the requested index."""


class UnusableIntervalError(DomainError):
    """No monotone-t window long enough for a finite-difference check."""


class EmptySourceError(DomainError):
    """A solution transform was handed no samples."""


class ConvergenceError(PolytropeError, RuntimeError):
    """The integrator could not make progress (step underflow, budget)."""


class NonMonomialPowerError(PolytropeError, ValueError):
    """Rational powers are only defined for single monomials."""


EXIT_OK = 0
EXIT_OUTPUT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4


def exit_code_for(error: BaseException) -> int:
    """Return the process exit code for an exception raised by a command."""
    if isinstance(error, DomainError):
        return EXIT_DOMAIN
    if isinstance(error, ConvergenceError):
        return EXIT_CONVERGENCE
    return EXIT_USAGE
