"""
polytrope/symmetry_algebra.py

Exact point-symmetry computations for the Lane-Emden equation and for its
first-order Abel reduction.

symmetry_residual
    LHS - RHS of the linearized symmetry condition for the generator
    xi(r, psi) d/dr + eta(r, psi) d/dpsi, written out for
    psi'' = -psi^n - 2 psi'/r. The empty Expr certifies a symmetry.

determining_scan
    Polynomial ansatz xi = alpha(r), eta = beta(r) psi + gamma(r) with unknown
    coefficients, every monomial coefficient of the residual set to zero,
    solved by exact elimination.

reduced_scan
    Same idea for y' = a - (b t + t^n)/y with zeta(t, y) d/dt + phi(t, y) d/dy
    polynomial in (t, y); the condition is multiplied through by y^3.

psi^n and t^n are carried as placeholder variables during expansion and
substituted at the end, so monomials that only coincide at a special n
(psi^(n-1) = psi at n = 2) are merged and reported.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from polytrope.core_ode import Index, IndexLike
from polytrope.errors import DomainError
from polytrope.expr import Expr, LinearForm, ParamExpr, polynomial, specialize
from polytrope.linalg import nullspace, rank
from polytrope.reduction import abel_constants
from utils.utils_logger import logger

LE_VARIABLES = ("r", "psi", "dpsi")
POINT_VARIABLES = ("r", "psi")
ABEL_VARIABLES = ("t", "y")

# psi_n stands for psi^n, t_n for t^n until the index is substituted
_MARKED_LE = ("r", "psi", "dpsi", "psi_n")
_MARKED_ABEL = ("t", "y", "t_n")

MAX_DETERMINING_DEGREE = 6
MAX_REDUCED_DEGREE = 4


def rational_index(n: IndexLike) -> Fraction:
    """Exact rational n != 1; floats are read through their shortest repr."""
    exact = Index.of(n).exact
    if exact is None:
        raise DomainError(f"index {n!r} has no exact rational value")
    if exact == 1:
        raise DomainError("the symmetry computations are undefined for n = 1")
    return exact


#####################################
# Symmetry Condition
#####################################


def _condition(xi: Expr, eta: Expr, power: Expr, dpower: Expr) -> Expr:
    """
    LHS - RHS of the symmetry condition, where power stands for psi^n and
    dpower for n psi^(n-1), all over the same variable tuple.
    """
    variables = power.variables
    r = Expr.var("r", variables)
    dpsi = Expr.var("dpsi", variables)
    inv_r = r**-1

    xi_r, xi_p = xi.partial_diff("r"), xi.partial_diff("psi")
    eta_r, eta_p = eta.partial_diff("r"), eta.partial_diff("psi")
    xi_rr, xi_rp, xi_pp = xi_r.partial_diff("r"), xi_r.partial_diff("psi"), xi_p.partial_diff("psi")
    eta_rr, eta_rp, eta_pp = eta_r.partial_diff("r"), eta_r.partial_diff("psi"), eta_p.partial_diff("psi")

    lhs = (
        (power + 2 * dpsi * inv_r) * (eta_p - 2 * xi_r - 3 * dpsi * xi_p)
        + 2 * inv_r**2 * dpsi * xi
        - dpower * eta
        - 2 * inv_r * (eta_r + dpsi * (eta_p - xi_r) - dpsi**2 * xi_p)
    )
    rhs = eta_rr + dpsi * (2 * eta_rp - xi_rr) + dpsi**2 * (eta_pp - 2 * xi_rp) - dpsi**3 * xi_pp
    return lhs - rhs


def symmetry_residual(n: IndexLike, xi: Expr, eta: Expr) -> Expr:
    """
    Residual of the symmetry condition for infinitesimals (xi, eta) in (r, psi).

    Returns an Expr over (r, psi, dpsi); it is empty exactly when
    xi d/dr + eta d/dpsi is a point symmetry.
    """
    nn = rational_index(n)
    xi3, eta3 = xi.embed(LE_VARIABLES), eta.embed(LE_VARIABLES)
    psi = Expr.var("psi", LE_VARIABLES)
    return _condition(xi3, eta3, psi**nn, nn * psi ** (nn - 1))


def invariant_infinitesimals(n: IndexLike) -> tuple[Expr, Expr]:
    """(xi, eta) = (r, -2 psi/(n - 1)): the scaling generator."""
    nn = rational_index(n)
    xi = Expr.var("r", POINT_VARIABLES)
    eta = Expr.monomial(Fraction(-2) / (nn - 1), POINT_VARIABLES, psi=1)
    return xi, eta


#####################################
# Scan Results
#####################################


@dataclass(frozen=True)
class DeterminingSystem:
    """Parameter-linear residual plus the names of its unknowns."""

    expr: ParamExpr
    parameters: tuple[str, ...]
    collisions: tuple[str, ...]

    def rows(self) -> list[list[Fraction]]:
        if not isinstance(self.expr, ParamExpr):
            return []
        return [form.row(len(self.parameters)) for form in self.expr.coefficient_forms()]


@dataclass(frozen=True)
class ScanResult:
    """Kernel of a determining system and its basis rendered as infinitesimals."""

    n: Fraction
    degree: int
    labels: tuple[str, str]
    parameters: tuple[str, ...]
    vectors: tuple[tuple[Fraction, ...], ...]
    basis: tuple[tuple[Expr, Expr], ...]
    collisions: tuple[str, ...]
    trivial: tuple[tuple[Fraction, ...], ...] = ()

    @property
    def kernel_dim(self) -> int:
        return len(self.vectors)

    @property
    def trivial_dim(self) -> int:
        return len(self.trivial)

    def to_payload(self) -> dict[str, Any]:
        """JSON-ready summary; rationals rendered as 'p/q' strings."""
        basis = []
        for vector, pair in zip(self.vectors, self.basis):
            basis.append(
                {
                    self.labels[0]: str(pair[0]),
                    self.labels[1]: str(pair[1]),
                    "coefficients": {name: str(v) for name, v in zip(self.parameters, vector) if v != 0},
                }
            )
        return {
            "n": str(self.n),
            "degree": self.degree,
            "kernel_dim": self.kernel_dim,
            "trivial_dim": self.trivial_dim,
            "basis": basis,
            "collisions": list(self.collisions),
        }


def _solve(system: DeterminingSystem) -> list[tuple[Fraction, ...]]:
    kernel = nullspace(system.rows(), len(system.parameters))
    return [tuple(v) for v in kernel]


def _check_degree(degree: int, limit: int) -> None:
    if isinstance(degree, bool) or not isinstance(degree, int) or not 0 <= degree <= limit:
        raise DomainError(f"ansatz degree must be an integer in [0, {limit}], got {degree!r}")


def _warn_collisions(collisions: Sequence[str]) -> None:
    for collision in collisions:
        logger.warning(f"exponent collision merged before solving: {collision}")


#####################################
# Lane-Emden Determining Equations
#####################################


def _determining_parameters(degree: int) -> tuple[str, ...]:
    return tuple(f"{name}_{k}" for name in ("alpha", "beta", "gamma") for k in range(degree + 1))


def _le_ansatz(coeffs: Sequence, degree: int, variables: Sequence[str]) -> tuple[Expr, Expr]:
    """xi = alpha(r), eta = beta(r) psi + gamma(r) from a flat coefficient list."""
    width = degree + 1
    alpha, beta, gamma = coeffs[:width], coeffs[width : 2 * width], coeffs[2 * width :]
    psi = Expr.var("psi", variables)
    xi = polynomial(alpha, variables, "r")
    eta = polynomial(beta, variables, "r", times=psi) + polynomial(gamma, variables, "r")
    return xi, eta


def determining_system(n: IndexLike, degree: int = 3) -> DeterminingSystem:
    """Residual of the (alpha, beta, gamma) ansatz, linear in the unknown coefficients."""
    nn = rational_index(n)
    _check_degree(degree, MAX_DETERMINING_DEGREE)
    parameters = _determining_parameters(degree)
    forms = [LinearForm.parameter(i) for i in range(len(parameters))]
    xi, eta = _le_ansatz(forms, degree, _MARKED_LE)

    marker = Expr.var("psi_n", _MARKED_LE)
    psi = Expr.var("psi", _MARKED_LE)
    residual = _condition(xi, eta, marker, nn * marker * psi**-1)
    expr, collisions = residual.absorb_marker("psi_n", "psi", nn)
    return DeterminingSystem(expr, parameters, collisions)


def determining_scan(n: IndexLike, degree: int = 3) -> ScanResult:
    """
    Polynomial point symmetries xi = alpha(r), eta = beta(r) psi + gamma(r)
    with deg alpha, beta, gamma <= degree.

    Generic n gives a one-dimensional kernel spanned by the scaling
    generator (r, -2 psi/(n-1)).
    """
    nn = rational_index(n)
    system = determining_system(nn, degree)
    _warn_collisions(system.collisions)
    vectors = _solve(system)
    basis = tuple(_le_ansatz(v, degree, POINT_VARIABLES) for v in vectors)
    logger.info(f"determining scan n={nn} degree={degree}: kernel dimension {len(vectors)}")
    return ScanResult(nn, degree, ("xi", "eta"), system.parameters, tuple(vectors), basis, system.collisions)


#####################################
# Reduced (Abel) Equation
#####################################


def _reduced_monomials(degree: int) -> list[tuple[int, int]]:
    return [(i, total - i) for total in range(degree + 1) for i in range(total, -1, -1)]


def _reduced_parameters(degree: int) -> tuple[str, ...]:
    return tuple(f"{name}_{i}_{j}" for name in ("zeta", "phi") for i, j in _reduced_monomials(degree))


def _abel_ansatz(coeffs: Sequence, degree: int, variables: Sequence[str]) -> tuple[Expr, Expr]:
    exps = _reduced_monomials(degree)
    width = len(exps)
    zeta, phi = Expr.zero(variables), Expr.zero(variables)
    for (i, j), cz, cp in zip(exps, coeffs[:width], coeffs[width:]):
        if cz != 0:
            zeta = zeta + Expr.monomial(cz, variables, t=i, y=j)
        if cp != 0:
            phi = phi + Expr.monomial(cp, variables, t=i, y=j)
    return zeta, phi


def reduced_system(n: IndexLike, degree: int = 2) -> DeterminingSystem:
    """
    Symmetry condition of y' = F(t, y) = a - (b t + t^n)/y,

        phi_t + (phi_y - zeta_t) F - zeta_y F^2 - zeta F_t - phi F_y = 0,

    times y^3, for polynomial zeta, phi of total degree <= degree.
    """
    nn = rational_index(n)
    _check_degree(degree, MAX_REDUCED_DEGREE)
    constants = abel_constants(nn)
    parameters = _reduced_parameters(degree)
    forms = [LinearForm.parameter(i) for i in range(len(parameters))]
    zeta, phi = _abel_ansatz(forms, degree, _MARKED_ABEL)

    t = Expr.var("t", _MARKED_ABEL)
    y = Expr.var("y", _MARKED_ABEL)
    tn = Expr.var("t_n", _MARKED_ABEL)
    inv_y = y**-1
    source = constants.b * t + tn
    F = constants.a - source * inv_y
    F_t = -(constants.b + nn * tn * t**-1) * inv_y
    F_y = source * inv_y**2

    condition = (
        phi.partial_diff("t")
        + (phi.partial_diff("y") - zeta.partial_diff("t")) * F
        - zeta.partial_diff("y") * F**2
        - zeta * F_t
        - phi * F_y
    )
    expr, collisions = (condition * y**3).absorb_marker("t_n", "t", nn)
    return DeterminingSystem(expr, parameters, collisions)


def trivial_vectors(n: IndexLike, degree: int = 2) -> list[tuple[Fraction, ...]]:
    """
    Ansatz vectors of the trivial symmetries (zeta, phi) = g (y, y F) with
    g = t^i y^j, i.e. phi = g (a y - b t - t^n). Only those whose every
    monomial lies inside the ansatz are returned; t^n qualifies only when
    n is a non-negative integer.
    """
    nn = rational_index(n)
    _check_degree(degree, MAX_REDUCED_DEGREE)
    constants = abel_constants(nn)
    exps = _reduced_monomials(degree)
    where = {e: k for k, e in enumerate(exps)}
    width = len(exps)

    vectors = []
    for i, j in exps:
        if (i, j + 1) not in where:
            continue
        vector = [Fraction(0)] * (2 * width)
        vector[where[(i, j + 1)]] = Fraction(1)
        phi_terms = (((i, j + 1), constants.a), ((i + 1, j), -constants.b), ((i + nn, j), Fraction(-1)))
        inside = True
        for key, coeff in phi_terms:
            if coeff == 0:
                continue
            if key not in where:
                inside = False
                break
            vector[width + where[key]] += coeff
        if inside:
            vectors.append(tuple(vector))
    return vectors


def _modulo(vectors: Sequence[tuple[Fraction, ...]], span: Sequence[tuple[Fraction, ...]], size: int):
    """Kernel vectors that are independent of span, greedily in order."""
    rows = [list(v) for v in span]
    current = rank(rows, size)
    kept = []
    for v in vectors:
        if rank(rows + [list(v)], size) > current:
            rows.append(list(v))
            current += 1
            kept.append(v)
    return kept


def reduced_scan(n: IndexLike, degree: int = 2) -> ScanResult:
    """
    Polynomial point symmetries of the Abel form, modulo the trivial ones.

    Every first-order equation admits (rho, rho F) for any rho; those that
    fit the ansatz are counted in trivial_dim and factored out, so
    kernel_dim counts non-trivial generators only.
    """
    nn = rational_index(n)
    system = reduced_system(nn, degree)
    _warn_collisions(system.collisions)
    size = len(system.parameters)
    trivial = trivial_vectors(nn, degree)
    vectors = _modulo(_solve(system), trivial, size)
    basis = tuple(_abel_ansatz(v, degree, ABEL_VARIABLES) for v in vectors)
    logger.info(
        f"reduced scan n={nn} degree={degree}: kernel dimension {len(vectors)} "
        f"(plus {len(trivial)} trivial)"
    )
    return ScanResult(
        nn, degree, ("zeta", "phi"), system.parameters, tuple(vectors), basis, system.collisions, tuple(trivial)
    )


def substitute(system: DeterminingSystem, vector: Sequence[Fraction]) -> Expr:
    """The determining expression with numbers in place of the unknowns."""
    return specialize(system.expr, vector)
