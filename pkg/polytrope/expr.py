"""
polytrope/expr.py

Exact sums of monomials c * x1^e1 * x2^e2 * ... over a fixed, ordered set of
variables, with Fraction coefficients and Fraction exponents.

An Expr is immutable and kept in canonical form: equal exponent vectors are
merged, zero coefficients dropped, terms sorted by exponent vector (descending).
Two Exprs are therefore equal exactly when their term tuples are equal.

Coefficients may also be LinearForms over unknown parameters; such an
expression is a ParamExpr and stays linear in the parameters: it can be added
to other ParamExprs and multiplied by plain Exprs, never by another ParamExpr.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from polytrope.errors import NonMonomialPowerError

Rat = Fraction
Exps = tuple[Fraction, ...]

#####################################
# Linear Forms
#####################################


class LinearForm:
    """sum_i c_i * p_i over parameter indices i, with exact coefficients."""

    __slots__ = ("_items",)

    def __init__(self, items: Union[Mapping[int, Fraction], Iterable[tuple[int, Fraction]]] = ()):
        pairs = items.items() if isinstance(items, Mapping) else items
        merged: dict[int, Fraction] = {}
        for index, coeff in pairs:
            merged[index] = merged.get(index, Fraction(0)) + Fraction(coeff)
        self._items: tuple[tuple[int, Fraction], ...] = tuple(sorted((i, c) for i, c in merged.items() if c != 0))

    @classmethod
    def parameter(cls, index: int) -> "LinearForm":
        return cls({index: Fraction(1)})

    def items(self) -> tuple[tuple[int, Fraction], ...]:
        return self._items

    def is_zero(self) -> bool:
        return not self._items

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(self._items + other._items)

    def __neg__(self) -> "LinearForm":
        return LinearForm((i, -c) for i, c in self._items)

    def scale(self, factor: Fraction) -> "LinearForm":
        return LinearForm((i, c * factor) for i, c in self._items)

    def row(self, size: int) -> list[Fraction]:
        """Dense coefficient row of length size."""
        out = [Fraction(0)] * size
        for i, c in self._items:
            out[i] = c
        return out

    def evaluate(self, values: Sequence[Fraction]) -> Fraction:
        return sum((c * Fraction(values[i]) for i, c in self._items), Fraction(0))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LinearForm) and self._items == other._items

    def __hash__(self) -> int:
        return hash(("LinearForm", self._items))

    def __repr__(self) -> str:
        return "LinearForm(" + " + ".join(f"{c}*p{i}" for i, c in self._items) + ")"


Coeff = Union[Fraction, LinearForm]


def _is_zero(c: Coeff) -> bool:
    return c.is_zero() if isinstance(c, LinearForm) else c == 0


def _add_coeff(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, LinearForm) and isinstance(b, LinearForm):
        return a + b
    if isinstance(a, LinearForm) or isinstance(b, LinearForm):
        if _is_zero(a):
            return b
        if _is_zero(b):
            return a
        raise TypeError("cannot add a constant coefficient to a parameter-linear one")
    return a + b


def _mul_coeff(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, LinearForm) and isinstance(b, LinearForm):
        raise TypeError("product of two parameter-linear coefficients is not linear")
    if isinstance(a, LinearForm):
        return a.scale(b)
    if isinstance(b, LinearForm):
        return b.scale(a)
    return a * b


#####################################
# Monomials and Expressions
#####################################


@dataclass(frozen=True)
class Monomial:
    coeff: Coeff
    exps: Mapping[str, Fraction]


def _render_exponent(e: Fraction) -> str:
    if e == 1:
        return ""
    if e.denominator == 1:
        return f"^{e.numerator}" if e > 0 else f"^({e.numerator})"
    return f"^({e})"


def _render_term(variables: Sequence[str], exps: Exps, coeff: Coeff) -> str:
    factors = [f"{v}{_render_exponent(e)}" for v, e in zip(variables, exps) if e != 0]
    if isinstance(coeff, LinearForm):
        form = " + ".join(f"{c}*p{i}" for i, c in coeff.items())
        return "*".join([f"({form})"] + factors)
    if not factors:
        return str(coeff)
    body = "*".join(factors)
    if coeff == 1:
        return body
    if coeff == -1:
        return "-" + body
    return f"{coeff}*{body}"


class Expr:
    """Canonical exact sum of monomials over an ordered variable tuple."""

    __slots__ = ("variables", "_terms")

    def __init__(self, variables: Sequence[str], terms: Union[Mapping[Exps, Coeff], Iterable[tuple[Exps, Coeff]]] = ()):
        self.variables: tuple[str, ...] = tuple(variables)
        pairs = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Exps, Coeff] = {}
        width = len(self.variables)
        for exps, coeff in pairs:
            key = tuple(Fraction(e) for e in exps)
            if len(key) != width:
                raise ValueError(f"exponent vector {key} does not match variables {self.variables}")
            c = coeff if isinstance(coeff, LinearForm) else Fraction(coeff)
            merged[key] = _add_coeff(merged[key], c) if key in merged else c
        kept = [(k, c) for k, c in merged.items() if not _is_zero(c)]
        kept.sort(key=lambda kc: kc[0], reverse=True)
        has_form = any(isinstance(c, LinearForm) for _, c in kept)
        if has_form and not all(isinstance(c, LinearForm) for _, c in kept):
            raise TypeError("expression mixes constant and parameter-linear coefficients")
        self._terms: tuple[tuple[Exps, Coeff], ...] = tuple(kept)

    #####################################
    # Construction
    #####################################

    @staticmethod
    def _make(variables: Sequence[str], terms) -> "Expr":
        expr = Expr(variables, terms)
        if expr.is_parametric:
            param = ParamExpr.__new__(ParamExpr)
            param.variables, param._terms = expr.variables, expr._terms
            return param
        return expr

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Expr":
        return Expr(variables)

    @classmethod
    def constant(cls, value: Coeff, variables: Sequence[str]) -> "Expr":
        return Expr._make(variables, [((0,) * len(variables), value)])

    @classmethod
    def monomial(cls, coeff: Coeff, variables: Sequence[str], **exps: Union[int, Fraction]) -> "Expr":
        unknown = set(exps) - set(variables)
        if unknown:
            raise ValueError(f"unknown variable(s) {sorted(unknown)} for {tuple(variables)}")
        vector = tuple(Fraction(exps.get(v, 0)) for v in variables)
        return Expr._make(variables, [(vector, coeff)])

    @classmethod
    def var(cls, name: str, variables: Sequence[str]) -> "Expr":
        return cls.monomial(Fraction(1), variables, **{name: 1})

    #####################################
    # Inspection
    #####################################

    @property
    def terms(self) -> tuple[tuple[Exps, Coeff], ...]:
        return self._terms

    def monomials(self) -> Iterator[Monomial]:
        for exps, coeff in self._terms:
            yield Monomial(coeff, dict(zip(self.variables, exps)))

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_parametric(self) -> bool:
        return any(isinstance(c, LinearForm) for _, c in self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, **exps: Union[int, Fraction]) -> Coeff:
        key = tuple(Fraction(exps.get(v, 0)) for v in self.variables)
        for k, c in self._terms:
            if k == key:
                return c
        return Fraction(0)

    #####################################
    # Arithmetic
    #####################################

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Expr.constant(Fraction(other), self.variables)
        if isinstance(other, LinearForm):
            return Expr.constant(other, self.variables)
        return NotImplemented

    def __add__(self, other) -> "Expr":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Expr._make(self.variables, self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr._make(self.variables, [(k, _mul_coeff(c, Fraction(-1))) for k, c in self._terms])

    def __sub__(self, other) -> "Expr":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Expr":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Expr":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        products = []
        for ka, ca in self._terms:
            for kb, cb in other._terms:
                products.append((tuple(x + y for x, y in zip(ka, kb)), _mul_coeff(ca, cb)))
        return Expr._make(self.variables, products)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, Expr):
            return self * (other ** -1)
        return NotImplemented

    def __pow__(self, exponent: Union[int, Fraction]) -> "Expr":
        e = Fraction(exponent)
        if e.denominator == 1 and e >= 0:
            result = Expr.constant(Fraction(1), self.variables)
            base, k = self, e.numerator
            while k:
                if k & 1:
                    result = result * base
                base = base * base
                k >>= 1
            return result
        if len(self._terms) != 1:
            raise NonMonomialPowerError(f"power {e} needs a single monomial, got {len(self._terms)} terms")
        if self.is_parametric:
            raise NonMonomialPowerError("cannot raise a parameter-linear monomial to a power")
        (exps, coeff), = self._terms
        if e.denominator != 1 and coeff != 1:
            raise NonMonomialPowerError(f"coefficient {coeff} has no exact rational power {e}")
        new_coeff = coeff ** e.numerator if e.denominator == 1 else Fraction(1)
        return Expr._make(self.variables, [(tuple(x * e for x in exps), new_coeff)])

    def partial_diff(self, name: str) -> "Expr":
        """Formal partial derivative: c x^e -> c e x^(e-1)."""
        i = self.variables.index(name)
        out = []
        for exps, coeff in self._terms:
            e = exps[i]
            if e != 0:
                shifted = exps[:i] + (e - 1,) + exps[i + 1:]
                out.append((shifted, _mul_coeff(coeff, e)))
        return Expr._make(self.variables, out)

    #####################################
    # Change of Variables
    #####################################

    def embed(self, variables: Sequence[str]) -> "Expr":
        """Re-express over a larger ordered variable set."""
        variables = tuple(variables)
        for v, column in zip(self.variables, zip(*[k for k, _ in self._terms]) if self._terms else ()):
            if v not in variables and any(e != 0 for e in column):
                raise ValueError(f"variable {v} is missing from {variables}")
        positions = {v: i for i, v in enumerate(self.variables)}
        out = []
        for exps, coeff in self._terms:
            out.append((tuple(exps[positions[v]] if v in positions else Fraction(0) for v in variables), coeff))
        return Expr._make(variables, out)

    def absorb_marker(self, marker: str, base: str, n: Fraction) -> tuple["Expr", tuple[str, ...]]:
        """
        Replace a placeholder variable standing for base^n by the actual power.

        Every marker^k * base^e becomes base^(e + k n). Monomials that were
        distinct before the substitution but coincide after it are merged;
        each such coincidence is reported as a readable string.
        """
        n = Fraction(n)
        im, ib = self.variables.index(marker), self.variables.index(base)
        kept_vars = tuple(v for v in self.variables if v != marker)
        sources: dict[Exps, set[tuple[Fraction, Fraction]]] = {}
        out = []
        for exps, coeff in self._terms:
            k, e = exps[im], exps[ib]
            new = list(exps)
            new[ib] = e + k * n
            del new[im]
            key = tuple(new)
            sources.setdefault(key, set()).add((k, e))
            out.append((key, coeff))
        collisions = set()
        for origins in sources.values():
            if len(origins) > 1:
                shapes = sorted({_symbolic_power(base, k, e) for k, e in origins})
                if len(shapes) > 1:
                    collisions.add(" = ".join(shapes) + f" at n={n}")
        return Expr._make(kept_vars, out), tuple(sorted(collisions))

    #####################################
    # Equality and Rendering
    #####################################

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = Expr.constant(Fraction(other), self.variables)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.variables == other.variables and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.variables, self._terms))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        text = " + ".join(_render_term(self.variables, k, c) for k, c in self._terms)
        return text.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.variables}, {self})"


def _symbolic_power(base: str, k: Fraction, e: Fraction) -> str:
    """Render base^(k n + e) with n left symbolic."""
    if k == 0:
        return f"{base}^{e}"
    head = "n" if k == 1 else f"{k}n"
    if e == 0:
        return f"{base}^{head}" if k == 1 else f"{base}^({head})"
    sign = "+" if e > 0 else "-"
    return f"{base}^({head}{sign}{abs(e)})"


class ParamExpr(Expr):
    """Expr whose coefficients are linear forms over unknown parameters."""

    __slots__ = ()

    def coefficient_forms(self) -> list[LinearForm]:
        """One linear form per monomial: the homogeneous system 'all vanish'."""
        return [c for _, c in self._terms]

    def specialize(self, values: Sequence[Fraction]) -> Expr:
        """Substitute numbers for the parameters."""
        return Expr(self.variables, [(k, c.evaluate(values)) for k, c in self._terms])


def specialize(expr: Expr, values: Sequence[Fraction]) -> Expr:
    """specialize for either kind: plain Exprs are returned unchanged."""
    return expr.specialize(values) if isinstance(expr, ParamExpr) else expr


def polynomial(coeffs: Sequence[Coeff], variables: Sequence[str], name: str, times: Optional[Expr] = None) -> Expr:
    """sum_k coeffs[k] * name^k (optionally times another Expr)."""
    total = Expr.zero(variables)
    for k, c in enumerate(coeffs):
        if _is_zero(c):
            continue
        term = Expr.monomial(c, variables, **{name: k})
        total = total + (term * times if times is not None else term)
    return total
