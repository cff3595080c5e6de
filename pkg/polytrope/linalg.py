"""
polytrope/linalg.py

Exact linear algebra over the rationals: reduced row echelon form and a
nullspace basis for homogeneous systems given as rows of Fractions.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

#####################################
# Elimination
#####################################


def row_echelon(rows: Sequence[Sequence[Fraction]], n_cols: int) -> tuple[list[list[Fraction]], list[int]]:
    """
    Reduced row echelon form of the matrix with the given rows.

    Returns:
        (matrix, pivot_columns): the non-zero rows of the reduced matrix,
        each with a leading 1, and the column of each leading 1.
    """
    m = [[Fraction(x) for x in row] for row in rows]
    for row in m:
        if len(row) != n_cols:
            raise ValueError(f"row of length {len(row)} in a system with {n_cols} columns")

    pivots: list[int] = []
    top = 0
    for col in range(n_cols):
        pivot = next((i for i in range(top, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[top], m[pivot] = m[pivot], m[top]
        lead = m[top][col]
        m[top] = [x / lead for x in m[top]]
        for i in range(len(m)):
            if i != top and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[top])]
        pivots.append(col)
        top += 1
        if top == len(m):
            break
    return m[:top], pivots


#####################################
# Kernel and Rank
#####################################


def nullspace(rows: Sequence[Sequence[Fraction]], n_cols: int) -> list[list[Fraction]]:
    """
    Basis of {v : rows . v = 0}, one vector per free column.

    Each vector is scaled so that its first non-zero entry is 1, which makes
    the basis independent of the row order of the input.
    """
    reduced, pivots = row_echelon(rows, n_cols)
    pivot_set = set(pivots)
    basis = []
    for free in range(n_cols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * n_cols
        v[free] = Fraction(1)
        for row, col in zip(reduced, pivots):
            v[col] = -row[free]
        lead = next(x for x in v if x != 0)
        basis.append([x / lead for x in v])
    return basis


def rank(rows: Sequence[Sequence[Fraction]], n_cols: int) -> int:
    return len(row_echelon(rows, n_cols)[1])
