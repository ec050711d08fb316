"""Small dense matrix helpers over Q and Q[x] (block sizes are desk-scale)."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .polynomial import BasePolynomial

PolyMatrix = list[list[BasePolynomial]]


def poly_det(m: Sequence[Sequence[BasePolynomial]], nvars: int) -> BasePolynomial:
    """Determinant by Laplace expansion along rows, memoized on column subsets."""
    size = len(m)
    if size == 0:
        return BasePolynomial.constant(nvars, 1)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: frozenset) -> BasePolynomial:
        if row == size:
            return BasePolynomial.constant(nvars, 1)
        total = BasePolynomial.constant(nvars, 0)
        ordered = sorted(cols)
        for pos, c in enumerate(ordered):
            entry = m[row][c]
            if not entry:
                continue
            term = entry * minor(row + 1, cols - {c})
            total = total - term if pos % 2 else total + term
        return total

    return minor(0, frozenset(range(size)))


def poly_adjugate(m: Sequence[Sequence[BasePolynomial]], nvars: int) -> PolyMatrix:
    size = len(m)
    adj = [[BasePolynomial.constant(nvars, 0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            sub = [[m[r][c] for c in range(size) if c != j] for r in range(size) if r != i]
            cof = poly_det(sub, nvars)
            adj[j][i] = -cof if (i + j) % 2 else cof
    return adj


def poly_inverse(m: Sequence[Sequence[BasePolynomial]], nvars: int) -> PolyMatrix | None:
    """Inverse over Q[x], or None when the determinant is not a nonzero constant."""
    det = poly_det(m, nvars)
    if not det or not det.is_constant():
        return None
    inv_det = 1 / det.constant_term()
    return [[e.scale(inv_det) for e in row] for row in poly_adjugate(m, nvars)]


def rational_inverse(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]] | None:
    """Gauss-Jordan inverse over Q; None if singular."""
    size = len(m)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(size)] for i, row in enumerate(m)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col]), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]
