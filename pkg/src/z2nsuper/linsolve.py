"""Exact sparse linear solve with a fixed column order.

Rows are scaled to integers and eliminated without fractions (each pivot step
forms ``p*row - c*pivot_row`` and divides out the row content), producing a
reduced echelon form. Pivots are chosen column by column in the given order,
always taking the first eligible row, so the result is deterministic; free
columns are set to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence


class Inconsistent(ArithmeticError):
    """The system has no solution."""


@dataclass
class LinearSystem:
    """Rows ``sum coeffs[col] * u[col] = rhs`` over Q, columns keyed by hashables."""

    columns: list[Hashable]
    rows: list[tuple[dict[Hashable, Fraction], Fraction]] = field(default_factory=list)

    def add_row(self, coeffs: dict[Hashable, Fraction], rhs) -> None:
        clean = {c: Fraction(v) for c, v in coeffs.items() if v}
        rhs = Fraction(rhs)
        if clean or rhs:
            self.rows.append((clean, rhs))

    def solve(self) -> dict[Hashable, Fraction]:
        return solve_sparse(self.columns, self.rows)


def _integer_row(coeffs: dict[int, Fraction], rhs: Fraction) -> tuple[dict[int, int], int]:
    den = 1
    for v in list(coeffs.values()) + [rhs]:
        den = den * v.denominator // math.gcd(den, v.denominator)
    row = {c: int(v * den) for c, v in coeffs.items()}
    return _normalize(row, int(rhs * den))


def _normalize(row: dict[int, int], rhs: int) -> tuple[dict[int, int], int]:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
    g = math.gcd(g, rhs)
    if g > 1:
        row = {c: v // g for c, v in row.items()}
        rhs //= g
    return row, rhs


def solve_sparse(
    columns: Sequence[Hashable],
    rows: Iterable[tuple[dict[Hashable, Fraction], Fraction]],
) -> dict[Hashable, Fraction]:
    """Solution keyed by column (free columns omitted, i.e. zero).

    Raises Inconsistent if some row reduces to 0 = nonzero.
    """
    index = {c: i for i, c in enumerate(columns)}
    if len(index) != len(columns):
        raise ValueError("duplicate column keys")
    work: list[tuple[dict[int, int], int]] = []
    for coeffs, rhs in rows:
        unknown = set(coeffs) - set(index)
        if unknown:
            raise KeyError(f"row mentions undeclared columns {sorted(map(str, unknown))[:3]}")
        work.append(_integer_row({index[c]: Fraction(v) for c, v in coeffs.items()}, Fraction(rhs)))

    pivots: dict[int, int] = {}  # column -> row position in `work`
    used = [False] * len(work)
    for col in range(len(columns)):
        prow = next((r for r, (row, _) in enumerate(work) if not used[r] and row.get(col)), None)
        if prow is None:
            continue
        used[prow] = True
        pivots[col] = prow
        prow_coeffs, prow_rhs = work[prow]
        p = prow_coeffs[col]
        for r, (row, rhs) in enumerate(work):
            c = row.get(col)
            if r == prow or not c:
                continue
            new = {k: v * p for k, v in row.items()}
            for k, v in prow_coeffs.items():
                s = new.get(k, 0) - c * v
                if s:
                    new[k] = s
                else:
                    new.pop(k, None)
            work[r] = _normalize(new, rhs * p - c * prow_rhs)

    for r, (row, rhs) in enumerate(work):
        if not row and rhs:
            raise Inconsistent(f"row {r} reduces to 0 = {rhs}")
    solution: dict[Hashable, Fraction] = {}
    for col, r in pivots.items():
        row, rhs = work[r]
        if rhs:
            solution[columns[col]] = Fraction(rhs, row[col])
    return solution
