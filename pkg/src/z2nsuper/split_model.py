"""Graded vector bundles given by linear transition data, their split atlases,
and the linearization J/J^2 of an arbitrary atlas.

A bundle transition U -> V carries the base map (V's base coordinates as
polynomials in U's) and, for every nonzero degree sector, a square matrix M
with xi'^a = sum_b M[a][b](x) xi^b over the coordinates of that sector in
declaration order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .atlas import Atlas, check_cocycle
from .errors import CocycleFailure, MalformedAtlas, NonInvertibleLinearPart
from .grading import Convention, Degree, enumerate_nonzero_degrees
from .matrix import poly_det
from .morphism import Morphism
from .polynomial import BasePolynomial
from .series import GradedSeries, VariableTable

PolyMatrix = tuple[tuple[BasePolynomial, ...], ...]


@dataclass(frozen=True)
class BundleTransition:
    base_map: tuple[BasePolynomial, ...]
    blocks: dict[Degree, PolyMatrix]

    def __hash__(self):
        return hash((self.base_map, tuple(sorted(self.blocks.items()))))


@dataclass(frozen=True)
class GradedBundle:
    name: str
    table: VariableTable
    charts: tuple[str, ...]
    overlaps: tuple[tuple[str, str], ...]
    triples: tuple[tuple[str, str, str], ...]
    transitions: dict[tuple[str, str], BundleTransition]

    def __post_init__(self):
        sectors = self.sector_indices()
        for key, tr in self.transitions.items():
            if len(tr.base_map) != self.table.p:
                raise MalformedAtlas(f"transition {key[0]} -> {key[1]}: base map has wrong length")
            if set(tr.blocks) != set(sectors):
                missing = sorted(set(sectors) - set(tr.blocks))
                extra = sorted(set(tr.blocks) - set(sectors))
                raise MalformedAtlas(
                    f"transition {key[0]} -> {key[1]}: blocks missing for {[str(d) for d in missing]}"
                    f" or given for empty sectors {[str(d) for d in extra]}"
                )
            for sigma, block in tr.blocks.items():
                size = len(sectors[sigma])
                if len(block) != size or any(len(row) != size for row in block):
                    raise MalformedAtlas(
                        f"transition {key[0]} -> {key[1]}: block {sigma} must be {size}x{size}"
                    )

    @property
    def arity(self) -> int:
        return self.table.arity

    def ranks(self) -> tuple[int, ...]:
        """Rank per nonzero degree, in ascending lexicographic order of degrees."""
        counts = self.table.sector_ranks()
        return tuple(counts.get(d, 0) for d in enumerate_nonzero_degrees(self.arity))

    def sector_indices(self) -> dict[Degree, list[int]]:
        out: dict[Degree, list[int]] = {}
        for a, d in enumerate(self.table.formal_degrees):
            out.setdefault(d, []).append(a)
        return out


def _transition_morphism(table: VariableTable, tr: BundleTransition, sectors) -> Morphism:
    base = tuple(GradedSeries.from_poly(table, f) for f in tr.base_map)
    formal: list[GradedSeries | None] = [None] * table.q
    for sigma, idx in sectors.items():
        block = tr.blocks[sigma]
        for r, a in enumerate(idx):
            acc = GradedSeries.zero(table)
            for c, b in enumerate(idx):
                if block[r][c]:
                    acc = acc + GradedSeries.variable(table, table.formal_vars[b]).scale(block[r][c])
            formal[a] = acc
    return Morphism(table, table, base, tuple(formal))


def split_atlas(bundle: GradedBundle) -> Atlas:
    """Atlas of the split model: transitions linear in the formal coordinates."""
    sectors = bundle.sector_indices()
    p = bundle.table.p
    transitions = {}
    for key, tr in bundle.transitions.items():
        for sigma, block in tr.blocks.items():
            if not poly_det([list(row) for row in block], p):
                raise NonInvertibleLinearPart(
                    f"transition {key[0]} -> {key[1]}: block {sigma} is singular"
                )
        transitions[key] = _transition_morphism(bundle.table, tr, sectors)
    atlas = Atlas(
        bundle.name, bundle.table, bundle.charts, bundle.overlaps, bundle.triples, transitions
    )
    # linear data: composition is exact at order 1
    report = check_cocycle(atlas, 1)
    if not report.ok:
        raise CocycleFailure("bundle blocks violate the cocycle condition", report)
    return atlas


def linearize(atlas: Atlas, check: bool = True) -> GradedBundle:
    """Order-one part of every transition, split into sector blocks."""
    if check:
        report = check_cocycle(atlas, 2)
        if not report.ok:
            raise CocycleFailure("atlas fails the cocycle check at cap 2", report)
    table = atlas.table
    sectors: dict[Degree, list[int]] = {}
    for a, d in enumerate(table.formal_degrees):
        sectors.setdefault(d, []).append(a)
    transitions = {}
    for key, m in atlas.transitions.items():
        L = m.linear_part()
        blocks = {
            sigma: tuple(tuple(L[r][c] for c in idx) for r in idx) for sigma, idx in sectors.items()
        }
        transitions[key] = BundleTransition(m.body_map(), blocks)
    return GradedBundle(atlas.name, table, atlas.charts, atlas.overlaps, atlas.triples, transitions)


def monomial_count(q, k: int, convention: Convention = Convention.ZSP) -> int:
    """Number of normalized formal monomials of order k.

    ``q`` lists the rank of each nonzero degree, in ascending lexicographic
    order (length 2^n - 1), or maps degrees to ranks. Generators nilpotent
    under ``convention`` contribute (1+t)^rank, the others (1-t)^-rank; the
    answer is the t^k coefficient of the product.
    """
    if isinstance(q, dict):
        ranks = dict(q)
    else:
        q = tuple(q)
        n = (len(q) + 1).bit_length() - 1
        if n < 1 or 2**n - 1 != len(q):
            raise ValueError(f"rank tuple of length {len(q)} is not 2^n - 1")
        ranks = dict(zip(enumerate_nonzero_degrees(n), q))
    if k < 0:
        return 0
    series = [1] + [0] * k
    for sigma, rank in ranks.items():
        for _ in range(rank):
            if convention.nilpotent(sigma):
                series = [series[i] + (series[i - 1] if i else 0) for i in range(k + 1)]
            else:  # multiply by 1/(1-t): prefix sums
                series = list(itertools.accumulate(series))
    return series[k]
