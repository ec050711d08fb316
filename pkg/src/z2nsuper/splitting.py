"""Order-by-order construction of a splitting of an atlas onto its split model.

The argument proceeds in two stages. First the base functions are embedded
chart-wise (phi_U: base polynomials -> sections with epsilon(phi_U(x)) = x),
correcting the overlap mismatch one J-adic order at a time by solving a
coboundary equation. Then the formal coordinates of the split model are
matched, again order by order, so that the chart maps intertwine split and
given transitions.

Conventions. A transition T = T(U -> V) has source chart U and target V and
psi = body map of T (V's base coordinates as polynomials in U's). The
mismatch of a family phi on U -> V is

    omega_UV(f) = phi_U(f o psi) - T*(phi_V(f))

for base polynomials f in V's coordinates. Restricting a section on V to the
overlap means transporting it through T*.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .atlas import Atlas, check_cocycle
from .errors import (
    BaseMapNotSupported,
    CocycleFailure,
    NonInvertibleLinearPart,
    UnsolvableAtBound,
)
from .linsolve import Inconsistent, LinearSystem
from .matrix import poly_inverse
from .morphism import Morphism, compose, invert_mod_order, pullback, residuals
from .polynomial import BasePolynomial
from .report import Report
from .series import GradedSeries, VariableTable, monomial_order_key, random_series
from .split_model import linearize, split_atlas


# -- embeddings of base functions ---------------------------------------------


@dataclass(frozen=True)
class EmbeddingFamily:
    """Per-chart images phi_U(x^i), degree-0 sections with epsilon-part x^i, at cap ``order``."""

    table: VariableTable
    order: int
    images: dict[str, tuple[GradedSeries, ...]]

    @classmethod
    def identity(cls, table: VariableTable, charts: Sequence[str], order: int = 0) -> EmbeddingFamily:
        ident = tuple(GradedSeries.variable(table, n, order) for n in table.base_vars)
        return cls(table, order, {c: ident for c in charts})

    def morphism(self, chart: str) -> Morphism:
        """phi_U as a chart endomorphism fixing the formal coordinates."""
        t = self.table
        formal = tuple(GradedSeries.variable(t, n, self.order) for n in t.formal_vars)
        return Morphism(t, t, self.images[chart], formal, self.order)

    def apply(self, chart: str, f: BasePolynomial) -> GradedSeries:
        return self.morphism(chart).substitute_base(f, self.order)

    def truncate(self, k: int) -> EmbeddingFamily:
        return EmbeddingFamily(
            self.table, k, {c: tuple(s.truncate(k) for s in imgs) for c, imgs in self.images.items()}
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingFamily):
            return NotImplemented
        return (
            self.table == other.table
            and self.order == other.order
            and self.images.keys() == other.images.keys()
            and all(self.images[c] == other.images[c] for c in self.images)
        )


def extend_phi(phi: EmbeddingFamily) -> EmbeddingFamily:
    """Raw extension to order k+1: the same polynomial images at the larger cap."""
    k = phi.order + 1
    return EmbeddingFamily(
        phi.table, k, {c: tuple(s.with_cap(k) for s in imgs) for c, imgs in phi.images.items()}
    )


def _base_poly_images(m: Morphism) -> list[BasePolynomial]:
    return list(m.body_map())


def mismatch_apply(
    phi: EmbeddingFamily, atlas: Atlas, src: str, dst: str, f: BasePolynomial
) -> GradedSeries:
    """phi_src(f o psi) - T*(phi_dst(f)) at cap phi.order, for f in dst's base coordinates."""
    k = phi.order
    t = atlas.transition(src, dst, k)
    if t is None:
        raise ValueError(f"no transition {src} -> {dst}")
    f_psi = f.compose(_base_poly_images(t)) if f.nvars else f
    return phi.apply(src, f_psi) - pullback(t, phi.apply(dst, f))


# -- Cech cochains of derivations ---------------------------------------------


@dataclass(frozen=True)
class CechCochain:
    """Derivation-valued cochain of J-adic order ``order``.

    For a 1-cochain, keys are ordered overlaps (U, V) and ``coeffs[(U, V)][j]``
    is the coefficient of d/dy^j (y = V's base coordinates), a section over U.
    For a 0-cochain, keys are chart ids and ``coeffs[U][i]`` multiplies d/dx^i.
    """

    atlas: Atlas
    order: int
    degree: int
    coeffs: dict

    @property
    def table(self) -> VariableTable:
        return self.atlas.table

    def is_zero(self) -> bool:
        return all(not w for ws in self.coeffs.values() for w in ws)

    def apply(self, key, f: BasePolynomial) -> GradedSeries:
        """Action on a base polynomial; 1-cochains evaluate d_j f at psi(x)."""
        table = self.table
        out = GradedSeries.zero(table, self.order)
        psi = None
        if self.degree == 1:
            psi = _base_poly_images(self.atlas.transition(key[0], key[1], self.order))
        for j, w in enumerate(self.coeffs[key]):
            d = f.derivative(j)
            if psi is not None and d.nvars:
                d = d.compose(psi)
            if d:
                out = out + w * GradedSeries.from_poly(table, d, self.order)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, CechCochain):
            return NotImplemented
        return (
            self.order == other.order
            and self.degree == other.degree
            and self.coeffs.keys() == other.coeffs.keys()
            and all(
                all(a.same_terms(b) for a, b in zip(self.coeffs[k], other.coeffs[k]))
                for k in self.coeffs
            )
        )


def mismatch_cocycle(phi: EmbeddingFamily, atlas: Atlas) -> CechCochain:
    """omega_UV(y^j) for every declared transition, at order phi.order.

    Raises CocycleFailure if any mismatch has terms below that order, which
    means the family was not consistent one order lower.
    """
    r = phi.order
    table = atlas.table
    coeffs = {}
    for key in atlas.transitions:
        ws = []
        for j in range(table.p):
            w = mismatch_apply(phi, atlas, key[0], key[1], BasePolynomial.variable(table.p, j))
            low = w.truncate(r - 1) if r > 0 else w
            if low:
                raise CocycleFailure(
                    f"mismatch on {key[0]} -> {key[1]} has terms of order below {r}: {low}"
                )
            ws.append(w)
        coeffs[key] = tuple(ws)
    return CechCochain(atlas, r, 1, coeffs)


def check_mismatch_identity(omega: CechCochain) -> Report:
    """Cech cocycle identity on declared triples, at the cochain's order:

        omega_UW(w^l) = sum_j omega_UV(y^j) * (d_j psi_VW^l)(psi_UV) + [T_UV* omega_VW(w^l)]_r
    """
    atlas, r = omega.atlas, omega.order
    table = atlas.table
    report = Report(f"mismatch cocycle identity: atlas {atlas.name}, order {r}")
    for tri in atlas.triples:
        for u, v, w in itertools.permutations(tri):
            if not all(key in omega.coeffs for key in ((u, v), (v, w), (u, w))):
                continue
            t_uv = atlas.transition(u, v, r)
            psi_uv = _base_poly_images(t_uv)
            psi_vw = _base_poly_images(atlas.transition(v, w, r))
            fails = []
            for l in range(table.p):
                rhs = pullback(t_uv, omega.coeffs[(v, w)][l]).order_part(r)
                for j in range(table.p):
                    d = psi_vw[l].derivative(j).compose(psi_uv)
                    rhs = rhs + omega.coeffs[(u, v)][j] * GradedSeries.from_poly(table, d, r)
                diff = (omega.coeffs[(u, w)][l] - rhs).truncate(r)
                if diff:
                    fails.append((table.base_vars[l], diff))
            report.add(f"omega {u} -> {v} -> {w}", fails)
    return report


# -- the linear solves ----------------------------------------------------------


def _chart_sequence(atlas: Atlas, chart_order: Sequence[str] | None) -> list[str]:
    if chart_order is None:
        return list(atlas.charts)
    if sorted(chart_order) != sorted(atlas.charts):
        raise ValueError("chart_order must be a permutation of the atlas charts")
    return list(chart_order)


def _basis(table: VariableTable, order: int, degree, bound: int):
    monos = sorted(table.monomials(order, degree), key=monomial_order_key)
    exps = table.base_monomials(bound)
    return [(mu, alpha) for mu in monos for alpha in exps]


def _element(table: VariableTable, mu, alpha, cap: int) -> GradedSeries:
    poly = BasePolynomial(table.p, {alpha: 1})
    return GradedSeries.monomial(table, mu, poly, cap)


def _accumulate(row_map: dict, eq_prefix, series: GradedSeries, col, factor=1) -> None:
    for mu, poly in series.items():
        for alpha, c in poly.items():
            row_map.setdefault(eq_prefix + (mu, alpha), {})
            entry = row_map[eq_prefix + (mu, alpha)]
            entry[col] = entry.get(col, 0) + factor * c


def _solve(columns, row_map: dict, rhs_map: dict, bound: int, what: str) -> dict:
    system = LinearSystem(list(columns))
    for key in sorted(set(row_map) | set(rhs_map), key=repr):
        system.add_row(row_map.get(key, {}), rhs_map.get(key, 0))
    try:
        return system.solve()
    except Inconsistent as exc:
        raise UnsolvableAtBound(bound, f"{what}: {exc}") from None


def coboundary_solve(
    omega: CechCochain, bound: int, chart_order: Sequence[str] | None = None
) -> CechCochain:
    """0-cochain eta with [T_UV* eta_V]_r - sum_i (d_i psi_UV) eta_U^i = omega_UV.

    Coefficients of eta are base polynomials of total degree <= ``bound``.
    Raises UnsolvableAtBound when no such eta exists.
    """
    atlas, r = omega.atlas, omega.order
    table = atlas.table
    charts = _chart_sequence(atlas, chart_order)
    zero = GradedSeries.zero(table, r)
    if omega.is_zero():
        return CechCochain(atlas, r, 0, {c: (zero,) * table.p for c in atlas.charts})
    basis = _basis(table, r, table.zero_degree, bound)
    columns = [(c, i, mu, alpha) for c in charts for i in range(table.p) for mu, alpha in basis]
    rows: dict = {}
    rhs: dict = {}
    for (src, dst), ws in omega.coeffs.items():
        t = atlas.transition(src, dst, r)
        psi = _base_poly_images(t)
        for j, w in enumerate(ws):
            _accumulate(rhs, (src, dst, j), w, "rhs")
        for col in columns:
            chart, i, mu, alpha = col
            e = _element(table, mu, alpha, r)
            if chart == dst:
                _accumulate(rows, (src, dst, i), pullback(t, e).order_part(r), col)
            if chart == src:
                for j in range(table.p):
                    d = psi[j].derivative(i)
                    if d:
                        _accumulate(rows, (src, dst, j), e * GradedSeries.from_poly(table, d, r), col, -1)
    rhs = {k: v["rhs"] for k, v in rhs.items()}
    solution = _solve(columns, rows, rhs, bound, f"coboundary at order {r}")
    coeffs = {}
    for c in atlas.charts:
        acc = [zero] * table.p
        for (chart, i, mu, alpha), val in solution.items():
            if chart == c:
                acc[i] = acc[i] + _element(table, mu, alpha, r).scale(val)
        coeffs[c] = tuple(acc)
    return CechCochain(atlas, r, 0, coeffs)


def build_phi(
    atlas: Atlas, k: int, bound: int, chart_order: Sequence[str] | None = None
) -> EmbeddingFamily:
    """Consistent embedding family at order k, starting from the identity."""
    phi = EmbeddingFamily.identity(atlas.table, atlas.charts, 0)
    for _ in range(k):
        phi = extend_phi(phi)
        omega = mismatch_cocycle(phi, atlas)
        if omega.is_zero():
            continue
        eta = coboundary_solve(omega, bound, chart_order)
        phi = EmbeddingFamily(
            phi.table,
            phi.order,
            {c: tuple(a + b for a, b in zip(phi.images[c], eta.coeffs[c])) for c in phi.images},
        )
    return phi


def phi_consistency(phi: EmbeddingFamily, atlas: Atlas, polys: Sequence[BasePolynomial]) -> Report:
    report = Report(f"embedding consistency: atlas {atlas.name}, order {phi.order}")
    for src, dst in atlas.transitions:
        fails = []
        for f in polys:
            diff = mismatch_apply(phi, atlas, src, dst, f)
            if diff:
                fails.append((str(GradedSeries.from_poly(atlas.table, f)), diff))
        report.add(f"overlap {src} -> {dst}", fails)
    return report


# -- the splitting isomorphism ----------------------------------------------------


@dataclass(frozen=True)
class SplittingIso:
    """Chart maps F_U with source the given chart U and target the split chart U.

    F_U stores the images of the split-model coordinates as sections over the
    given chart; intertwining reads compose(F_V, T_UV) = compose(S_UV, F_U).
    """

    name: str
    table: VariableTable
    order: int
    maps: dict[str, Morphism]
    report: Report | None = field(default=None, compare=False)

    @classmethod
    def identity(cls, atlas: Atlas, k: int) -> SplittingIso:
        ident = Morphism.identity(atlas.table, k)
        return cls(atlas.name, atlas.table, k, {c: ident for c in atlas.charts})

    def __eq__(self, other) -> bool:
        if not isinstance(other, SplittingIso):
            return NotImplemented
        return (
            self.name == other.name
            and self.table == other.table
            and self.order == other.order
            and self.maps == other.maps
        )


def _intertwining_residual(t: Morphism, s: Morphism, f_u: Morphism, f_v: Morphism, k: int):
    return residuals(compose(f_v, t), compose(s, f_u), k)


MAX_ORDERINGS = 24


def build_splitting_iso(
    atlas: Atlas, k: int, bound: int, chart_order: Sequence[str] | None = None
) -> SplittingIso:
    """Splitting maps at order k with correction coefficients of base degree <= bound.

    With an explicit ``chart_order`` the unknowns are ordered by it and a
    failed solve raises UnsolvableAtBound. Without one, declaration order is
    tried first; since polynomial (rather than smooth) coefficients make some
    pivot choices dead ends, further chart orderings are then tried in
    lexicographic permutation order (at most MAX_ORDERINGS in total).
    """
    report = check_cocycle(atlas, k)
    if not report.ok:
        raise CocycleFailure(f"atlas fails the cocycle check at cap {k}", report)
    if chart_order is not None:
        return _build_iso(atlas, k, bound, chart_order)
    first_error = None
    for order in itertools.islice(itertools.permutations(atlas.charts), MAX_ORDERINGS):
        try:
            return _build_iso(atlas, k, bound, order)
        except UnsolvableAtBound as exc:
            first_error = first_error or exc
    raise first_error


def _build_iso(atlas: Atlas, k: int, bound: int, chart_order: Sequence[str]) -> SplittingIso:
    split = split_atlas(linearize(atlas, check=False))
    phi = build_phi(atlas, k, bound, chart_order)
    table = atlas.table
    charts = _chart_sequence(atlas, chart_order)
    ident_formal = tuple(GradedSeries.variable(table, n, k) for n in table.formal_vars)
    formal = {c: list(ident_formal) for c in atlas.charts}

    def maps() -> dict[str, Morphism]:
        return {c: Morphism(table, table, phi.images[c], tuple(formal[c]), k) for c in atlas.charts}

    trans = {key: (atlas.transition(*key, k), split.transitions[key].truncate(k)) for key in atlas.transitions}
    for r in range(2, k + 1):
        current = maps()
        rhs: dict = {}
        for (src, dst), (t, s) in trans.items():
            lhs = compose(current[dst], t)
            rgt = compose(s, current[src])
            for name, a, b in zip(table.base_vars + table.formal_vars, lhs.images, rgt.images):
                diff = (a - b).truncate(r)
                low = diff.truncate(r - 1)
                if low:
                    raise CocycleFailure(f"intertwining {src} -> {dst} broken below order {r} on {name}': {low}")
                kind, idx = table.lookup(name)
                if kind == "base":
                    if diff:
                        raise CocycleFailure(f"embedding inconsistent on {src} -> {dst} for {name}': {diff}")
                    continue
                _accumulate(rhs, (src, dst, idx), -diff, "rhs")
        if not rhs:
            continue
        rhs = {key: v["rhs"] for key, v in rhs.items()}
        columns = []
        for c in charts:
            for a, deg in enumerate(table.formal_degrees):
                columns += [(c, a, mu, alpha) for mu, alpha in _basis(table, r, deg, bound)]
        rows: dict = {}
        for (src, dst), (t, s) in trans.items():
            lin = s.linear_part()
            for col in columns:
                chart, a, mu, alpha = col
                e = _element(table, mu, alpha, r)
                if chart == dst:
                    _accumulate(rows, (src, dst, a), pullback(t, e).order_part(r), col)
                if chart == src:
                    for b in range(table.q):
                        if lin[b][a]:
                            _accumulate(rows, (src, dst, b), e * GradedSeries.from_poly(table, lin[b][a], r), col, -1)
        solution = _solve(columns, rows, rhs, bound, f"splitting at order {r}")
        for (chart, a, mu, alpha), val in solution.items():
            formal[chart][a] = formal[chart][a] + _element(table, mu, alpha, k).scale(val)
    return SplittingIso(atlas.name, table, k, maps())


def _random_pair(table: VariableTable, rng: random.Random, k: int):
    # homogeneous sections whose J-adic orders add up to at most k
    n1 = rng.randint(0, k)
    n2 = rng.randint(0, k - n1)
    degs = [table.zero_degree] + sorted(set(table.formal_degrees))
    a = random_series(table, rng, max_terms=3, max_order=n1, degree=rng.choice(degs), max_base_degree=2)
    b = random_series(table, rng, max_terms=3, max_order=n2, degree=rng.choice(degs), max_base_degree=2)
    return a, b


def verify_splitting(
    atlas: Atlas, iso: SplittingIso, k: int, seed: int = 0, pairs: int = 12
) -> Report:
    """Check that ``iso`` is a splitting of ``atlas`` modulo J^(k+1)."""
    report = Report(f"splitting verification: atlas {atlas.name}, k={k}, seed={seed}")
    table = atlas.table
    if iso.table != table:
        report.add("tables", note="iso and atlas use different variable tables")
        return report
    if iso.order < k:
        report.add("order", note=f"iso is only known to order {iso.order}")
        return report
    rng = random.Random(seed)
    maps = {}
    for c in atlas.charts:
        f = iso.maps.get(c)
        if f is None:
            report.add(f"chart {c}", note="no map given")
            continue
        f = f.truncate(k)
        maps[c] = f
        one = GradedSeries.constant(table, 1, k)
        report.add(f"unital {c}", [("1", pullback(f, one) - one)] if pullback(f, one) != one else ())
        bad = []
        for name, img in f.image_map().items():
            kind, i = table.lookup(name)
            want = table.zero_degree if kind == "base" else table.formal_degrees[i]
            if not img.is_homogeneous(want):
                bad.append((name, img))
        report.add(f"degrees {c}", bad)
        eps = [
            (name, GradedSeries.from_poly(table, poly - BasePolynomial.variable(table.p, j)))
            for j, (name, poly) in enumerate(zip(table.base_vars, f.body_map()))
            if poly != BasePolynomial.variable(table.p, j)
        ]
        report.add(f"body identity {c}", eps)
        fails = []
        for _ in range(pairs):
            a, b = _random_pair(table, rng, k)
            lhs = pullback(f, a * b).truncate(k)
            rhs = (pullback(f, a) * pullback(f, b)).truncate(k)
            if not lhs.same_terms(rhs):
                fails.append((f"{a} * {b}", lhs - rhs))
        report.add(f"multiplicative {c}", fails)
        lin = f.linear_part()
        bad_sectors = []
        for sigma in sorted(set(table.formal_degrees)):
            idx = [i for i, d in enumerate(table.formal_degrees) if d == sigma]
            if poly_inverse([[lin[r][s] for s in idx] for r in idx], table.p) is None:
                bad_sectors.append(str(sigma))
        report.add(
            f"linear part {c}", note=f"singular on sectors {', '.join(bad_sectors)}" if bad_sectors else ""
        )
        if not bad_sectors:
            try:
                g = invert_mod_order(f, k)
                report.add(f"local inverse {c}", residuals(compose(g, f), Morphism.identity(table, k), k))
            except (NonInvertibleLinearPart, BaseMapNotSupported) as exc:
                report.add(f"local inverse {c}", note=str(exc))
    try:
        split = split_atlas(linearize(atlas, check=False))
    except (NonInvertibleLinearPart, CocycleFailure) as exc:
        report.add("split model", note=str(exc))
        return report
    for src, dst in atlas.transitions:
        if src not in maps or dst not in maps:
            continue
        t = atlas.transition(src, dst, k)
        s = split.transitions[(src, dst)].truncate(k)
        report.add(f"intertwining {src} -> {dst}", _intertwining_residual(t, s, maps[src], maps[dst], k))
    return report
