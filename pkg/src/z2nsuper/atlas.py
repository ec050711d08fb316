"""Atlases of Z_2^n-manifolds: charts, overlaps and transition morphisms.

All charts share one variable table. ``transitions[(U, V)]`` is the morphism
with source chart U and target chart V, i.e. V's coordinates written in U's
coordinates. Overlaps and triple overlaps are declared combinatorially.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ArityMismatch, GradingViolation, MalformedAtlas, NonInvertibleLinearPart, BaseMapNotSupported
from .grading import Convention, Degree
from .morphism import Morphism, compose, invert_mod_order, make_morphism, residuals
from .report import Report
from .series import GradedSeries, VariableTable


@dataclass(frozen=True, eq=False)
class Atlas:
    name: str
    table: VariableTable
    charts: tuple[str, ...]
    overlaps: tuple[tuple[str, str], ...]
    triples: tuple[tuple[str, str, str], ...]
    transitions: dict[tuple[str, str], Morphism]
    _derived: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(set(self.charts)) != len(self.charts):
            raise MalformedAtlas("duplicate chart ids")
        known = set(self.charts)
        pairs = set()
        for a, b in self.overlaps:
            if a not in known or b not in known:
                raise MalformedAtlas(f"overlap {a} {b} references an undeclared chart")
            if a == b:
                raise MalformedAtlas(f"overlap of chart {a} with itself")
            pairs.add(frozenset((a, b)))
        if len(pairs) != len(self.overlaps):
            raise MalformedAtlas("overlap declared twice")
        for tri in self.triples:
            if len(set(tri)) != 3 or not set(tri) <= known:
                raise MalformedAtlas(f"bad triple {' '.join(tri)}")
            for a, b in itertools.combinations(tri, 2):
                if frozenset((a, b)) not in pairs:
                    raise MalformedAtlas(f"triple {' '.join(tri)} needs overlap {a} {b}")
        for (a, b), m in self.transitions.items():
            if frozenset((a, b)) not in pairs:
                raise MalformedAtlas(f"transition {a} -> {b} on an undeclared overlap")
            if m.source != self.table or m.target != self.table:
                raise MalformedAtlas(f"transition {a} -> {b} is not over the atlas table")
        for a, b in self.overlaps:
            if (a, b) not in self.transitions and (b, a) not in self.transitions:
                raise MalformedAtlas(f"overlap {a} {b} has no transition")

    @property
    def arity(self) -> int:
        return self.table.arity

    @property
    def convention(self) -> Convention:
        return self.table.convention

    def __eq__(self, other) -> bool:
        if not isinstance(other, Atlas):
            return NotImplemented
        return (
            self.name == other.name
            and self.table == other.table
            and self.charts == other.charts
            and self.overlaps == other.overlaps
            and self.triples == other.triples
            and self.transitions == other.transitions
        )

    def transition(self, src: str, dst: str, cap: int | None = None) -> Morphism | None:
        """Transition src -> dst at ``cap``; derived by inversion if only dst -> src is declared.

        Returns None when the reverse transition is not invertible.
        """
        declared = self.transitions.get((src, dst))
        if declared is not None:
            return declared if cap is None else declared.truncate(cap)
        reverse = self.transitions.get((dst, src))
        if reverse is None:
            return None
        if cap is None:
            raise ValueError("deriving an inverse transition needs a finite cap")
        key = (src, dst, cap)
        if key not in self._derived:
            try:
                self._derived[key] = invert_mod_order(reverse, cap)
            except (NonInvertibleLinearPart, BaseMapNotSupported):
                self._derived[key] = None
        return self._derived[key]

    def oriented_overlaps(self) -> list[tuple[str, str]]:
        """One orientation per overlap, preferring a declared transition."""
        out = []
        for a, b in self.overlaps:
            out.append((a, b) if (a, b) in self.transitions else (b, a))
        return out

    def replace(self, **changes) -> Atlas:
        data = dict(
            name=self.name,
            table=self.table,
            charts=self.charts,
            overlaps=self.overlaps,
            triples=self.triples,
            transitions=self.transitions,
        )
        data.update(changes)
        return Atlas(**data)


def check_cocycle(atlas: Atlas, cap: int) -> Report:
    """Verify transition compatibility modulo J^(cap+1).

    For each overlap with both orientations available, the two transitions
    must be mutually inverse. For each declared triple and each ordering
    (U, V, W) whose transitions are available, T(V->W) o T(U->V) = T(U->W).
    """
    report = Report(f"cocycle check: atlas {atlas.name}, convention={atlas.convention.value}, cap={cap}")
    ident = Morphism.identity(atlas.table, cap)
    for a, b in atlas.overlaps:
        f = atlas.transition(a, b, cap)
        g = atlas.transition(b, a, cap)
        if f is None or g is None:
            continue
        fails = residuals(compose(g, f), ident, cap) + residuals(compose(f, g), ident, cap)
        report.add(f"inverse {a} <-> {b}", fails)
    for tri in atlas.triples:
        checked = 0
        for u, v, w in itertools.permutations(tri):
            t_uv = atlas.transition(u, v, cap)
            t_vw = atlas.transition(v, w, cap)
            t_uw = atlas.transition(u, w, cap)
            if t_uv is None or t_vw is None or t_uw is None:
                continue
            checked += 1
            fails = residuals(compose(t_vw, t_uv), t_uw, cap)
            report.add(f"cocycle {u} -> {v} -> {w}", fails)
        if not checked:
            raise MalformedAtlas(f"triple {' '.join(tri)} has no checkable orientation")
    return report


def superize(atlas: Atlas, convention: Convention | str) -> Atlas:
    """Read the atlas's transition polynomials as commutative data and reinterpret
    them over graded generators in canonical order under ``convention``.

    No signs are adjusted; run check_cocycle on the result to see whether the
    superized data is still a cocycle.
    """
    if isinstance(convention, str):
        convention = Convention.parse(convention)
    new_table = atlas.table.with_convention(convention)
    transitions = {}
    for key, m in atlas.transitions.items():
        images = {}
        for name, img in m.image_map().items():
            kind, i = atlas.table.lookup(name)
            want = atlas.table.zero_degree if kind == "base" else atlas.table.formal_degrees[i]
            for mu in img.terms:
                if atlas.table.monomial_degree(mu) != want:
                    raise GradingViolation(
                        f"transition {key[0]} -> {key[1]}: term of degree "
                        f"{atlas.table.monomial_degree(mu)} in the {want} slot {name}'"
                    )
                for a, e in enumerate(mu):
                    if e > 1 and new_table.is_nilpotent(a):
                        raise GradingViolation(
                            f"transition {key[0]} -> {key[1]}: {new_table.formal_vars[a]} is "
                            f"nilpotent under {convention.value} but appears squared in {name}'"
                        )
            images[name] = GradedSeries(new_table, img.terms, img.cap)
        transitions[key] = make_morphism(new_table, new_table, images, m.cap)
    return atlas.replace(table=new_table, transitions=transitions)


# -- tangent lift ----------------------------------------------------------

D_DEGREE = Degree((1, 0))


def lifted_table(table: VariableTable, prefix: str = "d") -> VariableTable:
    """Coordinates (x, xi, dx, dxi) with bidegrees (0,0), (0,1), (1,0), (1,1)."""
    if table.arity != 1:
        raise ArityMismatch(f"tangent lift needs an arity-1 atlas, got n={table.arity}")
    formal = [(n, Degree((0, 1))) for n in table.formal_vars]
    formal += [(prefix + n, Degree((1, 0))) for n in table.base_vars]
    formal += [(prefix + n, Degree((1, 1))) for n in table.formal_vars]
    names = set(table.base_vars) | {n for n, _ in formal}
    if len(names) != table.p + len(formal):
        raise ValueError(f"differential names with prefix {prefix!r} collide with existing variables")
    return VariableTable.build(2, table.base_vars, formal, Convention.ZSP)


def embed_in_lift(s: GradedSeries, lifted: VariableTable) -> GradedSeries:
    pad = (0,) * (lifted.q - s.table.q)
    return GradedSeries(lifted, {mu + pad: p for mu, p in s.items()}, s.cap)


def lift_derivative(s: GradedSeries) -> GradedSeries:
    """Apply the degree-(1,0) derivation d on a section over a lifted table.

    d(x^j) = dx^j, d(xi^a) = dxi^a, d(dx) = d(dxi) = 0, and
    d(ab) = d(a) b + sign((1,0), deg a) a d(b).
    """
    table = s.table
    p = table.p
    q0 = (table.q - p) // 2  # number of original formal generators
    dx_index = [q0 + j for j in range(p)]
    dxi_index = [q0 + p + a for a in range(q0)]
    cap = s.cap
    out = GradedSeries.zero(table, cap)

    def unit(a: int) -> GradedSeries:
        return GradedSeries.monomial(table, tuple(int(i == a) for i in range(table.q)), cap=cap)

    for mu, poly in s.items():
        word_series = GradedSeries.monomial(table, mu, cap=cap)
        for j in range(p):
            dp = poly.derivative(j)
            if dp:
                out = out + GradedSeries.from_poly(table, dp, cap) * unit(dx_index[j]) * word_series
        word = [a for a, e in enumerate(mu) for _ in range(e)]
        coeff = GradedSeries.from_poly(table, poly, cap)
        passed = table.zero_degree
        for i, a in enumerate(word):
            if a < q0:
                sign = -1 if _sp(D_DEGREE, passed) else 1
                left = GradedSeries.constant(table, sign, cap)
                for b in word[:i]:
                    left = left * unit(b)
                right = GradedSeries.constant(table, 1, cap)
                for b in word[i + 1:]:
                    right = right * unit(b)
                out = out + coeff * left * unit(dxi_index[a]) * right
            passed = passed + table.formal_degrees[a]
    return out


def _sp(a: Degree, b: Degree) -> int:
    return sum(x & y for x, y in zip(a.bits, b.bits)) & 1


def tangent_lift(atlas: Atlas, prefix: str = "d") -> Atlas:
    """Lift an n=1 atlas to the Z_2^2 tangent atlas by differentiating transitions."""
    lifted = lifted_table(atlas.table, prefix)
    transitions = {}
    for key, m in atlas.transitions.items():
        images: dict[str, GradedSeries] = {}
        for name, img in m.image_map().items():
            images[name] = embed_in_lift(img, lifted)
        for name in atlas.table.base_vars + atlas.table.formal_vars:
            images[prefix + name] = lift_derivative(images[name])
        transitions[key] = make_morphism(lifted, lifted, images, m.cap)
    return atlas.replace(table=lifted, transitions=transitions)
