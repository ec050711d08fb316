"""Superdomain morphisms given by the images of the target coordinates.

A morphism with ``source`` table S and ``target`` table T stores, for each
coordinate of T, its image as a section over S. Pullback substitutes these
images into a section over T; this is the unique algebra morphism determined
by the coordinate images.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    ArityMismatch,
    BaseMapNotSupported,
    DegreeMismatch,
    NonInvertibleLinearPart,
    TableMismatch,
)
from .matrix import poly_inverse, rational_inverse
from .polynomial import BasePolynomial
from .series import GradedSeries, VariableTable, _cap_min


@dataclass(frozen=True, eq=False)
class Morphism:
    source: VariableTable
    target: VariableTable
    base_images: tuple[GradedSeries, ...]
    formal_images: tuple[GradedSeries, ...]
    cap: int | None = None
    _powers: dict = field(default_factory=dict, repr=False)

    @classmethod
    def identity(cls, table: VariableTable, cap: int | None = None) -> Morphism:
        return cls(
            table,
            table,
            tuple(GradedSeries.variable(table, n, cap) for n in table.base_vars),
            tuple(GradedSeries.variable(table, n, cap) for n in table.formal_vars),
            cap,
        )

    @property
    def images(self) -> tuple[GradedSeries, ...]:
        return self.base_images + self.formal_images

    def image(self, name: str) -> GradedSeries:
        kind, i = self.target.lookup(name)
        return self.base_images[i] if kind == "base" else self.formal_images[i]

    def image_map(self) -> dict[str, GradedSeries]:
        return dict(zip(self.target.base_vars + self.target.formal_vars, self.images))

    def truncate(self, k: int) -> Morphism:
        cap = k if self.cap is None else min(k, self.cap)
        return Morphism(
            self.source,
            self.target,
            tuple(s.truncate(cap) for s in self.base_images),
            tuple(s.truncate(cap) for s in self.formal_images),
            cap,
        )

    def body_map(self) -> tuple[BasePolynomial, ...]:
        """epsilon-parts of the base images: the underlying map of base coordinates."""
        return tuple(s.epsilon() for s in self.base_images)

    def linear_part(self) -> list[list[BasePolynomial]]:
        """Matrix L[b][a] of coefficients of xi^a in the image of target xi^b."""
        q_src = self.source.q
        units = [tuple(int(i == a) for i in range(q_src)) for a in range(q_src)]
        return [[img.coefficient(u) for u in units] for img in self.formal_images]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Morphism):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.cap == other.cap
            and all(a.same_terms(b) for a, b in zip(self.images, other.images))
        )

    def __hash__(self):
        return hash((self.cap, self.images))

    def _power(self, kind: str, idx: int, e: int, cap: int | None) -> GradedSeries:
        key = (kind, idx, e, cap)
        hit = self._powers.get(key)
        if hit is not None:
            return hit
        if e == 0:
            val = GradedSeries.constant(self.source, 1, cap)
        else:
            img = (self.base_images if kind == "base" else self.formal_images)[idx]
            if cap is not None:
                img = img.truncate(cap)
            val = self._power(kind, idx, e - 1, cap) * img
        self._powers[key] = val
        return val

    def _substitute_base(self, poly: BasePolynomial, cap: int | None) -> GradedSeries:
        out = GradedSeries.zero(self.source, cap)
        for exp, c in poly.items():
            term = GradedSeries.constant(self.source, c, cap)
            for j, e in enumerate(exp):
                if e:
                    term = term * self._power("base", j, e, cap)
            out = out + term
        return out

    def _formal_product(self, mu: tuple[int, ...], cap: int | None) -> GradedSeries:
        key = ("word", mu, cap)
        hit = self._powers.get(key)
        if hit is not None:
            return hit
        prod = GradedSeries.constant(self.source, 1, cap)
        for b, e in enumerate(mu):
            if e:
                prod = prod * self._power("formal", b, e, cap)
        self._powers[key] = prod
        return prod

    def substitute_base(self, poly: BasePolynomial, cap: int | None = None) -> GradedSeries:
        """P(s^1, ..., s^p) for a polynomial in the target's base coordinates."""
        return self._substitute_base(poly, _cap_min(self.cap, cap))


def make_morphism(
    source: VariableTable,
    target: VariableTable,
    images: Mapping[str, GradedSeries] | Sequence[GradedSeries],
    cap: int | None = None,
) -> Morphism:
    """Validated morphism; every image must be homogeneous of its coordinate's degree."""
    if source.arity != target.arity:
        raise ArityMismatch("source and target have different arity")
    names = target.base_vars + target.formal_vars
    if isinstance(images, Mapping):
        unknown = set(images) - set(names)
        if unknown:
            raise DegreeMismatch(f"images given for unknown coordinates {sorted(unknown)}")
        missing = [n for n in names if n not in images]
        if missing:
            raise ArityMismatch(f"missing images for {missing}")
        seq = [images[n] for n in names]
    else:
        seq = list(images)
        if len(seq) != len(names):
            raise ArityMismatch(f"expected {len(names)} images, got {len(seq)}")
    zero = source.zero_degree
    for name, img in zip(names, seq):
        if img.table != source:
            raise TableMismatch(f"image of {name} is not a section over the source chart")
        kind, i = target.lookup(name)
        want = zero if kind == "base" else target.formal_degrees[i]
        if not img.is_homogeneous(want):
            raise DegreeMismatch(f"image of {name} is not homogeneous of degree {want}")
    if cap is None:
        caps = [s.cap for s in seq if s.cap is not None]
        cap = min(caps) if caps else None
    checked = [s.truncate(cap) if cap is not None else s for s in seq]
    p = target.p
    return Morphism(source, target, tuple(checked[:p]), tuple(checked[p:]), cap)


def pullback(m: Morphism, f: GradedSeries) -> GradedSeries:
    """Substitute the coordinate images of ``m`` into a section over its target."""
    if f.table != m.target:
        raise TableMismatch("section is not over the morphism's target")
    cap = _cap_min(m.cap, f.cap)
    out = GradedSeries.zero(m.source, cap)
    for mu, poly in f.items():
        if cap is not None and sum(mu) > cap:
            continue
        word = m._formal_product(mu, cap)
        if not word:
            continue
        out = out + m._substitute_base(poly, cap) * word
    return out


def compose(outer: Morphism, inner: Morphism) -> Morphism:
    """The morphism whose pullback is pullback(inner) after pullback(outer)."""
    if inner.target != outer.source:
        raise TableMismatch("inner.target must equal outer.source")
    cap = _cap_min(outer.cap, inner.cap)
    base = tuple(pullback(inner, s).with_cap(cap) for s in outer.base_images)
    formal = tuple(pullback(inner, s).with_cap(cap) for s in outer.formal_images)
    return Morphism(inner.source, outer.target, base, formal, cap)


def residuals(a: Morphism, b: Morphism, k: int | None = None) -> list[tuple[str, GradedSeries]]:
    """Nonzero per-coordinate differences a - b, truncated at order k."""
    if a.source != b.source or a.target != b.target:
        raise TableMismatch("morphisms between different tables")
    names = a.target.base_vars + a.target.formal_vars
    out = []
    for name, sa, sb in zip(names, a.images, b.images):
        diff = sa.with_cap(None) - sb.with_cap(None)
        if k is not None:
            diff = diff.truncate(k)
        if diff:
            out.append((name, diff))
    return out


def equal_mod(a: Morphism, b: Morphism, k: int) -> bool:
    """Agreement of all coordinate images modulo J^(k+1)."""
    return not residuals(a, b, k)


def _affine_body(m: Morphism) -> tuple[list[list[Fraction]], list[Fraction]]:
    p = m.source.p
    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    for j, poly in enumerate(m.body_map()):
        if poly.total_degree() > 1:
            raise BaseMapNotSupported(
                f"body map of {m.target.base_vars[j]} is not affine; only affine base changes invert exactly"
            )
        row = [Fraction(0)] * p
        for exp, c in poly.items():
            if any(exp):
                row[exp.index(1)] = c
        A.append(row)
        b.append(poly.constant_term())
    return A, b


def invert_mod_order(m: Morphism, k: int) -> Morphism:
    """Morphism g with compose(g, m) = id and compose(m, g) = id modulo J^(k+1).

    Solved by fixed-point iteration on
        x  = A^-1 (y - b - s_rest(x, xi))
        xi = L(x)^-1 (eta - zeta_rest(x, xi))
    where y = A x + b + s_rest and eta = L(x) xi + zeta_rest. Each sweep gains
    at least one J-adic order because s_rest lies in J^2 and zeta_rest in J^2.
    """
    src, tgt = m.source, m.target
    if src.p != tgt.p or sorted(src.formal_degrees) != sorted(tgt.formal_degrees):
        raise NonInvertibleLinearPart("source and target have different dimensions")
    if src.arity != tgt.arity:
        raise ArityMismatch("source and target have different arity")
    A, b = _affine_body(m)
    A_inv = rational_inverse(A)
    if A_inv is None:
        raise NonInvertibleLinearPart("body map is singular")
    L = m.linear_part()
    # degree preservation makes L block diagonal; checking per sector
    for sigma in sorted(set(tgt.formal_degrees)):
        rows = [i for i, d in enumerate(tgt.formal_degrees) if d == sigma]
        cols = [i for i, d in enumerate(src.formal_degrees) if d == sigma]
        block = [[L[r][c] for c in cols] for r in rows]
        if len(rows) != len(cols) or poly_inverse(block, src.p) is None:
            raise NonInvertibleLinearPart(f"linear part on sector {sigma} is not invertible over Q[x]")
    L_inv = poly_inverse(L, src.p)
    if L_inv is None:
        raise NonInvertibleLinearPart("linear part is not invertible over Q[x]")

    cap = k if m.cap is None else min(k, m.cap)
    mk = m.truncate(cap)
    s_rest = [s - GradedSeries.from_poly(src, s.epsilon(), cap) for s in mk.base_images]
    zeta_rest = [z - z.order_part(1) for z in mk.formal_images]

    y = [GradedSeries.variable(tgt, n, cap) for n in tgt.base_vars]
    eta = [GradedSeries.variable(tgt, n, cap) for n in tgt.formal_vars]
    shifted = [y[j] - b[j] for j in range(src.p)]
    base0 = tuple(
        sum((shifted[j].scale(A_inv[i][j]) for j in range(src.p)), GradedSeries.zero(tgt, cap))
        for i in range(src.p)
    )
    g = Morphism(tgt, src, base0, tuple(GradedSeries.zero(tgt, cap) for _ in range(src.q)), cap)
    for _ in range(cap + 3):
        pulled_s = [pullback(g, s) for s in s_rest]
        new_base = tuple(
            sum(
                ((shifted[j] - pulled_s[j]).scale(A_inv[i][j]) for j in range(src.p)),
                GradedSeries.zero(tgt, cap),
            )
            for i in range(src.p)
        )
        rhs = [eta[c] - pullback(g, zeta_rest[c]) for c in range(tgt.q)]
        new_formal = []
        for a in range(src.q):
            acc = GradedSeries.zero(tgt, cap)
            for c in range(tgt.q):
                if L_inv[a][c]:
                    acc = acc + g.substitute_base(L_inv[a][c], cap) * rhs[c]
            new_formal.append(acc)
        g_new = Morphism(tgt, src, new_base, tuple(new_formal), cap)
        if g_new == g:
            break
        g = g_new
    return g
