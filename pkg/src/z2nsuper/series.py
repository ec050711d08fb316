"""Truncated formal series Q[x][[xi]] over Z_2^n-commutative generators.

A section is a finite sum of terms P_mu(x) * xi^mu where P_mu is a base
polynomial and xi^mu a normalized monomial in the formal generators (taken in
declaration order). Generators whose self-sign is -1 square to zero; all other
nonzero-degree generators are genuinely formal, so products are truncated at
the series cap.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ArityMismatch, DegreeMismatch, TableMismatch, UnknownVariable
from .grading import Convention, Degree
from .polynomial import BasePolynomial

Monomial = tuple[int, ...]

# j_order of the zero series
J_INFINITY = math.inf


def _cap_min(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class VariableTable:
    """Names and degrees of the coordinates of one superdomain chart."""

    arity: int
    base_vars: tuple[str, ...]
    formal_vars: tuple[str, ...]
    formal_degrees: tuple[Degree, ...]
    convention: Convention = Convention.ZSP
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        names = self.base_vars + self.formal_vars
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if len(self.formal_vars) != len(self.formal_degrees):
            raise ValueError("each formal variable needs exactly one degree")
        for name, deg in zip(self.formal_vars, self.formal_degrees):
            if deg.arity != self.arity:
                raise ArityMismatch(f"{name} has degree {deg}, expected arity {self.arity}")
            if deg.is_zero():
                raise DegreeMismatch(f"formal variable {name} must have nonzero degree")
        q = len(self.formal_vars)
        index = {n: ("base", i) for i, n in enumerate(self.base_vars)}
        index.update({n: ("formal", a) for a, n in enumerate(self.formal_vars)})
        c = self._cache
        c["index"] = index
        c["nil"] = tuple(self.convention.nilpotent(d) for d in self.formal_degrees)
        c["sign"] = tuple(
            tuple(self.convention.sign(da, db) for db in self.formal_degrees)
            for da in self.formal_degrees
        )
        c["mul"] = {}
        c["deg"] = {}
        c["zero_mono"] = (0,) * q

    @classmethod
    def build(
        cls,
        arity: int,
        base: Sequence[str] = (),
        formal: Sequence[tuple[str, Degree | str]] = (),
        convention: Convention | str = Convention.ZSP,
    ) -> VariableTable:
        degs = tuple(d if isinstance(d, Degree) else Degree.parse(d) for _, d in formal)
        if isinstance(convention, str):
            convention = Convention.parse(convention)
        return cls(arity, tuple(base), tuple(n for n, _ in formal), degs, convention)

    def with_convention(self, convention: Convention) -> VariableTable:
        return VariableTable(
            self.arity, self.base_vars, self.formal_vars, self.formal_degrees, convention
        )

    @property
    def p(self) -> int:
        return len(self.base_vars)

    @property
    def q(self) -> int:
        return len(self.formal_vars)

    @property
    def zero_degree(self) -> Degree:
        return Degree.zero(self.arity)

    def lookup(self, name: str) -> tuple[str, int]:
        try:
            return self._cache["index"][name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def is_nilpotent(self, a: int) -> bool:
        return self._cache["nil"][a]

    def sign(self, a: int, b: int) -> int:
        return self._cache["sign"][a][b]

    def sector_ranks(self) -> dict[Degree, int]:
        ranks: dict[Degree, int] = {}
        for d in self.formal_degrees:
            ranks[d] = ranks.get(d, 0) + 1
        return ranks

    def monomial_degree(self, mu: Monomial) -> Degree:
        cache = self._cache["deg"]
        deg = cache.get(mu)
        if deg is None:
            bits = [0] * self.arity
            for a, e in enumerate(mu):
                if e & 1:
                    for i, b in enumerate(self.formal_degrees[a].bits):
                        bits[i] ^= b
            deg = cache[mu] = Degree(tuple(bits))
        return deg

    def monomial_mul(self, mu: Monomial, nu: Monomial) -> tuple[int, Monomial | None]:
        """Sign and normal form of xi^mu * xi^nu; sign 0 when the product vanishes."""
        cache = self._cache["mul"]
        key = (mu, nu)
        hit = cache.get(key)
        if hit is not None:
            return hit
        nil = self._cache["nil"]
        sign_tab = self._cache["sign"]
        q = len(mu)
        result: tuple[int, Monomial | None]
        if any(nil[a] and mu[a] + nu[a] > 1 for a in range(q)):
            result = (0, None)
        else:
            sign = 1
            for a in range(q):
                if nu[a]:
                    row = sign_tab[a]
                    for b in range(a + 1, q):
                        if mu[b] and row[b] < 0 and (mu[b] * nu[a]) & 1:
                            sign = -sign
            result = (sign, tuple(x + y for x, y in zip(mu, nu)))
        cache[key] = result
        return result

    def monomials(self, order: int, degree: Degree | None = None) -> list[Monomial]:
        """All normalized monomials with |mu| == order, optionally of one degree."""
        q = self.q
        nil = self._cache["nil"]
        out: list[Monomial] = []

        def rec(a: int, left: int, acc: list[int]):
            if a == q:
                if left == 0:
                    out.append(tuple(acc))
                return
            top = min(left, 1) if nil[a] else left
            for e in range(top, -1, -1):
                acc.append(e)
                rec(a + 1, left - e, acc)
                acc.pop()

        rec(0, order, [])
        if degree is not None:
            out = [m for m in out if self.monomial_degree(m) == degree]
        return out

    def base_monomials(self, bound: int) -> list[tuple[int, ...]]:
        """Base exponent vectors of total degree <= bound, graded-lex order."""
        out: list[tuple[int, ...]] = []
        for total in range(bound + 1):
            out.extend(_compositions(self.p, total))
        return out


def _compositions(parts: int, total: int) -> list[tuple[int, ...]]:
    """Exponent vectors of length ``parts`` summing to ``total``, descending lex."""
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for first in range(total, -1, -1):
        for rest in _compositions(parts - 1, total - first):
            out.append((first,) + rest)
    return out


def normalize_word(table: VariableTable, factors: Sequence[str | int]) -> tuple[int, Monomial | None]:
    """Sort a word of generators into declaration order by adjacent swaps.

    Each swap multiplies the sign by the commutation sign of the two swapped
    generators. Returns sign 0 when a nilpotent generator occurs twice.
    """
    word = []
    for f in factors:
        if isinstance(f, str):
            kind, idx = table.lookup(f)
            if kind != "formal":
                raise UnknownVariable(f"{f!r} is not a formal variable")
            word.append(idx)
        else:
            if not 0 <= f < table.q:
                raise UnknownVariable(f"no formal variable with index {f}")
            word.append(f)
    sign = 1
    n = len(word)
    for i in range(n):
        for j in range(n - 1 - i):
            if word[j] > word[j + 1]:
                sign *= table.sign(word[j], word[j + 1])
                word[j], word[j + 1] = word[j + 1], word[j]
    mu = [0] * table.q
    for a in word:
        mu[a] += 1
    if any(table.is_nilpotent(a) and mu[a] > 1 for a in range(table.q)):
        return 0, None
    return sign, tuple(mu)


def monomial_order_key(mu: Monomial):
    """Graded lexicographic key: lower |mu| first, then earlier variables first."""
    return (sum(mu), tuple(-e for e in mu))


class GradedSeries:
    """A section sum_mu P_mu(x) xi^mu, truncated at ``cap`` (None = exact)."""

    __slots__ = ("table", "_terms", "cap")

    def __init__(
        self,
        table: VariableTable,
        terms: Mapping[Monomial, BasePolynomial] | None = None,
        cap: int | None = None,
    ):
        if cap is not None and cap < 0:
            raise ValueError("cap must be nonnegative")
        self.table = table
        self.cap = cap
        clean: dict[Monomial, BasePolynomial] = {}
        for mu, poly in (terms or {}).items():
            if len(mu) != table.q:
                raise ValueError(f"monomial {mu} has wrong length for {table.q} generators")
            if any(table.is_nilpotent(a) and e > 1 for a, e in enumerate(mu)):
                continue
            if cap is not None and sum(mu) > cap:
                continue
            if not isinstance(poly, BasePolynomial):
                poly = BasePolynomial.constant(table.p, poly)
            if poly:
                clean[tuple(mu)] = poly
        self._terms = clean

    @classmethod
    def _raw(cls, table, terms, cap) -> GradedSeries:
        s = cls.__new__(cls)
        s.table = table
        s._terms = terms
        s.cap = cap
        return s

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, table: VariableTable, cap: int | None = None) -> GradedSeries:
        return cls._raw(table, {}, cap)

    @classmethod
    def constant(cls, table: VariableTable, c, cap: int | None = None) -> GradedSeries:
        return cls.from_poly(table, BasePolynomial.constant(table.p, c), cap)

    @classmethod
    def from_poly(cls, table: VariableTable, poly: BasePolynomial, cap: int | None = None) -> GradedSeries:
        return cls._raw(table, {table._cache["zero_mono"]: poly} if poly else {}, cap)

    @classmethod
    def variable(cls, table: VariableTable, name: str, cap: int | None = None) -> GradedSeries:
        kind, i = table.lookup(name)
        if kind == "base":
            return cls.from_poly(table, BasePolynomial.variable(table.p, i), cap)
        mu = tuple(1 if a == i else 0 for a in range(table.q))
        return cls(table, {mu: BasePolynomial.constant(table.p, 1)}, cap)

    @classmethod
    def monomial(
        cls, table: VariableTable, mu: Monomial, poly: BasePolynomial | None = None, cap: int | None = None
    ) -> GradedSeries:
        if poly is None:
            poly = BasePolynomial.constant(table.p, 1)
        return cls(table, {tuple(mu): poly}, cap)

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, BasePolynomial]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def sorted_items(self) -> list[tuple[Monomial, BasePolynomial]]:
        return sorted(self._terms.items(), key=lambda kv: monomial_order_key(kv[0]))

    def coefficient(self, mu: Monomial) -> BasePolynomial:
        return self._terms.get(tuple(mu), BasePolynomial.constant(self.table.p, 0))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> Degree | None:
        """Degree of a homogeneous nonzero series, else None."""
        degs = {self.table.monomial_degree(mu) for mu in self._terms}
        return degs.pop() if len(degs) == 1 else None

    def is_homogeneous(self, sigma: Degree) -> bool:
        return all(self.table.monomial_degree(mu) == sigma for mu in self._terms)

    def max_order(self) -> int:
        return max((sum(mu) for mu in self._terms), default=-1)

    # -- algebra ----------------------------------------------------------

    def _check(self, other: GradedSeries) -> None:
        if other.table != self.table:
            raise TableMismatch("series over different variable tables")

    def _coerce(self, other) -> GradedSeries:
        if isinstance(other, GradedSeries):
            self._check(other)
            return other
        if isinstance(other, BasePolynomial):
            return GradedSeries.from_poly(self.table, other)
        return GradedSeries.constant(self.table, other)

    def __add__(self, other) -> GradedSeries:
        other = self._coerce(other)
        cap = _cap_min(self.cap, other.cap)
        out = {mu: p for mu, p in self._terms.items() if cap is None or sum(mu) <= cap}
        for mu, p in other._terms.items():
            if cap is not None and sum(mu) > cap:
                continue
            s = out[mu] + p if mu in out else p
            if s:
                out[mu] = s
            else:
                out.pop(mu, None)
        return GradedSeries._raw(self.table, out, cap)

    __radd__ = __add__

    def __neg__(self) -> GradedSeries:
        return GradedSeries._raw(self.table, {mu: -p for mu, p in self._terms.items()}, self.cap)

    def __sub__(self, other) -> GradedSeries:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> GradedSeries:
        return self._coerce(other) - self

    def scale(self, c) -> GradedSeries:
        if isinstance(c, BasePolynomial):
            return self * GradedSeries.from_poly(self.table, c)
        c = Fraction(c)
        if not c:
            return GradedSeries.zero(self.table, self.cap)
        return GradedSeries._raw(self.table, {mu: p.scale(c) for mu, p in self._terms.items()}, self.cap)

    def __mul__(self, other) -> GradedSeries:
        if not isinstance(other, GradedSeries):
            if isinstance(other, BasePolynomial):
                other = GradedSeries.from_poly(self.table, other)
            else:
                return self.scale(other)
        self._check(other)
        cap = _cap_min(self.cap, other.cap)
        table = self.table
        out: dict[Monomial, BasePolynomial] = {}
        for mu, p in self._terms.items():
            om = sum(mu)
            for nu, r in other._terms.items():
                if cap is not None and om + sum(nu) > cap:
                    continue
                sign, rho = table.monomial_mul(mu, nu)
                if not sign:
                    continue
                prod = p * r
                if sign < 0:
                    prod = -prod
                s = out[rho] + prod if rho in out else prod
                if s:
                    out[rho] = s
                else:
                    out.pop(rho, None)
        return GradedSeries._raw(table, out, cap)

    def __rmul__(self, other) -> GradedSeries:
        if isinstance(other, BasePolynomial):
            return GradedSeries.from_poly(self.table, other) * self
        return self.scale(other)

    def __pow__(self, k: int) -> GradedSeries:
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = GradedSeries.constant(self.table, 1, self.cap)
        for _ in range(k):
            result = result * self
        return result

    def epsilon(self) -> BasePolynomial:
        return self._terms.get(self.table._cache["zero_mono"], BasePolynomial.constant(self.table.p, 0))

    def j_order(self):
        """Smallest |mu| among stored terms; J_INFINITY for the zero series."""
        return min((sum(mu) for mu in self._terms), default=J_INFINITY)

    def truncate(self, k: int) -> GradedSeries:
        cap = k if self.cap is None else min(self.cap, k)
        return GradedSeries._raw(
            self.table, {mu: p for mu, p in self._terms.items() if sum(mu) <= k}, cap
        )

    def with_cap(self, cap: int | None) -> GradedSeries:
        """Same terms (dropping any above ``cap``) with the cap replaced."""
        return GradedSeries._raw(
            self.table,
            {mu: p for mu, p in self._terms.items() if cap is None or sum(mu) <= cap},
            cap,
        )

    def homogeneous_part(self, sigma: Degree) -> GradedSeries:
        deg = self.table.monomial_degree
        return GradedSeries._raw(
            self.table, {mu: p for mu, p in self._terms.items() if deg(mu) == sigma}, self.cap
        )

    def order_part(self, r: int) -> GradedSeries:
        """Terms with exactly r formal factors."""
        return GradedSeries._raw(
            self.table, {mu: p for mu, p in self._terms.items() if sum(mu) == r}, self.cap
        )

    def map_coefficients(self, fn) -> GradedSeries:
        return GradedSeries(self.table, {mu: fn(p) for mu, p in self._terms.items()}, self.cap)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return self.table == other.table and self.cap == other.cap and self._terms == other._terms

    def same_terms(self, other: GradedSeries) -> bool:
        """Equality of stored terms, ignoring caps."""
        return self.table == other.table and self._terms == other._terms

    def __hash__(self):
        return hash((self.cap, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        from .syntax import format_series

        cap = "exact" if self.cap is None else self.cap
        return f"GradedSeries({format_series(self)!r}, cap={cap})"

    def __str__(self) -> str:
        from .syntax import format_series

        return format_series(self)


def add(s: GradedSeries, t: GradedSeries) -> GradedSeries:
    return s + t


def mul(s: GradedSeries, t: GradedSeries) -> GradedSeries:
    return s * t


def epsilon(s: GradedSeries) -> BasePolynomial:
    return s.epsilon()


def j_order(s: GradedSeries):
    return s.j_order()


def truncate(s: GradedSeries, k: int) -> GradedSeries:
    return s.truncate(k)


def homogeneous_part(s: GradedSeries, sigma: Degree) -> GradedSeries:
    return s.homogeneous_part(sigma)


def random_poly(nvars: int, rng: random.Random, max_degree: int = 2, max_terms: int = 3) -> BasePolynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exp = [0] * nvars
        for _ in range(rng.randint(0, max_degree)):
            if nvars:
                exp[rng.randrange(nvars)] += 1
        terms[tuple(exp)] = Fraction(rng.randint(-5, 5), rng.choice((1, 1, 1, 2, 3)))
    return BasePolynomial(nvars, terms)


def random_series(
    table: VariableTable,
    rng: random.Random,
    max_terms: int = 4,
    max_order: int = 3,
    min_order: int = 0,
    degree: Degree | None = None,
    max_base_degree: int = 2,
    cap: int | None = None,
) -> GradedSeries:
    """Random section for property checks, optionally homogeneous of ``degree``."""
    pool: list[Monomial] = []
    for r in range(min_order, max_order + 1):
        pool.extend(table.monomials(r, degree))
    terms: dict[Monomial, BasePolynomial] = {}
    if pool:
        for _ in range(rng.randint(0, max_terms)):
            mu = rng.choice(pool)
            terms[mu] = random_poly(table.p, rng, max_base_degree)
    return GradedSeries(table, terms, cap)
