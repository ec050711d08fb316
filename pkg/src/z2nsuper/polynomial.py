"""Sparse multivariate polynomials over Q in the base (degree-zero) variables."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]


def _grlex_key(e: Exponent):
    return (sum(e), tuple(-x for x in e))


class BasePolynomial:
    """Exact polynomial in ``nvars`` variables, stored as {exponent: Fraction}.

    Instances are treated as immutable; zero coefficients are never stored.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | Iterable = ()):
        self.nvars = nvars
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Exponent, Fraction] = {}
        for exp, c in items:
            exp = tuple(exp)
            if len(exp) != nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for {nvars} variables")
            c = Fraction(c)
            if c:
                c = clean.get(exp, 0) + c
                if c:
                    clean[exp] = c
                else:
                    clean.pop(exp, None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, Fraction]) -> BasePolynomial:
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def constant(cls, nvars: int, c) -> BasePolynomial:
        c = Fraction(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def variable(cls, nvars: int, i: int) -> BasePolynomial:
        exp = tuple(1 if j == i else 0 for j in range(nvars))
        return cls._raw(nvars, {exp: Fraction(1)})

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def sorted_items(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self) -> int:
        """Largest total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def _check(self, other: BasePolynomial) -> None:
        if other.nvars != self.nvars:
            raise ValueError("polynomials over different variable counts")

    def _coerce(self, other) -> BasePolynomial:
        if isinstance(other, BasePolynomial):
            self._check(other)
            return other
        return BasePolynomial.constant(self.nvars, other)

    def __add__(self, other) -> BasePolynomial:
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return BasePolynomial._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> BasePolynomial:
        return BasePolynomial._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> BasePolynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> BasePolynomial:
        return self._coerce(other) - self

    def scale(self, c) -> BasePolynomial:
        c = Fraction(c)
        if not c:
            return BasePolynomial._raw(self.nvars, {})
        return BasePolynomial._raw(self.nvars, {e: v * c for e, v in self._terms.items()})

    def __mul__(self, other) -> BasePolynomial:
        if not isinstance(other, BasePolynomial):
            return self.scale(other)
        self._check(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return BasePolynomial._raw(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> BasePolynomial:
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = BasePolynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def derivative(self, i: int) -> BasePolynomial:
        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        return BasePolynomial._raw(self.nvars, out)

    def compose(self, images: Sequence[BasePolynomial]) -> BasePolynomial:
        """Substitute ``images[i]`` for the i-th variable."""
        if len(images) != self.nvars:
            raise ValueError(f"expected {self.nvars} images, got {len(images)}")
        nv = images[0].nvars if images else self.nvars
        out = BasePolynomial.constant(nv, 0)
        for e, c in self._terms.items():
            term = BasePolynomial.constant(nv, c)
            for img, k in zip(images, e):
                if k:
                    term = term * img**k
            out = out + term
        return out

    def truncate_degree(self, bound: int) -> BasePolynomial:
        return BasePolynomial._raw(
            self.nvars, {e: c for e, c in self._terms.items() if sum(e) <= bound}
        )

    def __eq__(self, other) -> bool:
        if isinstance(other, BasePolynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == BasePolynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"BasePolynomial({self.nvars}, {self.sorted_items()!r})"
