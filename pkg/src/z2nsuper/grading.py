"""Z_2^n degrees and the sign rules built on them."""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass

from .errors import ArityMismatch

MAX_ARITY = 16

_DEGREE_RE = re.compile(r"^\(\s*([01](?:\s*,\s*[01])*)\s*\)$")


@dataclass(frozen=True, slots=True, order=True)
class Degree:
    """An element of Z_2^n, stored as a tuple of bits."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.bits) <= MAX_ARITY:
            raise ArityMismatch(f"arity must be in 1..{MAX_ARITY}, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"degree digits must be 0 or 1: {self.bits}")

    @classmethod
    def zero(cls, n: int) -> Degree:
        return cls((0,) * n)

    @classmethod
    def parse(cls, text: str) -> Degree:
        m = _DEGREE_RE.match(text.strip())
        if not m:
            raise ValueError(f"not a degree literal: {text!r}")
        return cls(tuple(int(b) for b in m.group(1).replace(" ", "").split(",")))

    @property
    def arity(self) -> int:
        return len(self.bits)

    def is_zero(self) -> bool:
        return not any(self.bits)

    def __add__(self, other: Degree) -> Degree:
        _check_arity(self, other)
        return Degree(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.bits)) + ")"


def _check_arity(a: Degree, b: Degree) -> None:
    if a.arity != b.arity:
        raise ArityMismatch(f"degrees {a} and {b} have different arity")


def scalar_product(a: Degree, b: Degree) -> int:
    _check_arity(a, b)
    return sum(x & y for x, y in zip(a.bits, b.bits)) & 1


def koszul_sign(a: Degree, b: Degree) -> int:
    """Sign picked up when swapping homogeneous elements of degrees a and b."""
    return -1 if scalar_product(a, b) else 1


def parity(a: Degree) -> int:
    return sum(a.bits) & 1


def enumerate_nonzero_degrees(n: int) -> list[Degree]:
    """All 2^n - 1 nonzero degrees in ascending lexicographic order."""
    if not 1 <= n <= MAX_ARITY:
        raise ArityMismatch(f"arity must be in 1..{MAX_ARITY}, got {n}")
    return [Degree(bits) for bits in itertools.product((0, 1), repeat=n)][1:]


class Convention(enum.Enum):
    """Commutation rule used when normalizing products of generators.

    ZSP is the Z_2^n scalar-product rule; PARITY is the classical super rule
    driven by total parity; COMM makes every generator commute (the plain
    n-vector-bundle coordinates before superization).
    """

    ZSP = "zsp"
    PARITY = "parity"
    COMM = "comm"

    def sign(self, a: Degree, b: Degree) -> int:
        if self is Convention.ZSP:
            return koszul_sign(a, b)
        if self is Convention.PARITY:
            return -1 if parity(a) and parity(b) else 1
        _check_arity(a, b)
        return 1

    def nilpotent(self, a: Degree) -> bool:
        """A generator squares to zero exactly when it anticommutes with itself."""
        return self.sign(a, a) == -1

    @classmethod
    def parse(cls, text: str) -> Convention:
        aliases = {"total-parity": "parity", "commutative": "comm"}
        return cls(aliases.get(text, text))
