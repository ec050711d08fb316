"""Expression grammar and canonical printing for graded series.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (['*'] factor)*          # '*' or juxtaposition
    factor := ('+'|'-') factor | atom ['^' INT]
    atom   := NUMBER ['/' NUMBER] | IDENT | '(' expr ')'

Factors are multiplied left to right, so the written order of formal
generators determines the commutation signs picked up during normalization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, UnknownVariable
from .polynomial import BasePolynomial
from .series import GradedSeries, VariableTable, monomial_order_key

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+(?:\s*/\s*\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)"
    r"|(?P<op>[-+*^()])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def line_col(source: str, pos: int) -> tuple[int, int]:
    line = source.count("\n", 0, pos) + 1
    col = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _error(source: str, pos: int, message: str, token: str = "") -> ParseError:
    line, col = line_col(source, pos)
    return ParseError(message, line, col, token)


def tokenize(text: str, offset: int = 0, source: str | None = None) -> list[Token]:
    source = text if source is None else source
    tokens: list[Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise _error(source, offset + i, "unexpected character", text[i])
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), offset + i))
        i = m.end()
    tokens.append(Token("end", "", offset + len(text)))
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[Token], table: VariableTable, source: str, cap: int | None):
        self.tokens = tokens
        self.i = 0
        self.table = table
        self.source = source
        self.cap = cap

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, message: str) -> ParseError:
        return _error(self.source, self.tok.pos, message, self.tok.text)

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def parse(self) -> GradedSeries:
        value = self.expr()
        if self.tok.kind != "end":
            raise self.fail("unexpected token")
        return value

    def expr(self) -> GradedSeries:
        value = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _starts_factor(self) -> bool:
        t = self.tok
        return t.kind in ("num", "ident") or (t.kind == "op" and t.text == "(")

    def term(self) -> GradedSeries:
        value = self.factor()
        while True:
            if self.tok.kind == "op" and self.tok.text == "*":
                self.take()
                value = value * self.factor()
            elif self._starts_factor():
                value = value * self.factor()
            else:
                return value

    def factor(self) -> GradedSeries:
        if self.tok.kind == "op" and self.tok.text in "+-":
            negate = self.take().text == "-"
            inner = self.factor()
            return -inner if negate else inner
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            if self.tok.kind != "num" or "/" in self.tok.text:
                raise self.fail("exponent must be a nonnegative integer")
            base = base ** int(self.take().text)
        return base

    def atom(self) -> GradedSeries:
        t = self.tok
        if t.kind == "num":
            self.take()
            num, _, den = t.text.replace(" ", "").partition("/")
            if den and int(den) == 0:
                raise _error(self.source, t.pos, "zero denominator", t.text)
            value = Fraction(int(num), int(den) if den else 1)
            return GradedSeries.constant(self.table, value, self.cap)
        if t.kind == "ident":
            self.take()
            try:
                return GradedSeries.variable(self.table, t.text, self.cap)
            except UnknownVariable:
                raise _error(self.source, t.pos, "unknown variable", t.text) from None
        if t.kind == "op" and t.text == "(":
            self.take()
            value = self.expr()
            if not (self.tok.kind == "op" and self.tok.text == ")"):
                raise self.fail("expected ')'")
            self.take()
            return value
        raise self.fail("expected a number, variable or '('")


def parse_expression(
    text: str,
    table: VariableTable,
    cap: int | None = None,
    offset: int = 0,
    source: str | None = None,
) -> GradedSeries:
    """Parse ``text`` into a series over ``table``.

    ``offset``/``source`` locate ``text`` inside a larger document so that
    errors report document line and column.
    """
    source = text if source is None else source
    tokens = tokenize(text, offset, source)
    if tokens[0].kind == "end":
        raise _error(source, offset, "empty expression")
    return _ExprParser(tokens, table, source, cap).parse()


def _format_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _power_str(name: str, e: int) -> str:
    return name if e == 1 else f"{name}^{e}"


def format_series(s: GradedSeries) -> str:
    """Canonical text: graded-lex on formal monomials, then on base monomials."""
    table = s.table
    pieces: list[tuple[int, str]] = []
    for mu, poly in s.sorted_items():
        formal = [_power_str(table.formal_vars[a], e) for a, e in enumerate(mu) if e]
        for exp, c in poly.sorted_items():
            factors = [_power_str(table.base_vars[i], e) for i, e in enumerate(exp) if e]
            factors += formal
            mag = abs(c)
            if factors:
                body = "*".join(factors)
                if mag != 1:
                    body = f"{_format_fraction(mag)}*{body}"
            else:
                body = _format_fraction(mag)
            pieces.append((-1 if c < 0 else 1, body))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] < 0 else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += (" - " if sign < 0 else " + ") + body
    return out


def format_poly(poly: BasePolynomial, names: tuple[str, ...]) -> str:
    table = VariableTable(1, tuple(names), (), ())
    return format_series(GradedSeries.from_poly(table, poly))
