"""Text documents for atlases, bundles, splitting isos, morphisms and series.

Every document starts with a header line, declares variables, and then lists
statements; ``#`` starts a comment. Example::

    atlas twist n=2 convention=zsp
    vars x : (0,0)
    vars xi : (0,1), eta : (1,0), theta : (1,1)
    chart U
    chart V
    overlap U V
    transition U -> V {
      x' = x + theta^2     # primed names are the target chart's coordinates
    }

Inside ``{ ... }`` items are separated by ``;`` or newlines; coordinates that
are not mentioned map to themselves. Bundles use ``bundle`` headers and
``block (0,1) [ a, b ; c, d ]`` items (row-major, rows split by ``;``).
Splitting isos use ``iso <name> n=.. k=..`` headers and ``morphism <chart>``
blocks; single morphisms use ``morphism <name>`` with one ``map { ... }``
block; series documents use ``series`` followed by one expression line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .atlas import Atlas
from .errors import DegreeMismatch, GradingViolation, ParseError, Z2nError
from .grading import Convention, Degree
from .morphism import Morphism, make_morphism
from .polynomial import BasePolynomial
from .series import GradedSeries, VariableTable
from .split_model import BundleTransition, GradedBundle
from .splitting import SplittingIso
from .syntax import _error, format_poly, format_series, line_col, parse_expression

HEADERS = ("atlas", "bundle", "iso", "morphism", "series")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {v: k for k, v in _OPEN.items()}


@dataclass(frozen=True)
class Statement:
    keyword: str
    text: str  # full statement text
    pos: int  # absolute offset of text


def _mask_comments(text: str) -> str:
    return re.sub(r"#[^\n]*", lambda m: " " * len(m.group()), text)


def _statements(source: str) -> list[Statement]:
    text = _mask_comments(source)
    out: list[Statement] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        start = i
        stack: list[tuple[str, int]] = []
        while i < n:
            ch = text[i]
            if ch in _OPEN:
                stack.append((ch, i))
            elif ch in _CLOSE:
                if not stack or stack[-1][0] != _CLOSE[ch]:
                    raise _error(source, i, "unbalanced bracket", ch)
                stack.pop()
            elif ch == "\n" and not stack:
                break
            i += 1
        if stack:
            raise _error(source, stack[-1][1], "bracket is never closed", stack[-1][0])
        stmt = text[start:i].rstrip()
        m = _WORD.match(stmt)
        out.append(Statement(m.group() if m else "", stmt, start))
    return out


def _split_items(source: str, text: str, pos: int, seps: str = ";\n") -> list[tuple[str, int]]:
    """Split ``text`` (located at ``pos``) at depth-0 separators; drop blanks."""
    items, depth, start = [], 0, 0
    for i, ch in enumerate(text + seps[0]):
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch in seps and depth == 0:
            piece = text[start:i]
            stripped = piece.strip()
            if stripped:
                items.append((stripped, pos + start + piece.index(stripped[0])))
            start = i + 1
    return items


def _parse_degree(source: str, text: str, pos: int) -> Degree:
    try:
        return Degree.parse(text)
    except ValueError as exc:
        raise _error(source, pos, f"bad degree: {exc}", text) from None


class _Document:
    """Shared state while reading one document."""

    def __init__(self, source: str):
        self.source = source
        self.stmts = _statements(source)
        if not self.stmts:
            raise _error(source, 0, "empty document")
        self.options: dict[str, str] = {}
        self.option_pos: dict[str, int] = {}
        self.kind = "series"
        self.name = ""
        self.vars: list[tuple[str, Degree, int]] = []
        self.table: VariableTable | None = None
        self.body = self.stmts
        head = self.stmts[0]
        if head.keyword in HEADERS:
            self._read_header(head)
            self.body = self.stmts[1:]
        elif head.keyword != "vars":
            raise self.fail(
                head.pos, f"unknown document header, expected one of {', '.join(HEADERS)} or vars", head.keyword
            )

    def fail(self, pos: int, message: str, token: str = "") -> ParseError:
        return _error(self.source, pos, message, token)

    def _read_header(self, st: Statement) -> None:
        self.kind = st.keyword
        words = list(re.finditer(r"\S+", st.text))
        rest = words[1:]
        if self.kind != "series":
            if not rest or "=" in rest[0].group():
                raise self.fail(st.pos + len(st.keyword), f"{self.kind} header needs a name")
            self.name = rest[0].group()
            rest = rest[1:]
        for w in rest:
            key, eq, value = w.group().partition("=")
            if not eq or key not in ("n", "convention", "k", "cap"):
                raise self.fail(st.pos + w.start(), "expected n=, convention=, k= or cap=", w.group())
            self.options[key] = value
            self.option_pos[key] = st.pos + w.start()

    def int_option(self, key: str) -> int | None:
        if key not in self.options:
            return None
        value = self.options[key]
        if not value.isdigit():
            raise self.fail(self.option_pos[key], f"{key} must be a nonnegative integer", value)
        return int(value)

    def convention(self) -> Convention:
        value = self.options.get("convention", "zsp")
        try:
            return Convention.parse(value)
        except ValueError:
            raise self.fail(self.option_pos["convention"], "unknown convention", value) from None

    def read_vars(self, st: Statement) -> None:
        body = st.text[len("vars"):]
        offset = st.pos + len("vars")
        covered = [False] * len(body)
        for m in re.finditer(r"([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(\([^)]*\))", body):
            deg = _parse_degree(self.source, m.group(2), offset + m.start(2))
            self.vars.append((m.group(1), deg, offset + m.start(1)))
            covered[m.start():m.end()] = [True] * (m.end() - m.start())
        for i, ch in enumerate(body):
            if not covered[i] and not ch.isspace() and ch != ",":
                raise self.fail(offset + i, "expected 'name : (bits)'", ch)
        self.table = None

    def get_table(self, pos: int) -> VariableTable:
        if self.table is None:
            if not self.vars:
                raise self.fail(pos, "no variables declared before use")
            n = self.int_option("n")
            if n is None:
                n = self.vars[0][1].arity
            base, formal = [], []
            seen = set()
            for name, deg, vpos in self.vars:
                if deg.arity != n:
                    raise self.fail(vpos, f"degree of {name} has arity {deg.arity}, expected n={n}", name)
                if name in seen:
                    raise self.fail(vpos, "variable declared twice", name)
                seen.add(name)
                (base if deg.is_zero() else formal).append((name, deg))
            self.table = VariableTable.build(n, [b for b, _ in base], formal, self.convention())
        return self.table

    def expr(self, text: str, pos: int, cap: int | None = None) -> GradedSeries:
        return parse_expression(text, self.get_table(pos), cap, pos, self.source)

    def words(self, st: Statement, count: int) -> list[str]:
        parts = st.text.split()
        if len(parts) != count + 1:
            raise self.fail(st.pos, f"'{st.keyword}' takes {count} chart id(s)", st.keyword)
        return parts[1:]

    def block(self, st: Statement, head_re: str) -> tuple[re.Match, str, int]:
        m = re.match(head_re + r"\s*\{", st.text)
        if not m or not st.text.endswith("}"):
            raise self.fail(st.pos, f"malformed '{st.keyword}' block", st.keyword)
        inner = st.text[m.end():-1]
        return m, inner, st.pos + m.end()

    def assignments(self, inner: str, pos: int, cap: int | None, allow_blocks: bool = False):
        """(name, series, position) for ``name' = expr`` items, plus raw block items."""
        table = self.get_table(pos)
        names = set(table.base_vars) | set(table.formal_vars)
        images, blocks = {}, []
        for item, ipos in _split_items(self.source, inner, pos):
            if allow_blocks and item.startswith("block"):
                blocks.append((item, ipos))
                continue
            m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)'\s*=", item)
            if not m:
                raise self.fail(ipos, "expected \"name' = expression\"", item.split()[0])
            name = m.group(1)
            if name not in names:
                raise self.fail(ipos, "unknown target coordinate", name + "'")
            if name in images:
                raise self.fail(ipos, "coordinate assigned twice", name + "'")
            rest = item[m.end():]
            lead = len(rest) - len(rest.lstrip())
            images[name] = (self.expr(rest.strip(), ipos + m.end() + lead, cap), ipos)
        return images, blocks

    def morphism(self, images: dict, cap: int | None, label: str) -> Morphism:
        table = self.table
        full = {}
        for name in table.base_vars + table.formal_vars:
            if name not in images:
                full[name] = GradedSeries.variable(table, name, cap)
                continue
            img, ipos = images[name]
            kind, i = table.lookup(name)
            want = table.zero_degree if kind == "base" else table.formal_degrees[i]
            if not img.is_homogeneous(want):
                line, col = line_col(self.source, ipos)
                raise DegreeMismatch(
                    f"{label}, line {line}, column {col}: image of {name} is not homogeneous of degree {want}"
                )
            full[name] = img
        return make_morphism(table, table, full, cap)


def _nerve(doc: _Document, st: Statement, charts, overlaps, triples) -> bool:
    if st.keyword == "chart":
        parts = st.text.split()[1:]
        if not parts:
            raise doc.fail(st.pos, "'chart' needs an id", "chart")
        charts.extend(parts)
    elif st.keyword == "overlap":
        overlaps.append(tuple(doc.words(st, 2)))
    elif st.keyword == "triple":
        triples.append(tuple(doc.words(st, 3)))
    else:
        return False
    return True


def _expect_kind(doc: _Document, kind: str) -> None:
    if doc.kind != kind:
        raise doc.fail(doc.stmts[0].pos, f"expected a '{kind}' document, found '{doc.kind}'", doc.kind)


def _parse_atlas(doc: _Document) -> Atlas:
    charts, overlaps, triples, transitions = [], [], [], {}
    for st in doc.body:
        if st.keyword == "vars":
            doc.read_vars(st)
        elif _nerve(doc, st, charts, overlaps, triples):
            pass
        elif st.keyword == "transition":
            m, inner, pos = doc.block(st, r"transition\s+(\S+)\s*->\s*(\S+)")
            key = (m.group(1), m.group(2))
            if key in transitions:
                raise doc.fail(st.pos, "transition declared twice", f"{key[0]} -> {key[1]}")
            images, _ = doc.assignments(inner, pos, None)
            transitions[key] = doc.morphism(images, None, f"transition {key[0]} -> {key[1]}")
        else:
            raise doc.fail(st.pos, "unexpected statement in atlas", st.keyword or st.text[:1])
    table = doc.get_table(doc.stmts[0].pos)
    return Atlas(doc.name, table, tuple(charts), tuple(overlaps), tuple(triples), transitions)


def _base_only(doc: _Document, s: GradedSeries, pos: int, what: str) -> BasePolynomial:
    if any(any(mu) for mu in s.terms):
        line, col = line_col(doc.source, pos)
        raise GradingViolation(f"line {line}, column {col}: {what} must not involve formal variables")
    return s.epsilon()


def _parse_bundle(doc: _Document) -> GradedBundle:
    charts, overlaps, triples, transitions = [], [], [], {}
    for st in doc.body:
        if st.keyword == "vars":
            doc.read_vars(st)
        elif _nerve(doc, st, charts, overlaps, triples):
            pass
        elif st.keyword == "transition":
            m, inner, pos = doc.block(st, r"transition\s+(\S+)\s*->\s*(\S+)")
            key = (m.group(1), m.group(2))
            table = doc.get_table(pos)
            images, raw_blocks = doc.assignments(inner, pos, None, allow_blocks=True)
            base = []
            for j, name in enumerate(table.base_vars):
                if name in images:
                    base.append(_base_only(doc, images[name][0], images[name][1], f"{name}'"))
                else:
                    base.append(BasePolynomial.variable(table.p, j))
            for name, (_, ipos) in images.items():
                if name not in table.base_vars:
                    raise doc.fail(ipos, "bundle transitions assign base coordinates only; use blocks", name + "'")
            sectors: dict[Degree, int] = table.sector_ranks()
            blocks = {}
            for item, ipos in raw_blocks:
                bm = re.match(r"block\s*(\([^)]*\))\s*\[(.*)\]\s*$", item, re.S)
                if not bm:
                    raise doc.fail(ipos, "expected 'block (bits) [ rows ]'", "block")
                sigma = _parse_degree(doc.source, bm.group(1), ipos + bm.start(1))
                if sigma in blocks:
                    raise doc.fail(ipos, "block given twice", bm.group(1))
                rows = []
                for row, rpos in _split_items(doc.source, bm.group(2), ipos + bm.start(2), ";"):
                    entries = _split_items(doc.source, row, rpos, ",")
                    rows.append(
                        tuple(_base_only(doc, doc.expr(e, epos), epos, "block entry") for e, epos in entries)
                    )
                blocks[sigma] = tuple(rows)
            for sigma, size in sectors.items():
                if sigma not in blocks:
                    blocks[sigma] = tuple(
                        tuple(BasePolynomial.constant(table.p, int(i == j)) for j in range(size))
                        for i in range(size)
                    )
            transitions[key] = BundleTransition(tuple(base), blocks)
        else:
            raise doc.fail(st.pos, "unexpected statement in bundle", st.keyword or st.text[:1])
    table = doc.get_table(doc.stmts[0].pos)
    return GradedBundle(doc.name, table, tuple(charts), tuple(overlaps), tuple(triples), transitions)


def _parse_iso(doc: _Document) -> SplittingIso:
    k = doc.int_option("k")
    if k is None:
        raise doc.fail(doc.stmts[0].pos, "iso header needs k=<order>", "iso")
    maps = {}
    for st in doc.body:
        if st.keyword == "vars":
            doc.read_vars(st)
        elif st.keyword == "morphism":
            m, inner, pos = doc.block(st, r"morphism\s+(\S+)")
            chart = m.group(1)
            if chart in maps:
                raise doc.fail(st.pos, "chart map given twice", chart)
            images, _ = doc.assignments(inner, pos, k)
            maps[chart] = doc.morphism(images, k, f"morphism {chart}")
        else:
            raise doc.fail(st.pos, "unexpected statement in iso", st.keyword or st.text[:1])
    return SplittingIso(doc.name, doc.get_table(doc.stmts[0].pos), k, maps)


def _parse_morphism(doc: _Document) -> Morphism:
    cap = doc.int_option("cap")
    result = None
    for st in doc.body:
        if st.keyword == "vars":
            doc.read_vars(st)
        elif st.keyword == "map":
            if result is not None:
                raise doc.fail(st.pos, "only one map block allowed", "map")
            _, inner, pos = doc.block(st, r"map")
            images, _ = doc.assignments(inner, pos, cap)
            result = doc.morphism(images, cap, "map")
        else:
            raise doc.fail(st.pos, "unexpected statement in morphism", st.keyword or st.text[:1])
    if result is None:
        raise doc.fail(doc.stmts[0].pos, "morphism document has no map block", "morphism")
    return result


def _parse_series(doc: _Document) -> GradedSeries:
    cap = doc.int_option("cap")
    value = None
    for st in doc.body:
        if st.keyword == "vars":
            doc.read_vars(st)
        else:
            if value is not None:
                raise doc.fail(st.pos, "series document holds one expression", st.text.split()[0])
            value = doc.expr(st.text, st.pos, cap)
    if value is None:
        raise doc.fail(doc.stmts[-1].pos, "series document has no expression")
    return value


_PARSERS = {
    "atlas": _parse_atlas,
    "bundle": _parse_bundle,
    "iso": _parse_iso,
    "morphism": _parse_morphism,
    "series": _parse_series,
}


def parse_document(text: str):
    """Atlas, GradedBundle, SplittingIso, Morphism or GradedSeries, by header."""
    doc = _Document(text)
    return _PARSERS[doc.kind](doc)


def _typed(kind: str):
    def parse(text: str):
        doc = _Document(text)
        _expect_kind(doc, kind)
        return _PARSERS[kind](doc)

    parse.__name__ = f"parse_{kind}"
    parse.__doc__ = f"Parse a '{kind}' document."
    return parse


parse_atlas = _typed("atlas")
parse_bundle = _typed("bundle")
parse_iso = _typed("iso")
parse_morphism = _typed("morphism")
parse_series = _typed("series")


def load(path) -> object:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())


# -- printing ---------------------------------------------------------------------


def _vars_lines(table: VariableTable) -> list[str]:
    zero = str(table.zero_degree)
    lines = [f"vars {n} : {zero}" for n in table.base_vars]
    lines += [f"vars {n} : {d}" for n, d in zip(table.formal_vars, table.formal_degrees)]
    return lines


def _nerve_lines(charts, overlaps, triples) -> list[str]:
    lines = [f"chart {c}" for c in charts]
    lines += [f"overlap {a} {b}" for a, b in overlaps]
    lines += [f"triple {a} {b} {c}" for a, b, c in triples]
    return lines


def _map_lines(m: Morphism) -> list[str]:
    return [f"  {name}' = {img};" for name, img in m.image_map().items()]


def format_atlas(atlas: Atlas) -> str:
    t = atlas.table
    lines = [f"atlas {atlas.name} n={t.arity} convention={t.convention.value}"]
    lines += _vars_lines(t) + _nerve_lines(atlas.charts, atlas.overlaps, atlas.triples)
    for (a, b), m in atlas.transitions.items():
        lines += [f"transition {a} -> {b} {{"] + _map_lines(m) + ["}"]
    return "\n".join(lines) + "\n"


def format_bundle(bundle: GradedBundle) -> str:
    t = bundle.table
    lines = [f"bundle {bundle.name} n={t.arity} convention={t.convention.value}"]
    lines += _vars_lines(t) + _nerve_lines(bundle.charts, bundle.overlaps, bundle.triples)
    for (a, b), tr in bundle.transitions.items():
        lines.append(f"transition {a} -> {b} {{")
        for name, f in zip(t.base_vars, tr.base_map):
            lines.append(f"  {name}' = {format_poly(f, t.base_vars)};")
        for sigma in sorted(tr.blocks):
            rows = " ; ".join(", ".join(format_poly(e, t.base_vars) for e in row) for row in tr.blocks[sigma])
            lines.append(f"  block {sigma} [ {rows} ];")
        lines.append("}")
    return "\n".join(lines) + "\n"


def format_iso(iso: SplittingIso) -> str:
    t = iso.table
    lines = [f"iso {iso.name} n={t.arity} k={iso.order} convention={t.convention.value}"]
    lines += _vars_lines(t)
    for chart, m in iso.maps.items():
        lines += [f"morphism {chart} {{"] + _map_lines(m) + ["}"]
    return "\n".join(lines) + "\n"


def format_morphism(m: Morphism, name: str = "m") -> str:
    t = m.source
    cap = "" if m.cap is None else f" cap={m.cap}"
    lines = [f"morphism {name} n={t.arity} convention={t.convention.value}{cap}"]
    lines += _vars_lines(t) + ["map {"] + _map_lines(m) + ["}"]
    return "\n".join(lines) + "\n"


def format_series_document(s: GradedSeries) -> str:
    t = s.table
    cap = "" if s.cap is None else f" cap={s.cap}"
    lines = [f"series n={t.arity} convention={t.convention.value}{cap}"]
    lines += _vars_lines(t) + [format_series(s)]
    return "\n".join(lines) + "\n"


def format_document(value, name: str = "m") -> str:
    if isinstance(value, Atlas):
        return format_atlas(value)
    if isinstance(value, GradedBundle):
        return format_bundle(value)
    if isinstance(value, SplittingIso):
        return format_iso(value)
    if isinstance(value, Morphism):
        return format_morphism(value, name)
    if isinstance(value, GradedSeries):
        return format_series_document(value)
    raise TypeError(f"cannot format {type(value).__name__}")


__all__ = [
    "parse_document",
    "parse_atlas",
    "parse_bundle",
    "parse_iso",
    "parse_morphism",
    "parse_series",
    "load",
    "format_document",
    "format_atlas",
    "format_bundle",
    "format_iso",
    "format_morphism",
    "format_series_document",
    "Z2nError",
]
