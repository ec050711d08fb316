import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURES
from gen import random_bundle, random_morphism, random_table
from z2nsuper import (
    Atlas,
    DegreeMismatch,
    GradingViolation,
    MalformedAtlas,
    ParseError,
    build_splitting_iso,
    format_document,
    parse_document,
)
from z2nsuper.fileformat import format_morphism, parse_atlas, parse_iso, parse_series
from z2nsuper.series import random_series

seeds = st.integers(0, 10**9)

HEAD = "atlas a n=1\nvars x : (0)\nvars v : (1)\nchart U V\noverlap U V\n"


def error_of(text, kind=ParseError):
    with pytest.raises(kind) as info:
        parse_document(text)
    return info.value


class TestErrors:
    def test_bad_token_location(self):
        e = error_of(HEAD + "transition U -> V { x' = x + * v }\n")
        assert (e.line, e.column, e.token) == (6, 30, "*")

    def test_unknown_variable(self):
        e = error_of(HEAD + "transition U -> V { x' = x + w }\n")
        assert (e.line, e.token) == (6, "w")
        assert "unknown variable" in str(e)

    def test_unbalanced_bracket(self):
        e = error_of("series s n=2\nvars x : (0,0)\nvars t : (1,1)\nx + t)\n")
        assert (e.line, e.column, e.token) == (4, 6, ")")

    def test_unknown_header(self):
        e = error_of("blah a n=1\n")
        assert (e.line, e.column, e.token) == (1, 1, "blah")

    def test_empty(self):
        error_of("# nothing here\n")

    def test_is_a_syntax_error(self):
        assert issubclass(ParseError, SyntaxError)

    def test_grading_violation(self):
        e = error_of(HEAD + "transition U -> V { x' = x + v }\n", GradingViolation)
        assert isinstance(e, DegreeMismatch)
        assert "line 6" in str(e)

    def test_bad_degree(self):
        e = error_of("atlas a n=2\nvars x : (0,0)\nvars v : (1,2)\n")
        assert e.line == 3

    def test_arity_mismatch_degree(self):
        e = error_of("atlas a n=2\nvars x : (0,0)\nvars v : (1)\n")
        assert (e.line, e.token) == (3, "v")

    def test_malformed_nerve(self):
        error_of(HEAD + "transition U -> W { }\n", (MalformedAtlas, ParseError))

    def test_iso_needs_order(self):
        text = "iso i n=1\nvars x : (0)\nvars v : (1)\nmorphism U { }\n"
        error_of(text, (ParseError, ValueError))


class TestDefaults:
    def test_unmentioned_coordinates_are_identity(self):
        atlas = parse_atlas(HEAD + "transition U -> V { v' = 2 v }\n")
        assert str(atlas.transitions[("U", "V")].image("x")) == "x"

    def test_comments_and_semicolons(self):
        a = parse_atlas(HEAD + "transition U -> V { v' = 2 v; x' = x # shift\n}\n")
        b = parse_atlas(HEAD + "transition U -> V {\n  v' = 2 v\n}\n")
        assert a == b

    def test_headerless_series(self):
        s = parse_series("vars x : (0,0)\nvars t : (1,1)\nx t^2 + t^2 x\n")
        assert str(s) == "2*x*t^2"


@pytest.mark.parametrize("path", sorted(p.name for p in FIXTURES.iterdir()))
def test_fixtures_round_trip(load_fixture, path):
    value = load_fixture(path)
    text = format_document(value)
    again = parse_document(text)
    assert again == value
    assert format_document(again) == text


class TestRoundTrip:
    @given(seeds)
    def test_series(self, seed):
        rng = random.Random(seed)
        s = random_series(random_table(rng), rng, max_order=4)
        assert parse_document(format_document(s)) == s

    @given(seeds)
    def test_atlas(self, seed):
        rng = random.Random(seed)
        t = random_table(rng, max_formal=4)
        atlas = Atlas("r", t, ("U", "V"), (("U", "V"),), (), {("U", "V"): random_morphism(t, rng, affine=True)})
        assert parse_document(format_document(atlas)) == atlas

    @given(seeds)
    def test_morphism(self, seed):
        rng = random.Random(seed)
        t = random_table(rng, max_formal=4)
        m = random_morphism(t, rng)
        assert parse_document(format_morphism(m, "m")) == m

    @given(seeds)
    def test_bundle(self, seed):
        rng = random.Random(seed)
        b = random_bundle(rng, random_table(rng, max_formal=4))
        assert parse_document(format_document(b)) == b


def test_iso_round_trip(load_fixture):
    iso = build_splitting_iso(load_fixture("composite3.atl"), 5, 3)
    assert parse_iso(format_document(iso)) == iso
