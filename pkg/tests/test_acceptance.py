"""End-to-end acceptance checks, one per criterion, with wall-clock limits.

Each check prints a single ``PASS``/``FAIL`` line. Run directly with
``python tests/test_acceptance.py`` for the summary alone, or under pytest.
"""

import pathlib
import random
import sys
import time

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from conftest import fixture_path  # noqa: E402
from gen import random_morphism, random_table  # noqa: E402
from naive_oracle import as_plain, naive_mul  # noqa: E402
from z2nsuper import (  # noqa: E402
    BasePolynomial,
    Convention,
    Morphism,
    SplittingIso,
    VariableTable,
    build_phi,
    build_splitting_iso,
    check_cocycle,
    compose,
    enumerate_nonzero_degrees,
    epsilon,
    equal_mod,
    homogeneous_part,
    invert_mod_order,
    j_order,
    linearize,
    load,
    make_morphism,
    monomial_count,
    parse_expression,
    pullback,
    superize,
    tangent_lift,
    truncate,
    verify_splitting,
)
from z2nsuper.series import random_series  # noqa: E402
from z2nsuper.splitting import phi_consistency  # noqa: E402

K, D = 6, 3


def _report(number, title, ok, elapsed, limit, detail=""):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    line = f"{status} criterion {number:2d}: {title} ({elapsed:.2f}s, limit {limit:g}s)"
    if detail:
        line += f" -- {detail}"
    return status, line


def _run(number, title, limit, body):
    start = time.perf_counter()
    try:
        ok, detail = body()
    except Exception as exc:  # any error counts as a FAIL line
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    return _report(number, title, ok, elapsed, limit, detail)


# -- criteria -------------------------------------------------------------------


def _signed_chain(convention, sign):
    names = ["111", "110", "101", "100", "011", "010", "001"]
    t = VariableTable.build(3, ["x"], [("xi" + b, "(" + ",".join(b) + ")") for b in names], convention)

    def mor(**images):
        full = dict(Morphism.identity(t).image_map())
        full.update({k: parse_expression(v, t) for k, v in images.items()})
        return make_morphism(t, t, full)

    s = "-" if sign else ""
    inner = mor(xi111=f"{s}2 xi101 xi010", xi101="3 xi100 xi001")
    outer = mor(xi111=f"xi111 {'-' if sign else '+'} xi101 xi010")
    return str(compose(outer, inner).image("xi111"))


def c1():
    zsp = _signed_chain(Convention.ZSP, False)
    par = _signed_chain(Convention.PARITY, True)
    ok = zsp == "2*xi101*xi010 + 3*xi100*xi010*xi001" and par == "-2*xi101*xi010 + 3*xi100*xi010*xi001"
    return ok, f"zsp: {zsp}; parity: {par}"


def c2():
    base = load(fixture_path("sign_rules_zsp.atl"))
    good = check_cocycle(base, K)
    bad = check_cocycle(superize(base, Convention.PARITY), K)
    failing = {name for e in bad.failures() for name, _ in e.failures}
    return good.ok and not bad.ok and failing == {"xi111"}, f"failing components {sorted(failing)}"


def c3():
    rng = random.Random(20240601)
    cases = 1000
    for _ in range(cases):
        t = random_table(rng, max_arity=3, max_formal=6)
        cap = 5
        a, b, c = (random_series(t, rng, max_order=rng.randint(1, 5), cap=cap) for _ in range(3))
        if (a * b) * c != a * (b * c):
            return False, "associativity"
        if a * (b + c) != a * b + a * c or (a + b) * c != a * c + b * c:
            return False, "distributivity"
        degs = sorted({t.monomial_degree(mu) for mu in a.terms | b.terms} | {t.zero_degree})
        ha, hb = homogeneous_part(a, rng.choice(degs)), homogeneous_part(b, rng.choice(degs))
        if ha and hb:
            if ha * hb != (hb * ha).scale(t.convention.sign(ha.degree(), hb.degree())):
                return False, "graded commutativity"
            prod = ha * hb
            if prod and prod.degree() != ha.degree() + hb.degree():
                return False, "degree additivity"
        k = rng.randint(0, 5)
        if truncate(a * b, k) != truncate(truncate(a, k) * truncate(b, k), k):
            return False, "truncation compatibility"
        degrees = [d.bits for d in t.formal_degrees]
        if as_plain(a * b) != naive_mul(as_plain(a), as_plain(b), degrees, t.convention.value, cap):
            return False, "naive oracle"
    return True, f"{cases} cases"


def c4():
    rng = random.Random(7)
    cases = 60
    k = K
    for _ in range(cases):
        t = random_table(rng, max_arity=3, max_formal=4)
        m = random_morphism(t, rng, affine=True, cap=k)
        m2 = random_morphism(t, rng, affine=True, cap=k)
        f, g = random_series(t, rng, max_order=2), random_series(t, rng, max_order=2)
        if pullback(m, f * g).truncate(k) != (pullback(m, f) * pullback(m, g)).truncate(k):
            return False, "multiplicativity"
        h = random_series(t, rng, degree=t.formal_degrees[0], max_order=3)
        ph = pullback(m, h).truncate(k)
        if h and ph and ph.degree() != h.degree():
            return False, "degree preservation"
        if j_order(pullback(m, h)) < j_order(h):
            return False, "J-continuity"
        if pullback(compose(m, m2), f).truncate(k) != pullback(m2, pullback(m, f)).truncate(k):
            return False, "functoriality"
        inv = invert_mod_order(m, k)
        ident = Morphism.identity(t, k)
        if not (equal_mod(compose(inv, m), ident, k) and equal_mod(compose(m, inv), ident, k)):
            return False, "inverse round trip"
    return True, f"{cases} morphisms at k={k}"


def _split_and_verify(name):
    atlas = load(fixture_path(name))
    iso = build_splitting_iso(atlas, K, D)
    report = verify_splitting(atlas, iso, K)
    bundle = linearize(atlas)
    return atlas, iso, report, bundle


def _trivial(bundle):
    one = BasePolynomial.constant(bundle.table.p, 1)
    zero = BasePolynomial.constant(bundle.table.p, 0)
    ident = tuple(BasePolynomial.variable(bundle.table.p, i) for i in range(bundle.table.p))
    for tr in bundle.transitions.values():
        if tr.base_map != ident:
            return False
        for block in tr.blocks.values():
            for r, row in enumerate(block):
                if any(e != (one if r == c else zero) for c, e in enumerate(row)):
                    return False
    return True


def c5():
    _, _, report, bundle = _split_and_verify("twist_theta.atl")
    return report.ok and _trivial(bundle), f"{len(report.entries)} checks, trivial bundle {_trivial(bundle)}"


def c6():
    atlas, _, report, bundle = _split_and_verify("twist_xieta.atl")
    ident = verify_splitting(atlas, SplittingIso.identity(atlas, K), K)
    residuals = {str(r) for e in ident.failures() for _, r in e.failures}
    ok = report.ok and _trivial(bundle) and not ident.ok and "xi*eta" in residuals
    return ok, f"identity residuals {sorted(residuals)}"


def c7():
    x = BasePolynomial.variable(1, 0)
    polys = [x, x * x, x ** 3 - x.scale(2)]
    for name in ("twist_theta.atl", "twist_xieta.atl", "composite3.atl"):
        atlas = load(fixture_path(name))
        phi = build_phi(atlas, K, D)
        for chart, imgs in phi.images.items():
            for i, s in enumerate(imgs):
                if epsilon(s) != BasePolynomial.variable(atlas.table.p, i):
                    return False, f"epsilon on {name} chart {chart}"
        if not phi_consistency(phi, atlas, polys).ok:
            return False, f"overlap consistency on {name}"
    composite = load(fixture_path("composite3.atl"))
    t = composite.transitions
    if t[("U", "W")] != compose(t[("V", "W")], t[("U", "V")]):
        return False, "composite fixture is not a composition"
    return True, "A, B and the composite atlas"


def c8():
    if monomial_count((1, 1, 1), 2) != 4:
        return False, "q=(1,1,1), k=2"
    checked = 0
    for n in (1, 2, 3):
        degs = enumerate_nonzero_degrees(n)
        for q in _rank_tuples(len(degs), 4):
            formal = [(f"g{i}", d) for i, d in enumerate(d for d, r in zip(degs, q) for _ in range(r))]
            t = VariableTable.build(n, [], formal, Convention.ZSP)
            for k in range(7):
                checked += 1
                if monomial_count(q, k) != len(list(t.monomials(k))):
                    return False, f"q={q}, k={k}"
    return True, f"{checked} (q, k) pairs"


def _rank_tuples(length, total):
    if length == 0:
        yield ()
        return
    for r in range(total + 1):
        for rest in _rank_tuples(length - 1, total - r):
            yield (r,) + rest


def c9():
    lifted = tangent_lift(load(fixture_path("tangent_n1.atl")))
    bidegrees = {str(d) for d in lifted.table.formal_degrees} | {str(lifted.table.zero_degree)}
    ok = check_cocycle(lifted, 4).ok and bidegrees == {"(0,0)", "(0,1)", "(1,0)", "(1,1)"}
    return ok and lifted.arity == 2, f"bidegrees {sorted(bidegrees)}"


def c10():
    atlas = load(fixture_path("twist_xieta.atl"))
    a = build_splitting_iso(atlas, K, D, chart_order=["U", "V"])
    b = build_splitting_iso(atlas, K, D, chart_order=["V", "U"])
    both = verify_splitting(atlas, a, K).ok and verify_splitting(atlas, b, K).ok
    return a != b and both, f"differ: {a != b}, both verify: {both}"


CRITERIA = [
    (1, "sign-rule composition reproduced exactly", 1, c1),
    (2, "cocycle check discriminates sign rules", 1, c2),
    (3, "algebra laws and naive oracle", 30, c3),
    (4, "morphism calculus", 60, c4),
    (5, "splitting of the theta-square atlas", 60, c5),
    (6, "splitting of the xi-eta atlas; identity fails", 60, c6),
    (7, "embedding family consistency", 60, c7),
    (8, "monomial counts", 5, c8),
    (9, "tangent lift", 5, c9),
    (10, "noncanonical splittings", 60, c10),
]


@pytest.mark.parametrize("number, title, limit, body", CRITERIA, ids=[f"criterion{c[0]}" for c in CRITERIA])
def test_criterion(number, title, limit, body, capsys):
    status, line = _run(number, title, limit, body)
    with capsys.disabled():
        print("\n" + line)
    assert status == "PASS", line


if __name__ == "__main__":
    results = [_run(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(s == "PASS" for s, _ in results) else 1)
