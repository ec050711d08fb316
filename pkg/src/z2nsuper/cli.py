"""Command-line front end.

Exit status: 0 on success/PASS, 1 on FAIL or an unsolvable splitting, 2 on
input errors (unreadable file, syntax, grading or arity problems).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .atlas import Atlas, check_cocycle, superize, tangent_lift
from .errors import CocycleFailure, UnsolvableAtBound, Z2nError
from .fileformat import format_document, load
from .grading import Convention
from .series import GradedSeries
from .split_model import linearize
from .splitting import SplittingIso, build_splitting_iso, verify_splitting
from .syntax import parse_expression

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_K = 6
DEFAULT_D = 3


@dataclass
class Command:
    verb: str
    inputs: list[str]
    k: int | None = DEFAULT_K
    D: int = DEFAULT_D
    convention: str | None = None
    out: str | None = None
    seed: int = 0
    chart_order: list[str] | None = None
    expr: str | None = None

    def __post_init__(self):
        if self.verb in ("split", "verify") and (self.k is None or self.k < 1):
            raise ValueError("--k must be at least 1 for split and verify")
        if self.k is not None and self.k < 0:
            raise ValueError("--k must be nonnegative")
        if self.D < 0:
            raise ValueError("--D must be nonnegative")


@dataclass
class Outcome:
    status: int
    text: str
    files: dict[str, str] = field(default_factory=dict)


def _atlas(path: str, convention: str | None) -> Atlas:
    value = load(path)
    if not isinstance(value, Atlas):
        raise Z2nError(f"{path}: expected an atlas document")
    if convention is not None:
        value = superize(value, Convention.parse(convention))
    return value


def _emit(doc: str, out: str | None, files: dict) -> str:
    if out is None:
        return doc
    files[out] = doc
    return ""


def run(cmd: Command) -> Outcome:
    files: dict[str, str] = {}
    verb = cmd.verb
    if verb == "check-cocycle":
        report = check_cocycle(_atlas(cmd.inputs[0], cmd.convention), cmd.k)
        return Outcome(EXIT_OK if report.ok else EXIT_FAIL, report.format())
    if verb == "superize":
        if cmd.convention is None:
            raise Z2nError("superize needs --convention")
        atlas = _atlas(cmd.inputs[0], cmd.convention)
        return Outcome(EXIT_OK, _emit(format_document(atlas), cmd.out, files), files)
    if verb == "tangent-lift":
        lifted = tangent_lift(_atlas(cmd.inputs[0], cmd.convention))
        return Outcome(EXIT_OK, _emit(format_document(lifted), cmd.out, files), files)
    if verb == "linearize":
        try:
            bundle = linearize(_atlas(cmd.inputs[0], cmd.convention))
        except CocycleFailure as exc:
            return Outcome(EXIT_FAIL, exc.report.format() if exc.report else f"FAIL {exc}\n")
        return Outcome(EXIT_OK, _emit(format_document(bundle), cmd.out, files), files)
    if verb == "split":
        atlas = _atlas(cmd.inputs[0], cmd.convention)
        try:
            iso = build_splitting_iso(atlas, cmd.k, cmd.D, cmd.chart_order)
        except UnsolvableAtBound as exc:
            return Outcome(EXIT_FAIL, f"FAIL split: {exc}\n")
        except CocycleFailure as exc:
            return Outcome(EXIT_FAIL, exc.report.format() if exc.report else f"FAIL {exc}\n")
        report = verify_splitting(atlas, iso, cmd.k, cmd.seed)
        text = _emit(format_document(iso), cmd.out, files)
        text += report.format() if cmd.out else ""
        return Outcome(EXIT_OK if report.ok else EXIT_FAIL, text, files)
    if verb == "verify":
        atlas = _atlas(cmd.inputs[0], cmd.convention)
        iso = load(cmd.inputs[1])
        if not isinstance(iso, SplittingIso):
            raise Z2nError(f"{cmd.inputs[1]}: expected an iso document")
        if cmd.convention is not None:
            raise Z2nError("verify does not take --convention; superize the atlas first")
        report = verify_splitting(atlas, iso, cmd.k, cmd.seed)
        return Outcome(EXIT_OK if report.ok else EXIT_FAIL, report.format())
    if verb == "eval":
        value = load(cmd.inputs[0])
        if not isinstance(value, GradedSeries):
            raise Z2nError(f"{cmd.inputs[0]}: expected a series document")
        if cmd.expr is not None:
            value = parse_expression(cmd.expr, value.table, value.cap)
        if cmd.k is not None:
            value = value.truncate(cmd.k)
        deg = value.degree()
        order = value.j_order()
        lines = [
            str(value),
            f"# degree {deg if deg is not None else 'inhomogeneous'}",
            f"# j-order {'inf' if order == float('inf') else order}",
        ]
        return Outcome(EXIT_OK, "\n".join(lines) + "\n")
    raise ValueError(f"unknown verb {verb}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="z2nsuper",
        description="Z_2^n-graded series, atlases, cocycle checks and splittings.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, help_text, inputs=("input",), k=True, D=False, conv=True, out=False, seed=False):
        p = sub.add_parser(name, help=help_text)
        for name_ in inputs:
            p.add_argument(name_)
        if k:
            p.add_argument("--k", type=int, default=DEFAULT_K, help="truncation order (J^(k+1) is dropped)")
        if D:
            p.add_argument("--D", type=int, default=DEFAULT_D, help="degree bound for correction coefficients")
            p.add_argument("--chart-order", help="comma-separated chart ids fixing the solver's unknown order")
        if conv:
            p.add_argument("--convention", help="zsp, parity or comm (reinterprets the atlas data)")
        if out:
            p.add_argument("--out", help="write the resulting document here instead of stdout")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="seed for the randomized product checks")
        return p

    add("check-cocycle", "verify transition compatibility on overlaps and triples")
    add("superize", "reinterpret commutative transition data under a sign convention", k=False, out=True)
    add("tangent-lift", "lift an n=1 atlas to its Z_2^2 tangent atlas", k=False, out=True)
    add("linearize", "extract the graded vector bundle J/J^2", k=False, out=True)
    add("split", "construct and verify a splitting iso", D=True, out=True, seed=True)
    add("verify", "verify an iso document against an atlas", inputs=("atlas", "iso"), seed=True)
    ev = add("eval", "print a series document canonically", conv=False)
    ev.set_defaults(k=None)
    ev.add_argument("--expr", help="evaluate this expression over the document's variables instead")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    inputs = [getattr(args, n) for n in ("input", "atlas", "iso") if getattr(args, n, None) is not None]
    try:
        cmd = Command(
            verb=args.verb,
            inputs=inputs,
            k=args.k if hasattr(args, "k") else DEFAULT_K,
            D=getattr(args, "D", DEFAULT_D),
            convention=getattr(args, "convention", None),
            out=getattr(args, "out", None),
            seed=getattr(args, "seed", 0),
            chart_order=args.chart_order.split(",") if getattr(args, "chart_order", None) else None,
            expr=getattr(args, "expr", None),
        )
        outcome = run(cmd)
    except (Z2nError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for path, text in outcome.files.items():
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(outcome.text)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
