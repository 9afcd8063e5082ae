"""Command-line frontend.

Exit codes: 0 success or postulate holds, 1 postulate violated or mismatch,
2 parse or usage error, 3 domain error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .forgetting import DomainError, operator_from_id
from .lab import (
    COLUMNS,
    EnumBounds,
    _parse_split,
    fixture_dirs,
    fixture_root,
    format_report,
    load_fixture,
    mine,
    reproduce_matrix,
    run_fixture,
    witness_text,
)
from .logic import ParseError, SignatureError, parse_formula
from .ocf import (
    OCFError,
    RankingFunction,
    accepts,
    bel,
    format_ocf,
    format_rank,
    ocf_equiv,
    ocf_lin_equiv,
    parse_conditional,
    parse_ocf,
    rank,
)
from .postulates import (
    MODES,
    POSTULATES,
    ArityError,
    DualFormMismatch,
    Instance,
    PreconditionError,
    apply,
    check,
    parse_instance,
)

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _ocf(path: str, partial: bool = True) -> RankingFunction:
    return parse_ocf(_read(path), allow_partial=partial)


def _op(args: argparse.Namespace):
    return operator_from_id(args.op, args.strategy)


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_forget(args: argparse.Namespace) -> int:
    k = _ocf(args.ocf)
    a = parse_formula(args.formula, k.signature)
    post = apply(_op(args), k, a)
    _write(format_ocf(post), args.out)
    info = sys.stdout if args.out not in (None, "-") else sys.stderr
    print(f"Bel before: {bel(k)}", file=info)
    print(f"Bel after: {bel(post)}", file=info)
    return EXIT_OK


def cmd_bel(args: argparse.Namespace) -> int:
    print(bel(_ocf(args.ocf)))
    return EXIT_OK


def cmd_accepts(args: argparse.Namespace) -> int:
    k = _ocf(args.ocf)
    ok = accepts(k, parse_conditional(args.conditional, k.signature))
    print("accepted" if ok else "not accepted")
    return EXIT_OK if ok else EXIT_FALSE


def cmd_rank(args: argparse.Namespace) -> int:
    k = _ocf(args.ocf)
    print(format_rank(rank(k, parse_formula(args.formula, k.signature))))
    return EXIT_OK


def cmd_equiv(args: argparse.Namespace) -> int:
    k1, k2 = _ocf(args.first), _ocf(args.second)
    if args.linear:
        q = ocf_lin_equiv(k1, k2)
        print(f"linearly equivalent, q = {q}" if q is not None else "not linearly equivalent")
        return EXIT_OK if q is not None else EXIT_FALSE
    ok = ocf_equiv(k1, k2)
    print("equivalent" if ok else "not equivalent")
    return EXIT_OK if ok else EXIT_FALSE


def _instance(args: argparse.Namespace) -> Instance:
    """Build an instance from a fixture directory or instance file, then apply flag overrides."""
    fields: dict = {}
    formula = formula2 = split = None
    if args.instance is not None:
        path = Path(args.instance)
        if path.is_dir():
            fx = load_fixture(path)
            fields = {"k": fx.k, "k2": fx.k2, "kprime": fx.kprime}
            formula, formula2, split = (fx.params.get(key) for key in ("formula", "formula2", "split"))
        else:
            inst = parse_instance(_read(args.instance))
            fields = {"k": inst.k, "a": inst.a, "k2": inst.k2, "c": inst.c,
                      "split": inst.split, "kprime": inst.kprime, "q": inst.q}
    if args.ocf is not None:
        fields["k"] = _ocf(args.ocf)
    if "k" not in fields:
        raise UsageError("check needs an instance path or --ocf")
    sig = fields["k"].signature
    if args.k2 is not None:
        fields["k2"] = _ocf(args.k2)
    if args.kprime is not None:
        fields["kprime"] = _ocf(args.kprime, partial=False)
    formula = args.formula or formula
    formula2 = args.formula2 or formula2
    split = args.split or split
    if formula is not None:
        fields["a"] = parse_formula(formula, sig)
    if formula2 is not None:
        fields["c"] = parse_formula(formula2, sig)
    if isinstance(split, str):
        fields["split"] = _parse_split(split, sig)
    if args.q is not None:
        fields["q"] = args.q
    if "a" not in fields:
        raise UsageError("check needs a formula")
    if fields.get("q") is None and args.postulate == "LEocf":
        fields["q"] = 2
    return Instance(**fields)


def cmd_check(args: argparse.Namespace) -> int:
    inst = _instance(args)
    v = check(args.postulate, _op(args), inst, args.mode)
    if v.holds:
        print(f"{args.postulate} holds for {args.op}")
        return EXIT_OK
    print(f"{args.postulate} violated by {args.op}: {v.explanation}")
    for key, value in v.detail.items():
        print(f"{key}:\n{value}" if "\n" in str(value) else f"{key}: {value}")
    return EXIT_FALSE


def _bounds(args: argparse.Namespace) -> EnumBounds:
    try:
        return EnumBounds(args.atoms, args.max_rank)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_mine(args: argparse.Namespace) -> int:
    op = _op(args)
    result = mine(op, args.postulate, _bounds(args), escalate=args.escalate, budget=args.budget)
    if result.verdict.holds:
        print(f"no witness for {args.postulate} with {op} among {result.checked} instances")
        return EXIT_FALSE
    text = witness_text(op, args.postulate, result.verdict)
    out = Path(args.witness_dir) / f"{op}__{args.postulate}.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"{args.postulate} violated by {op}: {result.verdict.explanation}")
    print(f"witness written to {out}")
    return EXIT_OK


def cmd_matrix(args: argparse.Namespace) -> int:
    columns = args.columns or list(COLUMNS)
    postulates = args.postulates or list(POSTULATES)
    for name, allowed, given in (("operator", COLUMNS, columns), ("postulate", POSTULATES, postulates)):
        unknown = [g for g in given if g not in allowed]
        if unknown:
            raise UsageError(f"unknown {name} {', '.join(unknown)}")
    witness_dir = Path(args.witness_dir) if args.witness_dir else None
    cells = reproduce_matrix(_bounds(args), witness_dir, columns, postulates)
    _write(format_report(cells), args.out)
    mismatches = [c for c in cells if not c.matches]
    print(f"{len(cells)} cells, {len(mismatches)} mismatches", file=sys.stderr)
    for c in mismatches:
        print(f"mismatch: {c.operator} {c.postulate}: expected {c.expected}, observed {c.observed}",
              file=sys.stderr)
    return EXIT_OK if not mismatches else EXIT_FALSE


def cmd_fixtures(args: argparse.Namespace) -> int:
    root = Path(args.root) if args.root else fixture_root()
    groups = ["appendix", "proofs"] if args.group == "all" else [args.group]
    failed = 0
    for group in groups:
        for path in fixture_dirs(root, group):
            result = run_fixture(load_fixture(path))
            status = "pass" if result.passed else "FAIL"
            print(f"{group}/{result.name}\t{status}\t{result.checks} checks")
            for failure in result.failures:
                print(f"    {failure}")
            failed += not result.passed
    return EXIT_OK if not failed else EXIT_FALSE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocforget", description="Epistemic forgetting over ranking functions.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def with_op(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--op", required=required, help="marg, lmarg, cond, c-ign, c-rev, c-min, c-nonmin, c-custom")
        p.add_argument("--strategy", help="γ-strategy for c-contractions: min, ign, rev, nonmin, rev-xe, "
                                          "nonmin-xe or const:<n>")

    p = sub.add_parser("forget", help="forget a formula and print the posterior OCF")
    p.add_argument("ocf")
    with_op(p)
    p.add_argument("--formula", required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_forget)

    p = sub.add_parser("bel", help="print the belief set as DNF")
    p.add_argument("ocf")
    p.set_defaults(func=cmd_bel)

    p = sub.add_parser("accepts", help="test acceptance of a conditional (B|A)")
    p.add_argument("ocf")
    p.add_argument("conditional")
    p.set_defaults(func=cmd_accepts)

    p = sub.add_parser("rank", help="print the rank of a formula")
    p.add_argument("ocf")
    p.add_argument("formula")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("equiv", help="test OCF equivalence")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--linear", action="store_true", help="test linear equivalence instead")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("check", help="check one postulate on one instance")
    p.add_argument("postulate", choices=POSTULATES)
    p.add_argument("instance", nargs="?", help="fixture directory or instance file")
    with_op(p)
    p.add_argument("--ocf")
    p.add_argument("--formula")
    p.add_argument("--formula2")
    p.add_argument("--k2")
    p.add_argument("--kprime")
    p.add_argument("--split", help='for example "b c | a"')
    p.add_argument("--q", type=Fraction, help="LEocf scale factor (default 2)")
    p.add_argument("--mode", choices=MODES, default="both")
    p.set_defaults(func=cmd_check)

    def with_bounds(p: argparse.ArgumentParser) -> None:
        p.add_argument("--atoms", type=int, default=2)
        p.add_argument("--max-rank", type=int, default=3)

    p = sub.add_parser("mine", help="search for a counterexample")
    p.add_argument("--postulate", required=True, choices=POSTULATES)
    with_op(p)
    with_bounds(p)
    p.add_argument("--escalate", action="store_true", help="retry at three atoms if nothing is found")
    p.add_argument("--budget", type=int, help="instance limit for the escalated search")
    p.add_argument("--witness-dir", default=".")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("matrix", help="reproduce the operator versus postulate matrix")
    with_bounds(p)
    p.add_argument("--op", dest="columns", action="append", help="restrict to an operator column")
    p.add_argument("--postulate", dest="postulates", action="append", help="restrict to a postulate row")
    p.add_argument("--witness-dir")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("fixtures", help="replay the worked-example fixtures")
    p.add_argument("--group", choices=("appendix", "proofs", "all"), default="appendix")
    p.add_argument("--root")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ParseError, SignatureError, ArityError) as exc:
        return _fail(exc, EXIT_USAGE)
    except (PreconditionError, DomainError, OCFError) as exc:
        return _fail(exc, EXIT_DOMAIN)
    except DualFormMismatch as exc:
        return _fail(exc, EXIT_FALSE)
    except ValueError as exc:
        return _fail(exc, EXIT_USAGE)


def _fail(exc: Exception, code: int) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
