"""Exhaustive instance enumeration, counterexample mining, the evaluation
matrix and the worked-example fixtures."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Iterable, Iterator

from .forgetting import (
    MATRIX_OPERATORS,
    SIGMA_NONMIN_XE,
    SIGMA_REV_XE,
    DomainError,
    ForgettingOperator,
    Kind,
    c_contraction,
    impact_bound,
    is_degenerate_for_xe,
    operator_from_id,
    strategy_satisfies,
    table_strategy,
)
from .logic import (
    Signature,
    WorldSet,
    as_worlds,
    contingent_world_sets,
    dnf,
    parse_formula,
    sigmin_worlds,
    syntactic_variants,
    to_text,
)
from .ocf import RankingFunction, format_ocf, marginalize_ocf, parse_ocf
from .postulates import (
    FORMULA_PAIR,
    POSTULATES,
    SPLIT,
    STATE_FORMULA_PAIR,
    STATE_PAIR,
    Instance,
    PreconditionError,
    Verdict,
    apply,
    check,
    format_instance,
)

DEFAULT_ATOMS = "abcdef"
MAX_ATOMS = 3

# ---------------------------------------------------------------------------
# Enumeration


@dataclass(frozen=True)
class EnumBounds:
    atoms: int = 2
    max_rank: int = 3

    def __post_init__(self) -> None:
        if not 1 <= self.atoms <= MAX_ATOMS:
            raise ValueError(f"atoms must be between 1 and {MAX_ATOMS}")
        if self.max_rank < 0:
            raise ValueError("max_rank must be non-negative")

    @property
    def signature(self) -> Signature:
        return Signature(tuple(DEFAULT_ATOMS[: self.atoms]))


ESCALATION = EnumBounds(3, 4)
ESCALATION_BUDGET = 200_000


def enum_ocfs(bounds: EnumBounds, by_height: bool = False) -> Iterator[RankingFunction]:
    """All OCFs over the bounded signature with ranks in ``0..max_rank``.

    With ``by_height`` the stream is ordered by maximal rank so that searches
    touch small OCFs first.
    """
    sig = bounds.signature
    n = sig.size
    if not by_height:
        for ranks in product(range(bounds.max_rank + 1), repeat=n):
            if 0 in ranks:
                yield RankingFunction(sig, ranks)
        return
    for height in range(bounds.max_rank + 1):
        for ranks in product(range(height + 1), repeat=n):
            if 0 in ranks and max(ranks) == height:
                yield RankingFunction(sig, ranks)


def _dense_key(k: RankingFunction) -> tuple:
    """Equal exactly for equivalent OCFs over the same signature."""
    levels = sorted(set(k.ranks))
    return tuple(levels.index(r) for r in k.ranks)


def splits(sig: Signature) -> list[tuple[Signature, Signature]]:
    """Ordered partitions ``(Σ1, Σ2)`` with both parts nonempty."""
    out = []
    for s1 in sig.subsignatures():
        if len(s1) < len(sig):
            out.append((s1, sig.without(s1.atoms)))
    return out


def instances(p: str, bounds: EnumBounds, by_height: bool = False) -> Iterator[Instance]:
    """The instance domain of postulate ``p`` in deterministic order."""
    sig = bounds.signature
    props = contingent_world_sets(sig)
    ocfs = enum_ocfs(bounds, by_height)
    if p in STATE_PAIR or p in STATE_FORMULA_PAIR:
        yield from _pair_instances(p, ocfs, props, sig)
        return
    for k in ocfs:
        yield from _instances_for(p, k, props, sig)


def _instances_for(p: str, k: RankingFunction, props: list[WorldSet], sig: Signature) -> Iterator[Instance]:
    if p == "AGM5":
        for a in props:
            f = dnf(a)
            for c in syntactic_variants(f, sig):
                yield Instance(k, f, c=c)
    elif p in ("AGM6", "AGM7", "CF"):
        for a in props:
            for c in props:
                if (a & c).is_contingent():
                    yield Instance(k, a, c=c)
    elif p == "OI":
        for a in props:
            for c in props:
                yield Instance(k, a, c=c)
    elif p in SPLIT:
        for s1, s2 in splits(sig):
            for a in props:
                if sigmin_worlds(a).issubset(s2):
                    yield Instance(k, a, split=(s1, s2))
    elif p == "LEocf":
        for a in props:
            for q in (2, 3):
                yield Instance(k, a, q=q)
    else:
        for a in props:
            yield Instance(k, a)


def _pair_instances(p: str, ocfs: Iterable[RankingFunction], props: list[WorldSet], sig: Signature) -> Iterator[Instance]:
    """Pairs whose antecedent can hold; all other pairs satisfy the postulate vacuously.

    Each unordered pair is produced once, when its later member is reached.
    """
    groups: dict[object, list[RankingFunction]] = {}
    for k2 in ocfs:
        key = k2.zero_mask() if p == "wE" else _dense_key(k2)
        seen = groups.setdefault(key, [])
        for k1 in seen:
            for a in props:
                if p == "EBE":
                    f = dnf(a)
                    for c in syntactic_variants(f, sig):
                        yield Instance(k1, f, k2=k2, c=c)
                else:
                    yield Instance(k1, a, k2=k2)
        seen.append(k2)


# ---------------------------------------------------------------------------
# Mining


@dataclass
class MineResult:
    verdict: Verdict
    checked: int = 0
    skipped: int = 0
    bounds: EnumBounds | None = None


def sweep(op: ForgettingOperator, p: str, insts: Iterable[Instance], stop_at_first: bool = True,
          mode: str = "generic", exclude=None, limit: int | None = None) -> MineResult:
    checked = skipped = 0
    for inst in insts:
        if limit is not None and checked >= limit:
            break
        if exclude is not None and exclude(inst):
            skipped += 1
            continue
        try:
            v = check(p, op, inst, mode)
        except PreconditionError:
            skipped += 1
            continue
        checked += 1
        if not v.holds and stop_at_first:
            return MineResult(v, checked, skipped)
    return MineResult(Verdict(True), checked, skipped)


def mine(op: ForgettingOperator, p: str, bounds: EnumBounds, escalate: bool = False,
         budget: int | None = None) -> MineResult:
    """First violating instance in enumeration order.

    With ``escalate`` a search that comes up empty below three atoms is
    repeated at ``ESCALATION`` bounds, smallest OCFs first, for at most
    ``budget`` checked instances (default ``ESCALATION_BUDGET``).
    """
    result = sweep(op, p, instances(p, bounds))
    result.bounds = bounds
    if result.verdict.holds and escalate and bounds.atoms < ESCALATION.atoms:
        limit = ESCALATION_BUDGET if budget is None else budget
        result = sweep(op, p, instances(p, ESCALATION, by_height=True), limit=limit)
        result.bounds = ESCALATION
    return result


def witness_text(op: ForgettingOperator, p: str, v: Verdict) -> str:
    assert v.witness is not None
    gamma = None
    if op.kind is Kind.C_CONTRACTION:
        try:
            gamma = op.strategy(v.witness.k, v.witness.a)
        except ValueError:
            gamma = None
    head = f"# {op} violates {p}: {v.explanation}\n"
    return head + format_instance(v.witness, gamma)


# ---------------------------------------------------------------------------
# The evaluation matrix

COLUMNS = ("marg", "lmarg", "cond", "c-ign", "c-rev", "c-min", "c-nonmin")

_ROWS = {
    "AGM1": "+ + - + - + -",
    "AGM2": "- - + - + + -",
    "AGM3": "+ + + + + + +",
    "AGM4": "- - + - + + -",
    "AGM5": "+ + + + + + +",
    "AGM6": "+ - + - + + -",
    "AGM7": "- - + - + + -",
    "CF": "- - - - + + -",
    "W": "+ - - - - - -",
    "wC_S": "+ + - - - - -",
    "sC_S": "+ + - - - - -",
    "CP_S": "+ + - - - - -",
    "wE": "+ + - - - - -",
    "E": "+ + + - - - -",
    "BE": "+ + + + + + +",
    "EBE": "+ + + + + + +",
    "LEocf": "+ + + + * + *",
    "OI": "+ + + - - - -",
    "PP": "+ + - - - - -",
    "NP": "+ + - - - - -",
    "PPcond": "+ + - - - - -",
    "NPcond": "+ + - - - - -",
    "EP": "+ + - - - - -",
    "BP": "+ + - - - - -",
}
_SYMBOL = {"+": "holds", "-": "fails", "*": "conditional"}

EXPECTED: dict[tuple[str, str], str] = {
    (col, p): _SYMBOL[sym] for p, row in _ROWS.items() for col, sym in zip(COLUMNS, row.split())
}
assert set(_ROWS) == set(POSTULATES)

_XE_VARIANT = {"c-rev": c_contraction(SIGMA_REV_XE), "c-nonmin": c_contraction(SIGMA_NONMIN_XE)}


@dataclass
class Cell:
    operator: str
    postulate: str
    expected: str
    observed: str
    witness: str | None = None
    witness_file: str = ""
    checked: int = 0
    note: str = ""

    @property
    def matches(self) -> bool:
        return self.expected == self.observed


def _operator(col: str) -> ForgettingOperator:
    return dict(zip(COLUMNS, MATRIX_OPERATORS))[col]


def evaluate_cell(col: str, p: str, bounds: EnumBounds) -> Cell:
    op = _operator(col)
    expected = EXPECTED[(col, p)]
    if expected == "conditional":
        xe = _XE_VARIANT[col]
        with_xe = sweep(xe, p, instances(p, bounds), exclude=lambda inst: is_degenerate_for_xe(inst.k))
        plain = sweep(op, p, instances(p, bounds))
        if with_xe.verdict.holds and not plain.verdict.holds:
            observed = "conditional"
        elif with_xe.verdict.holds:
            observed = "holds"
        else:
            observed = "fails"
        v = plain.verdict if not plain.verdict.holds else with_xe.verdict
        witness = witness_text(op, p, v) if not v.holds else None
        return Cell(col, p, expected, observed, witness, checked=with_xe.checked + plain.checked,
                    note=f"{xe} verified on {with_xe.checked} instances")
    result = mine(op, p, bounds, escalate=expected == "fails")
    observed = "holds" if result.verdict.holds else "fails"
    witness = witness_text(op, p, result.verdict) if not result.verdict.holds else None
    note = f"|Σ|={result.bounds.atoms}" if result.bounds else ""
    return Cell(col, p, expected, observed, witness, checked=result.checked, note=note)


def reproduce_matrix(bounds: EnumBounds = EnumBounds(2, 3), witness_dir: Path | None = None,
                     columns: Iterable[str] = COLUMNS, postulates: Iterable[str] = POSTULATES) -> list[Cell]:
    cells = []
    for p in postulates:
        for col in columns:
            cell = evaluate_cell(col, p, bounds)
            if cell.witness is not None and witness_dir is not None:
                witness_dir.mkdir(parents=True, exist_ok=True)
                path = witness_dir / f"{col}__{p}.txt"
                path.write_text(cell.witness)
                cell.witness_file = str(path)
            cells.append(cell)
    return cells


def format_report(cells: Iterable[Cell]) -> str:
    lines = ["operator\tpostulate\texpected\tobserved\twitness_file"]
    for c in cells:
        lines.append(f"{c.operator}\t{c.postulate}\t{c.expected}\t{c.observed}\t{c.witness_file}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Fixtures

_EXPR_TOKEN = re.compile(r"\s*([A-Za-z]\w*|[(),])")


@dataclass
class Fixture:
    name: str
    k: RankingFunction
    k2: RankingFunction | None
    kprime: RankingFunction | None
    params: dict[str, str]
    gammas: list[tuple[str, int]]
    expected: list[tuple[str, str]]
    verdicts: list[tuple[str, bool, str, dict[str, str]]]


@dataclass
class FixtureResult:
    name: str
    failures: list[str] = field(default_factory=list)
    checks: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def _sections(text: str, marker: str) -> list[tuple[str, str]]:
    out: list[tuple[str, list[str]]] = []
    for line in text.splitlines():
        if line.startswith(marker):
            out.append((line[len(marker):].strip(), []))
        elif out:
            out[-1][1].append(line)
        elif line.split("#", 1)[0].strip():
            out.append(("", [line]))
    return [(name, "\n".join(body) + "\n") for name, body in out]


def load_fixture(path: Path) -> Fixture:
    sections = dict(_sections((path / "input.ocf").read_text(), "---"))
    k = parse_ocf(sections.pop("",  None) or sections.pop("k"))
    k2 = parse_ocf(sections["k2"]) if "k2" in sections else None
    kprime = parse_ocf(sections["kprime"]) if "kprime" in sections else None
    params: dict[str, str] = {}
    gammas: list[tuple[str, int]] = []
    for raw in (path / "params.txt").read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.rpartition(":") if line.startswith("gamma ") else line.partition(":")
        key, value = key.strip(), value.strip()
        if key.startswith("gamma "):
            gammas.append((key[len("gamma "):].strip(), int(value)))
        else:
            params[key] = value
    expected = _sections((path / "expected.ocf").read_text(), "===") if (path / "expected.ocf").exists() else []
    verdicts = []
    for raw in (path / "verdict.txt").read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2 or parts[1] not in ("holds", "fails"):
            raise ValueError(f"{path.name}: bad verdict line {line!r}")
        which, options = "operator", {}
        for extra in parts[2:]:
            if extra.startswith("@"):
                which = extra[1:]
            elif "=" in extra:
                key, _, value = extra.partition("=")
                options[key] = value
            else:
                raise ValueError(f"{path.name}: bad verdict option {extra!r}")
        verdicts.append((parts[0], parts[1] == "holds", which, options))
    return Fixture(path.name, k, k2, kprime, params, gammas, expected, verdicts)


class _Evaluator:
    """Evaluates fixture expressions such as ``forget(forget(k,A),C)``."""

    def __init__(self, fx: Fixture):
        self.fx = fx
        sig = fx.k.signature
        self.props = {"A": as_worlds(parse_formula(fx.params["formula"], sig), sig)}
        if "formula2" in fx.params:
            c = as_worlds(parse_formula(fx.params["formula2"], sig), sig)
            self.props["C"] = c
            self.props["AC"] = self.props["A"] & c
        self.tables: dict[str, dict] = {"operator": {}, "operator2": {}}
        self.ops = {name: self._make_op(name) for name in ("operator", "operator2") if name in fx.params}
        self.steps: list[tuple[str, RankingFunction, WorldSet]] = []

    def _make_op(self, name: str) -> ForgettingOperator:
        op_id = self.fx.params[name]
        if op_id == "table":
            return c_contraction(table_strategy(f"{self.fx.name}-{name}", self.tables[name]))
        return operator_from_id(op_id)

    def value(self, text: str) -> RankingFunction:
        tokens = _EXPR_TOKEN.findall(text)
        pos, result = self._parse(tokens, 0)
        if pos != len(tokens):
            raise ValueError(f"trailing input in expression {text!r}")
        return result

    def _parse(self, tokens: list[str], pos: int) -> tuple[int, RankingFunction]:
        tok = tokens[pos]
        if tok == "k":
            return pos + 1, self.fx.k
        if tok == "k2":
            assert self.fx.k2 is not None
            return pos + 1, self.fx.k2
        if tok == "kprime":
            assert self.fx.kprime is not None
            return pos + 1, self.fx.kprime
        if tok in ("forget", "forget2", "marg"):
            assert tokens[pos + 1] == "("
            pos, inner = self._parse(tokens, pos + 2)
            assert tokens[pos] == ","
            args = []
            pos += 1
            while tokens[pos] != ")":
                if tokens[pos] != ",":
                    args.append(tokens[pos])
                pos += 1
            if tok == "marg":
                return pos + 1, marginalize_ocf(inner, inner.signature.restrict(args))
            (name,) = args
            op_name = "operator" if tok == "forget" else "operator2"
            op = self.ops[op_name]
            prop = self.props[name]
            self.steps.append((op_name, inner, prop))
            return pos + 1, apply(op, inner, prop)
        raise ValueError(f"unexpected token {tok!r}")

    def register_gammas(self) -> None:
        for expr, gamma in self.fx.gammas:
            op_name = "operator2" if expr.startswith("forget2") else "operator"
            inner_text, name = _split_forget(expr)
            inner = self.value(inner_text)
            self.tables[op_name][(inner, self.props[name])] = gamma
            self.ops[op_name] = self._make_op(op_name)


def _split_forget(expr: str) -> tuple[str, str]:
    """``forget(E,X)`` → (``E``, ``X``)."""
    body = expr[expr.index("(") + 1: expr.rindex(")")]
    inner, _, name = body.rpartition(",")
    return inner.strip(), name.strip()


def run_fixture(fx: Fixture) -> FixtureResult:
    result = FixtureResult(fx.name)
    ev = _Evaluator(fx)
    ev.register_gammas()
    for label, text in fx.expected:
        want = parse_ocf(text, allow_partial=True)
        try:
            got = ev.value(label)
        except (PreconditionError, DomainError, ValueError) as exc:
            result.failures.append(f"{label}: {exc}")
            continue
        result.checks += 1
        if got != want or format_ocf(got) != format_ocf(want):
            result.failures.append(f"{label}: computed\n{format_ocf(got)}expected\n{format_ocf(want)}")
    for op_name in ("operator", "operator2"):
        classes = fx.params.get("classes" if op_name == "operator" else "classes2", "").split()
        op = ev.ops.get(op_name)
        if op is None or op.kind is not Kind.C_CONTRACTION:
            continue
        for used, k, prop in ev.steps:
            if used != op_name:
                continue
            gamma = op.strategy(k, prop)
            result.checks += 1
            if not impact_bound(k, prop).admits(gamma):
                result.failures.append(f"γ = {gamma} violates the c-contraction bound")
            for cls in classes:
                result.checks += 1
                if not strategy_satisfies(op.strategy, cls, k, prop):
                    result.failures.append(f"γ = {gamma} at {to_text(dnf(prop))} is not of class {cls}")
    sig = fx.k.signature
    for p, holds, op_name, options in fx.verdicts:
        kprime = ev.value(options["kprime"]) if "kprime" in options else None
        inst = Instance(
            fx.k, ev.props[options.get("A", "A")], k2=fx.k2, c=ev.props.get("C"), kprime=kprime,
            split=_parse_split(fx.params["split"], sig) if "split" in fx.params else None,
        )
        if p in FORMULA_PAIR and "C" not in ev.props:
            result.failures.append(f"{p} needs formula2")
            continue
        try:
            v = check(p, ev.ops[op_name], inst, "both" if p != "OI" else "generic")
        except (PreconditionError, DomainError) as exc:
            result.failures.append(f"{p}: {exc}")
            continue
        result.checks += 1
        if v.holds != holds:
            state = "holds" if v.holds else f"fails ({v.explanation})"
            result.failures.append(f"{p} with {ev.ops[op_name]}: documented {'holds' if holds else 'fails'}, got {state}")
    return result


def _parse_split(text: str, sig: Signature) -> tuple[Signature, Signature]:
    left, _, right = text.partition("|")
    return sig.restrict(left.split()), sig.restrict(right.split())


def fixture_root() -> Path:
    return Path(str(resources.files("ocforget") / "fixtures"))


def fixture_dirs(root: Path | None = None, group: str | None = "appendix") -> list[Path]:
    root = root or fixture_root()
    base = root / group if group else root
    return sorted(p for p in base.iterdir() if p.is_dir() and (p / "verdict.txt").exists())


def run_fixtures(root: Path | None = None, group: str | None = "appendix") -> list[FixtureResult]:
    return [run_fixture(load_fixture(p)) for p in fixture_dirs(root, group)]
