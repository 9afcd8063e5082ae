"""Ordinal conditional functions (ranking functions) and their native operations.

A ranking function stores one rank per world of its signature. Worlds outside
the domain (after conditionalization) carry ``INFINITY``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Union

from .logic import (
    BeliefSet,
    ParseError,
    Prop,
    Signature,
    SignatureError,
    WorldSet,
    as_worlds,
    format_world,
    parse_formula,
    parse_world,
    projection_table,
    sorted_worlds,
    to_text,
)

INFINITY = math.inf
Rank = Union[int, float]


class OCFError(ValueError):
    """Invalid ranking function or an operation outside its domain."""


def _valid_rank(r: object) -> bool:
    return (isinstance(r, int) and not isinstance(r, bool) and r >= 0) or r == INFINITY


def format_rank(r: Rank) -> str:
    return "inf" if r == INFINITY else str(r)


@dataclass(frozen=True, slots=True)
class Conditional:
    """``(consequent | antecedent)``."""

    consequent: Prop
    antecedent: Prop

    def __str__(self) -> str:
        def show(p: Prop) -> str:
            return to_text(p) if not isinstance(p, WorldSet) else str(p)

        return f"({show(self.consequent)}|{show(self.antecedent)})"


@dataclass(frozen=True)
class RankingFunction:
    signature: Signature
    ranks: tuple[Rank, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.ranks, tuple):
            object.__setattr__(self, "ranks", tuple(self.ranks))
        if len(self.ranks) != self.signature.size:
            raise OCFError(f"expected {self.signature.size} ranks, got {len(self.ranks)}")
        for r in self.ranks:
            if not _valid_rank(r):
                raise OCFError(f"invalid rank {r!r}")
        if 0 not in self.ranks:
            raise OCFError("a ranking function needs a world of rank 0")

    def __call__(self, w: int) -> Rank:
        return self.ranks[w]

    def __hash__(self) -> int:
        return hash((self.signature, self.ranks))

    @cached_property
    def domain(self) -> WorldSet:
        return WorldSet.of(self.signature, (w for w, r in enumerate(self.ranks) if r != INFINITY))

    @property
    def is_total(self) -> bool:
        return INFINITY not in self.ranks

    @property
    def max_rank(self) -> int:
        return max(r for r in self.ranks if r != INFINITY)

    def rank_of_mask(self, mask: int) -> Rank:
        best: Rank = INFINITY
        w = 0
        while mask:
            if mask & 1 and self.ranks[w] < best:
                best = self.ranks[w]
            mask >>= 1
            w += 1
        return best

    def zero_mask(self) -> int:
        m = 0
        for w, r in enumerate(self.ranks):
            if r == 0:
                m |= 1 << w
        return m

    def __str__(self) -> str:
        return format_ocf(self)


def ocf_new(sig: Signature, ranks: Mapping[object, Rank] | Iterable[Rank]) -> RankingFunction:
    """Build an OCF from a world→rank mapping or a rank sequence indexed by world.

    Mapping keys may be world bitmasks or world texts such as ``"a !b"``.
    """
    if isinstance(ranks, Mapping):
        table: dict[int, Rank] = {}
        for key, r in ranks.items():
            w = parse_world(key, sig) if isinstance(key, str) else key
            if not isinstance(w, int) or not 0 <= w < sig.size:
                raise OCFError(f"bad world {key!r}")
            if w in table:
                raise OCFError(f"world {format_world(w, sig)} given twice")
            table[w] = r
        missing = [w for w in sig.worlds() if w not in table]
        if missing:
            raise OCFError(f"no rank for world {format_world(missing[0], sig)}")
        return RankingFunction(sig, tuple(table[w] for w in sig.worlds()))
    return RankingFunction(sig, tuple(ranks))


def rank(k: RankingFunction, a: Prop) -> Rank:
    """``κ(A) = min{κ(ω) | ω ⊨ A}``, infinite for unsatisfiable ``A``."""
    return k.rank_of_mask(as_worlds(a, k.signature).mask)


def accepts(k: RankingFunction, c: Conditional) -> bool:
    """``κ ⊨ (B|A)`` iff ``κ(AB) < κ(A¬B)``."""
    b = as_worlds(c.consequent, k.signature).mask
    a = as_worlds(c.antecedent, k.signature).mask
    return k.rank_of_mask(a & b) < k.rank_of_mask(a & ~b)


def bel(k: RankingFunction) -> BeliefSet:
    return BeliefSet.of(WorldSet(k.signature, k.zero_mask()))


def reorder(k: RankingFunction, sig: Signature) -> RankingFunction:
    """The same OCF presented over a signature with the same atoms in another order."""
    if sig == k.signature:
        return k
    if not sig.same_atoms(k.signature):
        raise SignatureError(f"cannot reorder {k.signature} as {sig}")
    return marginalize_ocf(k, sig)


def marginalize_ocf(k: RankingFunction, subsig: Signature, allow_empty: bool = False) -> RankingFunction:
    """``κ↓subsig(ω') = min{κ(ω) | ω^subsig = ω'}``."""
    if not len(subsig) and not allow_empty:
        raise SignatureError("marginalization to the empty signature")
    table = projection_table(k.signature, subsig)
    out: list[Rank] = [INFINITY] * subsig.size
    for w, r in enumerate(k.ranks):
        p = table[w]
        if r < out[p]:
            out[p] = r
    return RankingFunction(subsig, tuple(out))


def lift_ocf(k: RankingFunction, supersig: Signature) -> RankingFunction:
    """``κ↑supersig(ω) = κ(ω^sig(κ))``."""
    table = projection_table(supersig, k.signature)
    return RankingFunction(supersig, tuple(k.ranks[table[w]] for w in supersig.worlds()))


def conditionalize(k: RankingFunction, a: Prop) -> RankingFunction:
    """``κ|A``: ranks of ``A``-worlds shifted by ``κ(A)``, other worlds leave the domain."""
    m = as_worlds(a, k.signature)
    base = k.rank_of_mask(m.mask)
    if base == INFINITY:
        raise OCFError("cannot conditionalize on a proposition of infinite rank")
    return RankingFunction(
        k.signature,
        tuple(r - base if m.mask >> w & 1 and r != INFINITY else INFINITY for w, r in enumerate(k.ranks)),
    )


def scale(k: RankingFunction, q: Fraction | int) -> RankingFunction:
    """``q·κ``; fails unless every scaled rank is a non-negative integer."""
    q = Fraction(q)
    if q <= 0:
        raise OCFError("scale factor must be positive")
    out: list[Rank] = []
    for r in k.ranks:
        if r == INFINITY:
            out.append(INFINITY)
            continue
        v = q * r
        if v.denominator != 1:
            raise OCFError(f"{q}·κ is not integral")
        out.append(int(v))
    return RankingFunction(k.signature, tuple(out))


def _aligned(k1: RankingFunction, k2: RankingFunction) -> RankingFunction:
    """``k1`` brought onto the signature of ``k2`` (marginalizing if needed)."""
    if k2.signature == k1.signature:
        return k1
    if not k2.signature.issubset(k1.signature):
        raise SignatureError(f"{k2.signature} is not a subsignature of {k1.signature}")
    return marginalize_ocf(k1, k2.signature, allow_empty=True)


def ocf_entails(k1: RankingFunction, k2: RankingFunction) -> bool:
    """``κ1 ⊨̇ κ2``: every conditional accepted by ``κ2`` is accepted by ``κ1``.

    Decided by two rank conditions over ``sig(κ2)`` after marginalizing ``κ1``:
    ``κ1(ω1) ≤ κ1(ω2)`` implies ``κ2(ω1) ≤ κ2(ω2)``, and worlds of infinite
    ``κ1``-rank have infinite ``κ2``-rank.
    """
    k1 = _aligned(k1, k2)
    levels: dict[Rank, set[Rank]] = {}
    for r1, r2 in zip(k1.ranks, k2.ranks):
        if r1 == INFINITY and r2 != INFINITY:
            return False
        levels.setdefault(r1, set()).add(r2)
    previous: Rank = -1
    for r1 in sorted(levels):
        values = levels[r1]
        if len(values) != 1:
            return False
        (value,) = values
        if value < previous:
            return False
        previous = value
    return True


def ocf_equiv(k1: RankingFunction, k2: RankingFunction) -> bool:
    """``κ1 ≅ κ2``: mutual entailment over the same signature."""
    if not k1.signature.same_atoms(k2.signature):
        return False
    k2 = reorder(k2, k1.signature)
    return ocf_entails(k1, k2) and ocf_entails(k2, k1)


def ocf_lin_equiv(k1: RankingFunction, k2: RankingFunction) -> Fraction | None:
    """The ``q > 0`` with ``κ1 = q·κ2`` if it exists."""
    if not k1.signature.same_atoms(k2.signature):
        return None
    k2 = reorder(k2, k1.signature)
    q: Fraction | None = None
    for r1, r2 in zip(k1.ranks, k2.ranks):
        if (r1 == INFINITY) != (r2 == INFINITY) or (r1 == 0) != (r2 == 0):
            return None
        if r1 in (0, INFINITY):
            continue
        ratio = Fraction(r1, r2)
        if q is None:
            q = ratio
        elif ratio != q:
            return None
    return Fraction(1) if q is None else q


# ---------------------------------------------------------------------------
# Text format


def format_ocf(k: RankingFunction) -> str:
    """``sig: a b`` followed by ``rank n: <world> , <world>`` lines, lowest rank first.

    Worlds of infinite rank are omitted.
    """
    lines = ["sig: " + " ".join(k.signature.atoms) if len(k.signature) else "sig:"]
    by_rank: dict[int, list[int]] = {}
    for w, r in enumerate(k.ranks):
        if r != INFINITY:
            by_rank.setdefault(int(r), []).append(w)
    for r in sorted(by_rank):
        worlds = sorted_worlds(by_rank[r], k.signature)
        lines.append(f"rank {r}: " + " , ".join(format_world(w, k.signature) for w in worlds))
    return "\n".join(lines) + "\n"


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_ocf(text: str, allow_partial: bool = False) -> RankingFunction:
    """Parse the OCF text format; missing worlds are only allowed with ``allow_partial``."""
    sig: Signature | None = None
    table: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        head, sep, body = line.partition(":")
        if not sep:
            raise ParseError(f"line {lineno}: expected 'sig:' or 'rank n:'")
        head = head.strip()
        if head == "sig":
            if sig is not None:
                raise ParseError(f"line {lineno}: duplicate sig line")
            try:
                sig = Signature(tuple(body.split()))
            except SignatureError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            continue
        parts = head.split()
        if len(parts) != 2 or parts[0] != "rank" or not parts[1].isdigit():
            raise ParseError(f"line {lineno}: expected 'rank n:', found {head!r}")
        if sig is None:
            raise ParseError(f"line {lineno}: rank line before sig line")
        r = int(parts[1])
        for item in body.split(","):
            if not item.strip():
                raise ParseError(f"line {lineno}: empty world entry")
            w = parse_world(item, sig)
            if w in table:
                raise ParseError(f"line {lineno}: world {format_world(w, sig)} listed twice")
            table[w] = r
    if sig is None:
        raise ParseError("missing sig line")
    missing = [w for w in sig.worlds() if w not in table]
    if missing and not allow_partial:
        raise ParseError(f"no rank for world {format_world(missing[0], sig)}")
    ranks = tuple(table.get(w, INFINITY) for w in sig.worlds())
    try:
        return RankingFunction(sig, ranks)
    except OCFError as exc:
        raise ParseError(str(exc)) from None


def parse_conditional(text: str, sig: Signature) -> Conditional:
    """Parse ``(B|A)`` where the top-level ``|`` separating the parts is the last one
    at parenthesis depth one."""
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ParseError(f"conditional {text!r} must have the form (B|A)")
    inner = s[1:-1]
    depth = 0
    split = None
    for i, ch in enumerate(inner):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "|" and depth == 0:
            split = i
    if split is None:
        raise ParseError(f"conditional {text!r} has no '|' separator")
    return Conditional(parse_formula(inner[:split], sig), parse_formula(inner[split + 1:], sig))
