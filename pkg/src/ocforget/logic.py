"""Propositional core: signatures, worlds, formulas, model sets and belief sets.

Worlds are bitmasks over a signature (bit ``i`` set iff atom ``i`` is true).
Model sets are stored as integer bitsets over the ``2**n`` worlds so that
inclusion and set algebra are single integer operations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Union

ATOM_RE = re.compile(r"[a-z][a-z0-9_]*")
KEYWORDS = frozenset({"top", "bot"})


class ParseError(ValueError):
    """Malformed formula, world or OCF text."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} at position {position}")
        self.position = position


class UnknownAtomError(ParseError):
    """A formula mentions an atom outside the signature it is parsed against."""

    def __init__(self, atom: str, position: int | None = None):
        super().__init__(f"unknown atom {atom!r}", position)
        self.atom = atom


class SignatureError(ValueError):
    """Invalid signature or signature mismatch."""


# ---------------------------------------------------------------------------
# Signatures and worlds


@dataclass(frozen=True, slots=True)
class Signature:
    atoms: tuple[str, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.atoms, tuple):
            object.__setattr__(self, "atoms", tuple(self.atoms))
        for atom in self.atoms:
            if not isinstance(atom, str) or not ATOM_RE.fullmatch(atom) or atom in KEYWORDS:
                raise SignatureError(f"invalid atom name {atom!r}")
        if len(set(self.atoms)) != len(self.atoms):
            raise SignatureError(f"duplicate atoms in {self.atoms}")

    @classmethod
    def of(cls, *atoms: str) -> Signature:
        if len(atoms) == 1 and " " in atoms[0]:
            atoms = tuple(atoms[0].split())
        return cls(tuple(atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self) -> Iterator[str]:
        return iter(self.atoms)

    def __contains__(self, atom: object) -> bool:
        return atom in self.atoms

    def __str__(self) -> str:
        return " ".join(self.atoms)

    @property
    def size(self) -> int:
        """Number of worlds."""
        return 1 << len(self.atoms)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def index(self, atom: str) -> int:
        try:
            return self.atoms.index(atom)
        except ValueError:
            raise SignatureError(f"atom {atom!r} not in signature {self}") from None

    def worlds(self) -> range:
        return range(self.size)

    def as_set(self) -> frozenset[str]:
        return frozenset(self.atoms)

    def issubset(self, other: Signature) -> bool:
        return self.as_set() <= other.as_set()

    def same_atoms(self, other: Signature) -> bool:
        return self.as_set() == other.as_set()

    def restrict(self, atoms: Iterable[str]) -> Signature:
        """Subsignature keeping this signature's atom order."""
        keep = set(atoms)
        missing = keep - self.as_set()
        if missing:
            raise SignatureError(f"atoms {sorted(missing)} not in signature {self}")
        return Signature(tuple(a for a in self.atoms if a in keep))

    def without(self, atoms: Iterable[str]) -> Signature:
        drop = set(atoms)
        return Signature(tuple(a for a in self.atoms if a not in drop))

    def union(self, other: Signature | Iterable[str]) -> Signature:
        extra = tuple(a for a in other if a not in self.atoms)
        return Signature(self.atoms + extra)

    def subsignatures(self, nonempty: bool = True) -> Iterator[Signature]:
        """All subsignatures by increasing size, then lexicographic by index."""
        for k in range(1 if nonempty else 0, len(self.atoms) + 1):
            for combo in combinations(self.atoms, k):
                yield Signature(combo)


def world_bits(w: int, sig: Signature) -> tuple[bool, ...]:
    return tuple(bool(w >> i & 1) for i in range(len(sig)))


def world_sort_key(w: int, sig: Signature) -> tuple[bool, ...]:
    """Signature order with positive literals first: ``a b`` < ``a !b`` < ``!a b``."""
    return tuple(not bit for bit in world_bits(w, sig))


def sorted_worlds(worlds: Iterable[int], sig: Signature) -> list[int]:
    return sorted(worlds, key=lambda w: world_sort_key(w, sig))


def format_world(w: int, sig: Signature) -> str:
    if not len(sig):
        return "top"
    return " ".join(a if w >> i & 1 else "!" + a for i, a in enumerate(sig.atoms))


def parse_world(text: str, sig: Signature) -> int:
    """Parse a complete conjunction of literals such as ``a !b c``."""
    tokens = text.replace("&", " ").split()
    if not len(sig):
        if tokens in ([], ["top"]):
            return 0
        raise ParseError(f"world {text!r} over the empty signature must be 'top'")
    w = 0
    seen: set[str] = set()
    for tok in tokens:
        positive = not tok.startswith("!")
        atom = tok.lstrip("!")
        if tok.count("!") > 1 or not ATOM_RE.fullmatch(atom):
            raise ParseError(f"bad literal {tok!r} in world {text!r}")
        if atom not in sig:
            raise UnknownAtomError(atom)
        if atom in seen:
            raise ParseError(f"atom {atom!r} repeated in world {text!r}")
        seen.add(atom)
        if positive:
            w |= 1 << sig.index(atom)
    if len(seen) != len(sig):
        raise ParseError(f"world {text!r} does not assign every atom of {sig}")
    return w


def project_world(w: int, sig: Signature, subsig: Signature) -> int:
    """Restriction ``w^subsig`` of a world over ``sig``."""
    out = 0
    for j, atom in enumerate(subsig.atoms):
        if w >> sig.index(atom) & 1:
            out |= 1 << j
    return out


@lru_cache(maxsize=4096)
def _projection_table(sig: Signature, subsig: Signature) -> tuple[int, ...]:
    if not subsig.issubset(sig):
        raise SignatureError(f"{subsig} is not a subsignature of {sig}")
    return tuple(project_world(w, sig, subsig) for w in sig.worlds())


def projection_table(sig: Signature, subsig: Signature) -> tuple[int, ...]:
    """``table[w]`` is the restriction of world ``w`` to ``subsig``."""
    return _projection_table(sig, subsig)


# ---------------------------------------------------------------------------
# World sets (model sets)


def mask_of_worlds(worlds: Iterable[int]) -> int:
    m = 0
    for w in worlds:
        m |= 1 << w
    return m


def worlds_of_mask(mask: int) -> tuple[int, ...]:
    out = []
    w = 0
    while mask:
        if mask & 1:
            out.append(w)
        mask >>= 1
        w += 1
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _marginalize_mask(mask: int, sig: Signature, subsig: Signature) -> int:
    table = _projection_table(sig, subsig)
    out = 0
    for w in worlds_of_mask(mask):
        out |= 1 << table[w]
    return out


@lru_cache(maxsize=1 << 16)
def _lift_mask(mask: int, subsig: Signature, sig: Signature) -> int:
    table = _projection_table(sig, subsig)
    out = 0
    for w, p in enumerate(table):
        if mask >> p & 1:
            out |= 1 << w
    return out


@dataclass(frozen=True, slots=True)
class WorldSet:
    """A set of worlds over a signature."""

    signature: Signature
    mask: int

    def __post_init__(self) -> None:
        if self.mask < 0 or self.mask >> self.signature.size:
            raise SignatureError(f"mask {self.mask:#x} out of range for {self.signature}")

    @classmethod
    def of(cls, sig: Signature, worlds: Iterable[int]) -> WorldSet:
        return cls(sig, mask_of_worlds(worlds))

    @classmethod
    def full(cls, sig: Signature) -> WorldSet:
        return cls(sig, sig.full_mask)

    @classmethod
    def empty(cls, sig: Signature) -> WorldSet:
        return cls(sig, 0)

    @property
    def worlds(self) -> tuple[int, ...]:
        return worlds_of_mask(self.mask)

    def __iter__(self) -> Iterator[int]:
        return iter(self.worlds)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, w: object) -> bool:
        return isinstance(w, int) and w >= 0 and bool(self.mask >> w & 1)

    def _same(self, other: WorldSet) -> None:
        if self.signature != other.signature:
            raise SignatureError(f"signature mismatch: {self.signature} vs {other.signature}")

    def issubset(self, other: WorldSet) -> bool:
        self._same(other)
        return self.mask & ~other.mask == 0

    def __and__(self, other: WorldSet) -> WorldSet:
        self._same(other)
        return WorldSet(self.signature, self.mask & other.mask)

    def __or__(self, other: WorldSet) -> WorldSet:
        self._same(other)
        return WorldSet(self.signature, self.mask | other.mask)

    def complement(self) -> WorldSet:
        return WorldSet(self.signature, self.signature.full_mask & ~self.mask)

    def is_empty(self) -> bool:
        return self.mask == 0

    def is_full(self) -> bool:
        return self.mask == self.signature.full_mask

    def is_contingent(self) -> bool:
        return not self.is_empty() and not self.is_full()

    def __str__(self) -> str:
        body = ", ".join(format_world(w, self.signature) for w in sorted_worlds(self.worlds, self.signature))
        return "{" + body + "}"


def marginalize_worlds(m: WorldSet, subsig: Signature) -> WorldSet:
    """``m↓subsig``: restrictions of the worlds in ``m``."""
    return WorldSet(subsig, _marginalize_mask(m.mask, m.signature, subsig))


def lift_worlds(m: WorldSet, supersig: Signature) -> WorldSet:
    """``m↑supersig``: all worlds over ``supersig`` whose restriction lies in ``m``."""
    return WorldSet(supersig, _lift_mask(m.mask, m.signature, supersig))


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True, slots=True)
class Top:
    pass


@dataclass(frozen=True, slots=True)
class Bot:
    pass


@dataclass(frozen=True, slots=True)
class Atom:
    name: str


@dataclass(frozen=True, slots=True)
class Not:
    arg: Formula


@dataclass(frozen=True, slots=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Iff:
    left: Formula
    right: Formula


Formula = Union[Top, Bot, Atom, Not, And, Or, Implies, Iff]
TOP = Top()
BOT = Bot()

_BINARY = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}


def atoms_of(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset({f.name})
    if isinstance(f, (Top, Bot)):
        return frozenset()
    if isinstance(f, Not):
        return atoms_of(f.arg)
    return atoms_of(f.left) | atoms_of(f.right)


def _ordered_atoms(f: Formula) -> list[str]:
    seen: list[str] = []

    def walk(g: Formula) -> None:
        if isinstance(g, Atom):
            if g.name not in seen:
                seen.append(g.name)
        elif isinstance(g, Not):
            walk(g.arg)
        elif not isinstance(g, (Top, Bot)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return seen


def to_text(f: Formula) -> str:
    """Render with minimal parentheses; ``parse_formula(to_text(f))`` returns ``f``."""
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        inner = to_text(f.arg)
        return "!" + (inner if isinstance(f.arg, (Top, Bot, Atom, Not)) else f"({inner})")
    prec = _PREC[type(f)]
    left, right = to_text(f.left), to_text(f.right)
    lp = _PREC.get(type(f.left), 99)
    rp = _PREC.get(type(f.right), 99)
    right_assoc = isinstance(f, Implies)
    if lp < prec or (lp == prec and right_assoc):
        left = f"({left})"
    if rp < prec or (rp == prec and not right_assoc):
        right = f"({right})"
    return f"{left} {_BINARY[type(f)]} {right}"


_TOKEN_RE = re.compile(r"\s*(?:(<->|->|[()!&|])|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        if m.group(1):
            tokens.append(("op", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("id", m.group(2), m.start(2)))
        elif m.group(3):
            raise ParseError(f"unexpected character {m.group(3)!r}", m.start(3))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = sig

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {value!r}, found {found}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", pos)
        return f

    def iff(self) -> Formula:
        f = self.imp()
        while self.peek()[1] == "<->":
            self.take()
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.neg()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.neg())
        return f

    def neg(self) -> Formula:
        kind, value, pos = self.peek()
        if value == "!":
            self.take()
            return Not(self.neg())
        if value == "(":
            self.take()
            f = self.iff()
            self.take(")")
            return f
        if kind == "id":
            self.take()
            if value == "top":
                return TOP
            if value == "bot":
                return BOT
            if not ATOM_RE.fullmatch(value):
                raise ParseError(f"invalid atom name {value!r}", pos)
            if self.sig is not None and value not in self.sig:
                raise UnknownAtomError(value, pos)
            return Atom(value)
        found = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"expected a formula, found {found}", pos)


def parse_formula(text: str, sig: Signature | None = None) -> Formula:
    """Parse ``text``; with ``sig`` given, every atom must belong to it."""
    return _Parser(text, sig).parse()


@lru_cache(maxsize=1 << 16)
def _mask(f: Formula, sig: Signature) -> int:
    full = sig.full_mask
    if isinstance(f, Top):
        return full
    if isinstance(f, Bot):
        return 0
    if isinstance(f, Atom):
        i = sig.index(f.name)
        return mask_of_worlds(w for w in sig.worlds() if w >> i & 1)
    if isinstance(f, Not):
        return full & ~_mask(f.arg, sig)
    left, right = _mask(f.left, sig), _mask(f.right, sig)
    if isinstance(f, And):
        return left & right
    if isinstance(f, Or):
        return left | right
    if isinstance(f, Implies):
        return (full & ~left) | right
    if isinstance(f, Iff):
        return full & ~(left ^ right)
    raise TypeError(f"not a formula: {f!r}")


def models(f: Formula, sig: Signature) -> WorldSet:
    """``Mod_sig(f)``."""
    missing = atoms_of(f) - sig.as_set()
    if missing:
        raise UnknownAtomError(sorted(missing)[0])
    return WorldSet(sig, _mask(f, sig))


Prop = Union[Formula, WorldSet]


def as_worlds(a: Prop, sig: Signature) -> WorldSet:
    """Model set of ``a`` over ``sig``; world sets over a subsignature are lifted."""
    if isinstance(a, WorldSet):
        if a.signature == sig:
            return a
        if a.signature.issubset(sig):
            return lift_worlds(a, sig)
        raise SignatureError(f"world set over {a.signature} does not fit {sig}")
    return models(a, sig)


def entails(f: Formula, g: Formula, sig: Signature | None = None) -> bool:
    if sig is None:
        sig = Signature(tuple(sorted(atoms_of(f) | atoms_of(g))))
    return models(f, sig).issubset(models(g, sig))


def equivalent(f: Formula, g: Formula, sig: Signature | None = None) -> bool:
    if sig is None:
        sig = Signature(tuple(sorted(atoms_of(f) | atoms_of(g))))
    return models(f, sig) == models(g, sig)


@lru_cache(maxsize=1 << 16)
def _sigmin_mask(mask: int, sig: Signature) -> tuple[str, ...]:
    relevant = []
    for i, atom in enumerate(sig.atoms):
        flipped = mask_of_worlds(w ^ (1 << i) for w in worlds_of_mask(mask))
        if flipped != mask:
            relevant.append(atom)
    return tuple(relevant)


def sigmin_worlds(m: WorldSet) -> Signature:
    """Atoms on which membership in ``m`` depends, in signature order."""
    return Signature(_sigmin_mask(m.mask, m.signature))


def sigmin(f: Prop, sig: Signature | None = None) -> frozenset[str]:
    """Minimal signature of ``f``: atoms whose toggle changes some world's membership."""
    if isinstance(f, WorldSet):
        return sigmin_worlds(f).as_set()
    if sig is None:
        sig = Signature(tuple(_ordered_atoms(f)))
    return sigmin_worlds(models(f, sig)).as_set()


def substitute(f: Formula, atom: str, value: Formula) -> Formula:
    if isinstance(f, Atom):
        return value if f.name == atom else f
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.arg, atom, value))
    return type(f)(substitute(f.left, atom, value), substitute(f.right, atom, value))


def forget_var(f: Formula, atoms: Iterable[str], sig: Signature | None = None) -> Formula:
    """Variable elimination: ``forget(f, x) = f[x/top] | f[x/bot]``, one atom at a time.

    Atoms are processed in ``sig`` order when given, otherwise in order of
    first occurrence in ``f``. Atoms not occurring in ``f`` are skipped.
    """
    wanted = set(atoms)
    present = _ordered_atoms(f)
    order = [a for a in (sig.atoms if sig is not None else present) if a in wanted and a in present]
    for atom in order:
        f = Or(substitute(f, atom, TOP), substitute(f, atom, BOT))
    return f


def world_formula(w: int, sig: Signature) -> Formula:
    literals: list[Formula] = [Atom(a) if w >> i & 1 else Not(Atom(a)) for i, a in enumerate(sig.atoms)]
    if not literals:
        return TOP
    f = literals[0]
    for lit in literals[1:]:
        f = And(f, lit)
    return f


def dnf(m: WorldSet) -> Formula:
    """Canonical DNF of a model set: one full minterm per world, worlds in signature order."""
    if m.is_empty():
        return BOT
    if m.is_full():
        return TOP
    terms = [world_formula(w, m.signature) for w in sorted_worlds(m.worlds, m.signature)]
    f = terms[0]
    for t in terms[1:]:
        f = Or(f, t)
    return f


def cnf(m: WorldSet) -> Formula:
    """Canonical CNF of a model set: one full clause per countermodel."""
    if m.is_empty():
        return BOT
    if m.is_full():
        return TOP
    sig = m.signature
    clauses: list[Formula] = []
    for w in sorted_worlds(m.complement().worlds, sig):
        lits: list[Formula] = [Not(Atom(a)) if w >> i & 1 else Atom(a) for i, a in enumerate(sig.atoms)]
        c = lits[0]
        for lit in lits[1:]:
            c = Or(c, lit)
        clauses.append(c)
    f = clauses[0]
    for c in clauses[1:]:
        f = And(f, c)
    return f


def contingent_world_sets(sig: Signature) -> list[WorldSet]:
    """All contingent propositions over ``sig``, ordered by mask."""
    return [WorldSet(sig, m) for m in range(1, sig.full_mask)]


def canonical_formulas(sig: Signature, contingent: bool = True) -> list[Formula]:
    """One canonical DNF per proposition over ``sig`` (14 contingent ones at two atoms)."""
    masks = range(1, sig.full_mask) if contingent else range(sig.full_mask + 1)
    return [dnf(WorldSet(sig, m)) for m in masks]


def syntactic_variants(f: Formula, sig: Signature) -> list[Formula]:
    """Distinct equivalent rewritings of ``f`` used for syntax-independence checks."""
    m = models(f, sig)
    out: list[Formula] = []
    for g in (f, dnf(m), cnf(m), Not(Not(f)), And(f, TOP), Or(f, BOT)):
        if g not in out:
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# Belief sets


@dataclass(frozen=True, slots=True)
class BeliefSet:
    """A deductively closed belief set, ``Cn_sig`` of a model set.

    Comparisons follow formula-set semantics: a belief set over a smaller
    signature holds fewer formulas, so inclusion needs signature inclusion.
    """

    signature: Signature
    models: WorldSet

    def __post_init__(self) -> None:
        if self.models.signature != self.signature:
            raise SignatureError("belief set signature must match its model set")

    @classmethod
    def of(cls, models_: WorldSet) -> BeliefSet:
        return cls(models_.signature, models_)

    def contains(self, a: Prop) -> bool:
        """``a ∈ Cn_sig(models)``; formulas outside the language are not members."""
        m = a if isinstance(a, WorldSet) else models(a, Signature(tuple(_ordered_atoms(a))))
        core = sigmin_worlds(m)
        if not core.issubset(self.signature):
            return False
        return self.models.issubset(lift_worlds(marginalize_worlds(m, core), self.signature))

    def issubset(self, other: BeliefSet) -> bool:
        """Formula-set inclusion ``self ⊆ other``."""
        if not self.signature.issubset(other.signature):
            return False
        projected = marginalize_worlds(other.models, self.signature)
        return projected.issubset(self.models)

    def same(self, other: BeliefSet) -> bool:
        """Formula-set equality (``==`` on the dataclass is stricter about atom order)."""
        return self.signature.same_atoms(other.signature) and self.issubset(other) and other.issubset(self)

    def intersect(self, other: BeliefSet) -> BeliefSet:
        common = self.signature.restrict(a for a in self.signature if a in other.signature)
        m = marginalize_worlds(self.models, common) | marginalize_worlds(other.models, common)
        return BeliefSet(common, m)

    def marginalize(self, subsig: Signature) -> BeliefSet:
        """``Bel↓subsig``: the formulas over ``subsig`` that are believed."""
        return BeliefSet(subsig, marginalize_worlds(self.models, subsig))

    def lifted(self, supersig: Signature) -> WorldSet:
        """Models over ``supersig`` of the formulas in this belief set."""
        return lift_worlds(self.models, supersig)

    def expand(self, a: Prop, sig: Signature) -> BeliefSet:
        """``Cn_sig(self ∪ {a})``."""
        return BeliefSet(sig, self.lifted(sig) & as_worlds(a, sig))

    def cn_subset(self, other: BeliefSet, sig: Signature) -> bool:
        """``Cn_sig(self) ⊆ Cn_sig(other)``: reverse inclusion of lifted model sets."""
        return other.lifted(sig).issubset(self.lifted(sig))

    def to_formula(self) -> Formula:
        return dnf(self.models)

    def __str__(self) -> str:
        return to_text(self.to_formula())
