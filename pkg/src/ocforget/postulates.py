"""Forgetting postulates as executable predicates over an operator and an instance.

Each postulate has a generic form stated on belief sets and OCF entailment.
Where an OCF characterization exists it is available as a second, rank-level
form; ``check(..., mode="both")`` evaluates both and insists they agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Iterator

from .forgetting import DomainError, ForgettingOperator, Kind, forget
from .logic import (
    BeliefSet,
    Prop,
    Signature,
    WorldSet,
    as_worlds,
    dnf,
    format_world,
    marginalize_worlds,
    projection_table,
    sigmin_worlds,
    to_text,
)
from .ocf import (
    INFINITY,
    OCFError,
    RankingFunction,
    bel,
    format_ocf,
    format_rank,
    marginalize_ocf,
    ocf_entails,
    ocf_equiv,
    scale,
)

AGM = ("AGM1", "AGM2", "AGM3", "AGM4", "AGM5", "AGM6", "AGM7", "CF")
ASP = ("W", "wC_S", "sC_S", "CP_S", "wE", "E", "BE", "EBE", "OI")
PERSISTENCE = ("PP", "NP", "PPcond", "NPcond", "EP", "BP")
POSTULATES = AGM + ASP + PERSISTENCE + ("LEocf",)

UNARY = ("AGM1", "AGM2", "AGM3", "AGM4", "W", "wC_S", "sC_S", "CP_S", "LEocf")
FORMULA_PAIR = ("AGM5", "AGM6", "AGM7", "CF", "OI")
STATE_PAIR = ("wE", "E", "BE")
STATE_FORMULA_PAIR = ("EBE",)
SPLIT = PERSISTENCE

CHARACTERIZED_AGM = AGM
CHARACTERIZED_ASP = ("W", "wC_S", "sC_S", "CP_S", "wE", "BE", "EBE")
CHARACTERIZED = CHARACTERIZED_AGM + CHARACTERIZED_ASP

MODES = ("generic", "characterized", "both")


class PreconditionError(ValueError):
    """The instance does not fit the postulate or the requested form is not admissible."""


class ArityError(PreconditionError):
    """An instance lacks a field the postulate quantifies over."""


class DualFormMismatch(AssertionError):
    """Generic and characterized forms disagree on an instance."""


@dataclass(frozen=True)
class Instance:
    """Values for the variables a postulate quantifies over."""

    k: RankingFunction
    a: Prop
    k2: RankingFunction | None = None
    c: Prop | None = None
    split: tuple[Signature, Signature] | None = None
    kprime: RankingFunction | None = None
    q: Fraction | int | None = None


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Instance | None = None
    explanation: str = ""
    detail: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.holds == (self.witness is not None):
            raise ValueError("a witness is present exactly when the postulate is violated")


def _ok() -> Verdict:
    return Verdict(True)


def _fail(inst: Instance, explanation: str, **detail: object) -> Verdict:
    return Verdict(False, inst, explanation, dict(detail))


# ---------------------------------------------------------------------------
# Helpers


@lru_cache(maxsize=1 << 18)
def _forget_cached(op: ForgettingOperator, k: RankingFunction, a: WorldSet) -> RankingFunction:
    return forget(op, k, a)


def apply(op: ForgettingOperator, k: RankingFunction, a: Prop) -> RankingFunction:
    """``κ ∘ A`` with memoization; undefined results raise ``PreconditionError``."""
    if isinstance(a, WorldSet):
        m = a
    elif op.kind is Kind.MARGINALIZATION:
        try:
            m = as_worlds(a, k.signature)
        except ValueError:
            return forget(op, k, a)
    else:
        m = as_worlds(a, k.signature)
    try:
        return _forget_cached(op, k, m)
    except (DomainError, OCFError) as exc:
        raise PreconditionError(f"{op} is undefined here: {exc}") from None


def clear_cache() -> None:
    _forget_cached.cache_clear()


def _show(a: Prop) -> str:
    """A proposition as DNF over its minimal signature."""
    if not isinstance(a, WorldSet):
        return to_text(a)
    return to_text(dnf(marginalize_worlds(a, sigmin_worlds(a))))


def _worlds_text(m: WorldSet) -> str:
    return str(m)


def _zero(k: RankingFunction) -> WorldSet:
    return WorldSet(k.signature, k.zero_mask())


def _same_bel(k1: RankingFunction, k2: RankingFunction) -> bool:
    return bel(k1).same(bel(k2))


def _require(inst: Instance, p: str, *fields_: str) -> None:
    missing = [f for f in fields_ if getattr(inst, f) is None]
    if missing:
        raise ArityError(f"{p} needs instance fields {', '.join(missing)}")


def _contingent(inst: Instance, a: Prop, p: str) -> WorldSet:
    m = as_worlds(a, inst.k.signature)
    if not m.is_contingent():
        raise PreconditionError(f"{p} is evaluated on contingent propositions only")
    return m


def _rank_in(k: RankingFunction, w: int, sig: Signature) -> float:
    """``κ(ω^sig(κ))`` for a world ``w`` over ``sig ⊇ sig(κ)``."""
    if k.signature == sig:
        return k.ranks[w]
    return k.ranks[projection_table(sig, k.signature)[w]]


def _subset_ranks(k: RankingFunction) -> list[float]:
    """Rank of every proposition over ``sig(κ)``, indexed by model mask."""
    n = k.signature.size
    table = [INFINITY] * (1 << n)
    for m in range(1, 1 << n):
        low = m & -m
        w = low.bit_length() - 1
        table[m] = min(table[m ^ low], k.ranks[w])
    return table


def first_gained_conditional(strong: RankingFunction, weak: RankingFunction) -> tuple[WorldSet, WorldSet] | None:
    """A conditional ``(B|A)`` over ``sig(weak)`` accepted by ``weak`` but not by ``strong``.

    ``strong`` lives over a supersignature of ``sig(weak)``. Candidates are
    tried simplest first: fewer atoms in ``A``, then in ``B``, then by mask.
    """
    sig = weak.signature
    base = marginalize_ocf(strong, sig, allow_empty=True) if strong.signature != sig else strong
    rw, rs = _subset_ranks(weak), _subset_ranks(base)
    full = sig.full_mask
    masks = sorted(range(full + 1), key=lambda m: (len(sigmin_worlds(WorldSet(sig, m))), m))
    for am in masks:
        for bm in masks:
            yes, no = am & bm, am & (full & ~bm)
            if rw[yes] < rw[no] and not rs[yes] < rs[no]:
                return WorldSet(sig, am), WorldSet(sig, bm)
    return None


def _conditional_text(pair: tuple[WorldSet, WorldSet]) -> str:
    a, b = pair
    return f"({_show(b)}|{_show(a)})"


def dense_ocfs(sig: Signature) -> Iterator[RankingFunction]:
    """One OCF per total preorder on the worlds of ``sig`` (ranks without gaps)."""
    n = sig.size
    for ranks in product(range(n), repeat=n):
        used = set(ranks)
        if used == set(range(len(used))):
            yield RankingFunction(sig, ranks)


@lru_cache(maxsize=None)
def _dense_ocfs_cached(sig: Signature) -> tuple[RankingFunction, ...]:
    return tuple(dense_ocfs(sig))


def _split(inst: Instance, p: str) -> tuple[Signature, Signature]:
    if inst.split is None:
        sig = inst.k.signature
        core = sigmin_worlds(as_worlds(inst.a, sig))
        return sig.without(core.atoms), core
    s1, s2 = inst.split
    sig = inst.k.signature
    if s1.as_set() & s2.as_set() or (s1.as_set() | s2.as_set()) != sig.as_set():
        raise PreconditionError(f"{p}: split {s1} | {s2} is not a partition of {sig}")
    return sig.restrict(s1.atoms), sig.restrict(s2.atoms)


def _split_applies(inst: Instance, p: str) -> tuple[Signature, Signature] | None:
    """The split if its premise ``A ∈ L_Σ2`` holds and ``Σ1`` is nonempty."""
    s1, s2 = _split(inst, p)
    core = sigmin_worlds(as_worlds(inst.a, inst.k.signature))
    if not core.issubset(s2) or not len(s1):
        return None
    return s1, s2


# ---------------------------------------------------------------------------
# AGM-inspired postulates


def _agm1(op, inst, characterized):
    k, post = inst.k, apply(op, inst.k, inst.a)
    if characterized:
        for w in k.signature.worlds():
            if k.ranks[w] == 0 and post.ranks[w] != 0:
                return _fail(inst, f"κ({format_world(w, k.signature)}) = 0 but κ∘A = {format_rank(post.ranks[w])}")
        return _ok()
    if bel(post).issubset(bel(k)):
        return _ok()
    return _fail(inst, f"Bel(κ∘A) = Cn({bel(post)}) is not contained in Bel(κ) = Cn({bel(k)})")


def _agm2(op, inst, characterized):
    k = inst.k
    m = as_worlds(inst.a, k.signature)
    post = apply(op, k, inst.a)
    if characterized:
        if k.rank_of_mask(m.complement().mask) != 0:
            return _ok()
        for w in k.signature.worlds():
            if post.ranks[w] == 0 and k.ranks[w] != 0:
                return _fail(inst, f"κ(¬A) = 0 and (κ∘A)({format_world(w, k.signature)}) = 0 but κ = {k.ranks[w]}")
        return _ok()
    if bel(k).contains(m):
        return _ok()
    if bel(k).issubset(bel(post)):
        return _ok()
    return _fail(inst, f"A ∉ Bel(κ) but Bel(κ) = Cn({bel(k)}) is not contained in Bel(κ∘A) = Cn({bel(post)})")


def _agm3(op, inst, characterized):
    k = inst.k
    m = as_worlds(inst.a, k.signature)
    if m.is_full():
        return _ok()
    post = apply(op, k, inst.a)
    if characterized:
        if post.rank_of_mask(m.complement().mask) == 0:
            return _ok()
        return _fail(inst, "(κ∘A)(¬A) > 0")
    if not bel(post).contains(m):
        return _ok()
    return _fail(inst, f"A is still believed: Bel(κ∘A) = Cn({bel(post)})")


def _agm4(op, inst, characterized):
    k = inst.k
    sig = k.signature
    m = as_worlds(inst.a, sig)
    post = apply(op, k, inst.a)
    if characterized:
        for w in m.worlds:
            if k.ranks[w] > 0 and post.ranks[w] == 0:
                return _fail(inst, f"{format_world(w, sig)} ⊨ A has κ = {format_rank(k.ranks[w])} but κ∘A = 0")
        return _ok()
    if bel(k).issubset(bel(post).expand(m, sig)):
        return _ok()
    return _fail(inst, f"Bel(κ) = Cn({bel(k)}) ⊄ Cn(Bel(κ∘A) ∪ {{A}})")


def _agm5(op, inst, characterized):
    k = inst.k
    if as_worlds(inst.a, k.signature) != as_worlds(inst.c, k.signature):
        return _ok()
    pa, pc = apply(op, k, inst.a), apply(op, k, inst.c)
    if characterized:
        same = pa.zero_mask() == pc.zero_mask()
    else:
        same = _same_bel(pa, pc)
    if same:
        return _ok()
    return _fail(inst, f"A ≡ C but Bel(κ∘A) = Cn({bel(pa)}) differs from Bel(κ∘C) = Cn({bel(pc)})")


def _conj(inst: Instance) -> WorldSet:
    sig = inst.k.signature
    return as_worlds(inst.a, sig) & as_worlds(inst.c, sig)


def _binary_results(op, inst):
    k = inst.k
    ac = _conj(inst)
    if not ac.is_contingent():
        raise PreconditionError("A ∧ C must be contingent")
    return apply(op, k, inst.a), apply(op, k, inst.c), apply(op, k, ac), ac


def _agm6(op, inst, characterized):
    pa, pc, pac, _ = _binary_results(op, inst)
    if characterized:
        for w in inst.k.signature.worlds():
            if pac.ranks[w] == 0 and pa.ranks[w] != 0 and pc.ranks[w] != 0:
                return _fail(inst, f"(κ∘(A∧C))({format_world(w, inst.k.signature)}) = 0 but κ∘A, κ∘C are positive")
        return _ok()
    if bel(pa).intersect(bel(pc)).issubset(bel(pac)):
        return _ok()
    return _fail(inst, f"Bel(κ∘A) ∩ Bel(κ∘C) ⊄ Bel(κ∘(A∧C)) = Cn({bel(pac)})")


def _agm7(op, inst, characterized):
    pa, _, pac, ac = _binary_results(op, inst)
    sig = inst.k.signature
    ma = as_worlds(inst.a, sig)
    if characterized:
        if pac.rank_of_mask(ma.complement().mask) != 0:
            return _ok()
        for w in sig.worlds():
            if pa.ranks[w] == 0 and pac.ranks[w] != 0:
                return _fail(inst, f"(κ∘A)({format_world(w, sig)}) = 0 but κ∘(A∧C) is positive there")
        return _ok()
    if bel(pac).contains(ma):
        return _ok()
    if bel(pac).issubset(bel(pa)):
        return _ok()
    return _fail(inst, f"A ∉ Bel(κ∘(A∧C)) but Bel(κ∘(A∧C)) = Cn({bel(pac)}) ⊄ Bel(κ∘A) = Cn({bel(pa)})")


def _cf(op, inst, characterized):
    pa, pc, pac, _ = _binary_results(op, inst)
    if characterized:
        za, zc, zac = pa.zero_mask(), pc.zero_mask(), pac.zero_mask()
        ok = zac in (za, zc, za | zc)
    else:
        x, y, z = bel(pa), bel(pc), bel(pac)
        ok = z.same(x) or z.same(y) or z.same(x.intersect(y))
    if ok:
        return _ok()
    return _fail(inst, f"Bel(κ∘(A∧C)) = Cn({bel(pac)}) is none of Bel(κ∘A), Bel(κ∘C), their intersection")


# ---------------------------------------------------------------------------
# ASP-inspired postulates


def _w(op, inst, characterized):
    k = inst.k
    post = apply(op, k, inst.a)
    if characterized:
        sig = post.signature
        base = marginalize_ocf(k, sig, allow_empty=True) if k.signature != sig else k
        rk, rp = _subset_ranks(base), _subset_ranks(post)
        full = sig.full_mask
        for am in range(full + 1):
            for bm in range(full + 1):
                yes, no = am & bm, am & (full & ~bm)
                if rp[yes] < rp[no] and not rk[yes] < rk[no]:
                    pair = (WorldSet(sig, am), WorldSet(sig, bm))
                    return _fail(inst, f"κ∘A accepts {_conditional_text(pair)} but κ does not")
        return _ok()
    if ocf_entails(k, post):
        return _ok()
    pair = first_gained_conditional(k, post)
    text = _conditional_text(pair) if pair else "a conditional"
    return _fail(inst, f"κ∘A accepts {text} but κ does not", conditional=text)


def _bel_residue(k: RankingFunction, m: WorldSet) -> BeliefSet:
    """``Bel(κ)↓(Σ ∖ sigmin(A))``."""
    return bel(k).marginalize(k.signature.without(sigmin_worlds(m).atoms))


def _wc(op, inst, characterized):
    return _consequence(op, inst, characterized, weak=True)


def _sc(op, inst, characterized):
    return _consequence(op, inst, characterized, weak=False)


def _cp(op, inst, characterized):
    first = _consequence(op, inst, characterized, weak=True)
    if not first.holds:
        return first
    return _consequence(op, inst, characterized, weak=False)


def _consequence(op, inst, characterized, weak):
    k = inst.k
    sig = k.signature
    m = as_worlds(inst.a, sig)
    post = apply(op, k, inst.a)
    sub = sig.without(sigmin_worlds(m).atoms)
    name = "wC_S" if weak else "sC_S"
    if characterized:
        kres = marginalize_ocf(k, sub, allow_empty=True)
        for w in sig.worlds():
            r_post = _rank_in(post, w, sig)
            r_res = _rank_in(kres, w, sig)
            lhs, rhs = (r_post, r_res) if weak else (r_res, r_post)
            if lhs == 0 and rhs != 0:
                return _fail(inst, f"{name}: at {format_world(w, sig)} the ranks are "
                                   f"κ∘A = {format_rank(r_post)}, κ↓ = {format_rank(r_res)}")
        return _ok()
    residue = _bel_residue(k, m)
    ok = residue.cn_subset(bel(post), sig) if weak else bel(post).cn_subset(residue, sig)
    if ok:
        return _ok()
    return _fail(inst, f"{name}: Bel(κ)↓ = Cn({residue}) and Bel(κ∘A) = Cn({bel(post)}) are not related as required")


def _we(op, inst, characterized):
    k1, k2 = inst.k, inst.k2
    if characterized:
        if k1.zero_mask() != k2.zero_mask():
            return _ok()
    elif not _same_bel(k1, k2):
        return _ok()
    p1, p2 = apply(op, k1, inst.a), apply(op, k2, inst.a)
    same = p1.zero_mask() == p2.zero_mask() if characterized else _same_bel(p1, p2)
    if same:
        return _ok()
    return _fail(inst, f"Bel(κ1) = Bel(κ2) but Bel(κ1∘A) = Cn({bel(p1)}) and Bel(κ2∘A) = Cn({bel(p2)})")


def _e(op, inst, characterized):
    k1, k2 = inst.k, inst.k2
    if not ocf_equiv(k1, k2):
        return _ok()
    p1, p2 = apply(op, k1, inst.a), apply(op, k2, inst.a)
    if ocf_equiv(p1, p2):
        return _ok()
    pair = first_gained_conditional(p1, p2) or first_gained_conditional(p2, p1)
    text = _conditional_text(pair) if pair else "some conditional"
    return _fail(inst, f"κ1 ≅ κ2 but κ1∘A and κ2∘A disagree on {text}", conditional=text)


def _be(op, inst, characterized):
    k1, k2 = inst.k, inst.k2
    if not ocf_equiv(k1, k2):
        return _ok()
    p1, p2 = apply(op, k1, inst.a), apply(op, k2, inst.a)
    same = p1.zero_mask() == p2.zero_mask() if characterized else _same_bel(p1, p2)
    if same:
        return _ok()
    return _fail(inst, f"κ1 ≅ κ2 but Bel(κ1∘A) = Cn({bel(p1)}) and Bel(κ2∘A) = Cn({bel(p2)})")


def _ebe(op, inst, characterized):
    k1, k2 = inst.k, inst.k2
    sig = k1.signature
    if as_worlds(inst.a, sig) != as_worlds(inst.c, sig) or not ocf_equiv(k1, k2):
        return _ok()
    p1, p2 = apply(op, k1, inst.a), apply(op, k2, inst.c)
    same = p1.zero_mask() == p2.zero_mask() if characterized else _same_bel(p1, p2)
    if same:
        return _ok()
    return _fail(inst, f"κ1 ≅ κ2, A ≡ C but Bel(κ1∘A) = Cn({bel(p1)}) and Bel(κ2∘C) = Cn({bel(p2)})")


def _second(op: ForgettingOperator, k: RankingFunction, first: RankingFunction, b: Prop) -> RankingFunction:
    """Forget ``b`` from an already forgotten state; ``b`` is read over ``sig(κ)``."""
    m = as_worlds(b, k.signature)
    return apply(op, first, m)


def _oi(op, inst, characterized):
    k = inst.k
    ab = _second(op, k, apply(op, k, inst.a), inst.c)
    ba = _second(op, k, apply(op, k, inst.c), inst.a)
    if ocf_equiv(ab, ba):
        return _ok()
    return _fail(inst, "(κ∘A)∘C and (κ∘C)∘A are not equivalent",
                 first=format_ocf(ab), second=format_ocf(ba))


# ---------------------------------------------------------------------------
# Persistence postulates


def _kprimes(inst: Instance, s1: Signature) -> Iterator[RankingFunction]:
    if inst.kprime is not None:
        if not inst.kprime.signature.issubset(s1):
            raise PreconditionError(f"κ' must live over a subsignature of {s1}")
        yield inst.kprime
        return
    for sub in s1.subsignatures():
        yield from _dense_ocfs_cached(sub)


def _pp_np(op, inst, characterized, positive):
    split = _split_applies(inst, "PP" if positive else "NP")
    if split is None:
        return _ok()
    s1, _ = split
    k = inst.k
    post = apply(op, k, inst.a)
    for kp in _kprimes(inst, s1):
        before, after = ocf_entails(k, _reorder_like(kp, k)), ocf_entails(post, _reorder_like(kp, post))
        if positive and before and not after:
            return _fail(replace(inst, kprime=kp), "κ ⊨̇ κ' but κ∘A does not", kprime=format_ocf(kp))
        if not positive and not before and after:
            return _fail(replace(inst, kprime=kp), "κ ⊭̇ κ' but κ∘A ⊨̇ κ'", kprime=format_ocf(kp))
    return _ok()


def _reorder_like(kp: RankingFunction, k: RankingFunction) -> RankingFunction:
    """Present ``κ'`` with atoms in ``sig(κ)`` order."""
    sub = k.signature.restrict(kp.signature.atoms)
    return kp if sub == kp.signature else marginalize_ocf(kp, sub)


def _pp(op, inst, characterized):
    return _pp_np(op, inst, characterized, positive=True)


def _np(op, inst, characterized):
    return _pp_np(op, inst, characterized, positive=False)


def _accepted_over(k: RankingFunction, s1: Signature) -> set[tuple[int, int]]:
    r = _subset_ranks(marginalize_ocf(k, s1))
    full = s1.full_mask
    return {(am, bm) for am in range(full + 1) for bm in range(full + 1)
            if r[am & bm] < r[am & (full & ~bm)]}


def _pp_np_cond(op, inst, characterized, positive):
    split = _split_applies(inst, "PPcond" if positive else "NPcond")
    if split is None:
        return _ok()
    s1, _ = split
    post = apply(op, inst.k, inst.a)
    before, after = _accepted_over(inst.k, s1), _accepted_over(post, s1)
    diff = before - after if positive else after - before
    if not diff:
        return _ok()
    am, bm = min(diff, key=lambda p: (len(sigmin_worlds(WorldSet(s1, p[0]))), len(sigmin_worlds(WorldSet(s1, p[1]))), p))
    text = _conditional_text((WorldSet(s1, am), WorldSet(s1, bm)))
    if positive:
        return _fail(inst, f"κ accepts {text} over Σ1 but κ∘A does not")
    return _fail(inst, f"κ∘A accepts {text} over Σ1 but κ does not")


def _ppcond(op, inst, characterized):
    return _pp_np_cond(op, inst, characterized, positive=True)


def _npcond(op, inst, characterized):
    return _pp_np_cond(op, inst, characterized, positive=False)


def _ep(op, inst, characterized):
    split = _split_applies(inst, "EP")
    if split is None:
        return _ok()
    s1, _ = split
    post = apply(op, inst.k, inst.a)
    before, after = marginalize_ocf(inst.k, s1), marginalize_ocf(post, s1)
    if before == after:
        return _ok()
    return _fail(inst, "κ↓Σ1 and (κ∘A)↓Σ1 differ", before=format_ocf(before), after=format_ocf(after))


def _bp(op, inst, characterized):
    split = _split_applies(inst, "BP")
    if split is None:
        return _ok()
    s1, _ = split
    post = apply(op, inst.k, inst.a)
    before, after = bel(inst.k).marginalize(s1), bel(post).marginalize(s1)
    if before.same(after):
        return _ok()
    return _fail(inst, f"Bel(κ)↓Σ1 = Cn({before}) but Bel(κ∘A)↓Σ1 = Cn({after})")


def _le(op, inst, characterized):
    q = Fraction(inst.q if inst.q is not None else 2)
    try:
        scaled = scale(inst.k, q)
    except OCFError as exc:
        raise PreconditionError(str(exc)) from None
    lhs = apply(op, scaled, inst.a)
    try:
        rhs = scale(apply(op, inst.k, inst.a), q)
    except OCFError as exc:
        raise PreconditionError(str(exc)) from None
    if lhs == rhs:
        return _ok()
    return _fail(inst, f"forget({q}·κ, A) differs from {q}·forget(κ, A)", lhs=format_ocf(lhs), rhs=format_ocf(rhs))


_CHECKS: dict[str, Callable[[ForgettingOperator, Instance, bool], Verdict]] = {
    "AGM1": _agm1, "AGM2": _agm2, "AGM3": _agm3, "AGM4": _agm4, "AGM5": _agm5, "AGM6": _agm6,
    "AGM7": _agm7, "CF": _cf, "W": _w, "wC_S": _wc, "sC_S": _sc, "CP_S": _cp, "wE": _we, "E": _e,
    "BE": _be, "EBE": _ebe, "OI": _oi, "PP": _pp, "NP": _np, "PPcond": _ppcond, "NPcond": _npcond,
    "EP": _ep, "BP": _bp, "LEocf": _le,
}

_REQUIRED = {p: ("a",) for p in UNARY}
_REQUIRED.update({p: ("a", "c") for p in FORMULA_PAIR})
_REQUIRED.update({p: ("a", "k2") for p in STATE_PAIR})
_REQUIRED.update({p: ("a", "c", "k2") for p in STATE_FORMULA_PAIR})
_REQUIRED.update({p: ("a",) for p in SPLIT})


def has_characterization(p: str, op: ForgettingOperator) -> bool:
    """Whether ``p`` has a rank-level form admissible for ``op``."""
    if p in CHARACTERIZED_AGM:
        return op.preserves_domain
    return p in CHARACTERIZED_ASP


def _contingency(p: str, inst: Instance) -> None:
    _contingent(inst, inst.a, p)
    if p in ("AGM6", "AGM7", "CF", "OI"):
        _contingent(inst, inst.c, p)
    if inst.k2 is not None and inst.k2.signature != inst.k.signature:
        raise PreconditionError(f"{p}: both states must share a signature")


def check(p: str, op: ForgettingOperator, inst: Instance, mode: str = "generic") -> Verdict:
    """Evaluate postulate ``p`` for operator ``op`` on ``inst``."""
    if p not in _CHECKS:
        raise ArityError(f"unknown postulate {p!r}")
    if mode not in MODES:
        raise ArityError(f"unknown mode {mode!r}")
    _require(inst, p, *_REQUIRED[p])
    _contingency(p, inst)
    fn = _CHECKS[p]
    if mode == "generic":
        return fn(op, inst, False)
    if not has_characterization(p, op):
        if mode == "characterized":
            reason = "a domain-preserving operator" if p in CHARACTERIZED_AGM else "an OCF characterization"
            raise PreconditionError(f"the characterized form of {p} needs {reason}")
        return fn(op, inst, False)
    char = fn(op, inst, True)
    if mode == "characterized":
        return char
    gen = fn(op, inst, False)
    if gen.holds != char.holds:
        raise DualFormMismatch(f"{p} for {op}: generic {gen.holds}, characterized {char.holds}")
    return gen


def check_LEocf(op: ForgettingOperator, k: RankingFunction, a: Prop, q: Fraction | int = 2) -> Verdict:
    return check("LEocf", op, Instance(k, a, q=q))


# ---------------------------------------------------------------------------
# Relationships between postulates


RELATIONS = {
    "CP_S<=>wC_S&sC_S": ("unary", lambda v: v["CP_S"] == (v["wC_S"] and v["sC_S"])),
    "CP_S=>BP": ("split", lambda v: not v["CP_S"] or v["BP"]),
    "E=>BE": ("state_pair", lambda v: not v["E"] or v["BE"]),
    "EBE=>BE": ("state_pair", lambda v: not v["EBE"] or v["BE"]),
    "W=>AGM1": ("unary", lambda v: not v["W"] or v["AGM1"]),
    "W=>NP": ("split", lambda v: not v["W"] or v["NP"]),
    "EP=>PP": ("split", lambda v: not v["EP"] or v["PP"]),
    "EP=>NP": ("split", lambda v: not v["EP"] or v["NP"]),
    "EP=>BP": ("split", lambda v: not v["EP"] or v["BP"]),
    "PP<=>PPcond": ("split", lambda v: v["PP"] == v["PPcond"]),
    "NP<=>NPcond": ("split", lambda v: v["NP"] == v["NPcond"]),
    "CF=>AGM6": ("formula_pair", lambda v: not v["CF"] or v["AGM6"]),
}


def relation_postulates(rel: str) -> tuple[str, ...]:
    names = rel.replace("<=>", " ").replace("=>", " ").replace("&", " ").split()
    return tuple(dict.fromkeys(names))


def check_relation(rel: str, op: ForgettingOperator, inst: Instance) -> bool:
    """Instance-level truth of a relationship between postulates.

    State-pair relations read ``EBE`` with ``C = A``; unary postulates inside
    split relations are evaluated on ``(κ, A)``.
    """
    if rel not in RELATIONS:
        raise PreconditionError(f"unknown relation {rel!r}")
    _, predicate = RELATIONS[rel]
    values = {}
    for p in relation_postulates(rel):
        sub = inst
        if p == "EBE" and inst.c is None:
            sub = replace(inst, c=inst.a)
        if p in UNARY:
            sub = Instance(inst.k, inst.a)
        values[p] = check(p, op, sub).holds
    return predicate(values)


def format_instance(inst: Instance, gamma: int | None = None) -> str:
    """Witness text: the OCF format for each state plus ``formula:`` style trailer lines."""
    parts = [format_ocf(inst.k)]
    if inst.k2 is not None:
        parts.append("--- k2\n" + format_ocf(inst.k2))
    if inst.kprime is not None:
        parts.append("--- kprime\n" + format_ocf(inst.kprime))
    trailer = [f"formula: {_show(inst.a)}"]
    if inst.c is not None:
        trailer.append(f"formula2: {_show(inst.c)}")
    if gamma is not None:
        trailer.append(f"gamma: {gamma}")
    if inst.split is not None:
        trailer.append(f"split: {inst.split[0]} | {inst.split[1]}")
    if inst.q is not None:
        trailer.append(f"q: {inst.q}")
    return "".join(parts) + "\n".join(trailer) + "\n"


def parse_instance(text: str) -> Instance:
    """Inverse of ``format_instance``."""
    from .logic import parse_formula
    from .ocf import parse_ocf

    sections: dict[str, list[str]] = {"k": []}
    trailer: dict[str, str] = {}
    current = "k"
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if line.startswith("---"):
            current = line[3:].strip()
            sections[current] = []
            continue
        key, sep, value = line.partition(":")
        if sep and key.strip() in ("formula", "formula2", "gamma", "split", "q"):
            trailer[key.strip()] = value.strip()
            continue
        sections[current].append(line)
    k = parse_ocf("\n".join(sections["k"]), allow_partial=True)
    k2 = parse_ocf("\n".join(sections["k2"]), allow_partial=True) if "k2" in sections else None
    kp = parse_ocf("\n".join(sections["kprime"])) if "kprime" in sections else None
    sig = k.signature
    a = parse_formula(trailer["formula"], sig)
    c = parse_formula(trailer["formula2"], sig) if "formula2" in trailer else None
    split = None
    if "split" in trailer:
        left, _, right = trailer["split"].partition("|")
        split = (Signature(tuple(left.split())), Signature(tuple(right.split())))
    q = Fraction(trailer["q"]) if "q" in trailer else None
    return Instance(k, a, k2=k2, c=c, split=split, kprime=kp, q=q)
