"""Forgetting operators on ranking functions.

Four families: marginalization (drops ``sigmin(A)`` from the signature),
lifted marginalization (marginalizes then lifts back), conditionalization on
``¬A``, and propositional c-contraction parameterized by a selection strategy
that picks the impact factor ``γ``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

from .logic import (
    Prop,
    Signature,
    WorldSet,
    as_worlds,
    atoms_of,
    dnf,
    models,
    sigmin_worlds,
    syntactic_variants,
)
from .ocf import INFINITY, RankingFunction, conditionalize, lift_ocf, marginalize_ocf, scale


class DomainError(ValueError):
    """Forgetting outside the operator's domain (non-contingent input, bad γ)."""


class Kind(Enum):
    MARGINALIZATION = "marg"
    LIFTED_MARGINALIZATION = "lmarg"
    CONDITIONALIZATION = "cond"
    C_CONTRACTION = "c-contraction"


@dataclass(frozen=True)
class ImpactBound:
    """Solutions of the c-contraction constraint: ``γ ≥ lower`` and ``γ ≠ excluded`` if set."""

    lower: int
    excluded: int | None = None

    def admits(self, gamma: int) -> bool:
        return gamma >= self.lower and gamma != self.excluded


def _neg_pos_ranks(k: RankingFunction, a: WorldSet) -> tuple[int, int]:
    r_pos = k.rank_of_mask(a.mask)
    r_neg = k.rank_of_mask(a.complement().mask)
    if r_pos == INFINITY or r_neg == INFINITY:
        raise DomainError("c-contraction needs a proposition with finite rank on both sides")
    return int(r_pos), int(r_neg)


def impact_bound(k: RankingFunction, a: Prop) -> ImpactBound:
    """``γ ≥ κ(¬A) − κ(A)``."""
    r_pos, r_neg = _neg_pos_ranks(k, as_worlds(a, k.signature))
    return ImpactBound(r_neg - r_pos)


# ---------------------------------------------------------------------------
# Selection strategies


@dataclass(frozen=True)
class SelectionStrategy:
    """A deterministic function ``(κ, A) ↦ γ``."""

    name: str
    choose: Callable[[RankingFunction, WorldSet], int] = field(compare=False)
    description: str = field(default="", compare=False)

    def __call__(self, k: RankingFunction, a: Prop) -> int:
        return self.choose(k, as_worlds(a, k.signature))


def _gcd_nonzero(k: RankingFunction) -> int:
    g = 0
    for r in k.ranks:
        if r not in (0, INFINITY):
            g = math.gcd(g, int(r))
    return g or 1


def is_degenerate_for_xe(k: RankingFunction) -> bool:
    """Instances where the gcd-based strategies cannot scale (all ranks zero)."""
    return all(r in (0, INFINITY) for r in k.ranks)


def _sigma_min(k: RankingFunction, a: WorldSet) -> int:
    return _neg_pos_ranks(k, a)[1]


def _sigma_ign(k: RankingFunction, a: WorldSet) -> int:
    r_pos, r_neg = _neg_pos_ranks(k, a)
    return r_neg - r_pos


def _sigma_rev(k: RankingFunction, a: WorldSet) -> int:
    r_pos, r_neg = _neg_pos_ranks(k, a)
    return 1 + r_neg - r_pos


def _sigma_nonmin(k: RankingFunction, a: WorldSet) -> int:
    r_pos, r_neg = _neg_pos_ranks(k, a)
    lower = r_neg - r_pos
    return lower if lower != r_neg else lower + 1


def _sigma_rev_xe(k: RankingFunction, a: WorldSet) -> int:
    r_pos, r_neg = _neg_pos_ranks(k, a)
    return r_neg - r_pos + _gcd_nonzero(k)


def _sigma_nonmin_xe(k: RankingFunction, a: WorldSet) -> int:
    r_pos, r_neg = _neg_pos_ranks(k, a)
    lower = r_neg - r_pos
    return lower if lower != r_neg else r_neg + _gcd_nonzero(k)


SIGMA_MIN = SelectionStrategy("min", _sigma_min, "γ = κ(¬A)")
SIGMA_IGN = SelectionStrategy("ign", _sigma_ign, "γ = κ(¬A) − κ(A)")
SIGMA_REV = SelectionStrategy("rev", _sigma_rev, "γ = 1 + κ(¬A) − κ(A)")
SIGMA_NONMIN = SelectionStrategy("nonmin", _sigma_nonmin, "least admissible γ different from κ(¬A)")
SIGMA_REV_XE = SelectionStrategy("rev-xe", _sigma_rev_xe, "γ = κ(¬A) − κ(A) + gcd of the nonzero ranks")
SIGMA_NONMIN_XE = SelectionStrategy(
    "nonmin-xe", _sigma_nonmin_xe, "κ(¬A) − κ(A) unless that equals κ(¬A), then κ(¬A) + gcd of the nonzero ranks"
)


def named_strategies() -> dict[str, SelectionStrategy]:
    return {s.name: s for s in (SIGMA_MIN, SIGMA_IGN, SIGMA_REV, SIGMA_NONMIN, SIGMA_REV_XE, SIGMA_NONMIN_XE)}


def constant_strategy(gamma: int) -> SelectionStrategy:
    return SelectionStrategy(f"const:{gamma}", lambda k, a: gamma)


def table_strategy(name: str, table: Mapping[tuple[RankingFunction, WorldSet], int]) -> SelectionStrategy:
    """Strategy given by an explicit ``(κ, A) ↦ γ`` table; used to replay worked examples."""
    frozen = dict(table)

    def choose(k: RankingFunction, a: WorldSet) -> int:
        try:
            return frozen[(k, a)]
        except KeyError:
            raise DomainError(f"strategy {name} has no γ for this instance") from None

    return SelectionStrategy(name, choose)


STRATEGY_PROPERTIES = ("SI", "I", "R", "M", "NM", "xE")


def strategy_satisfies(s: SelectionStrategy, prop: str, k: RankingFunction, a: Prop) -> bool:
    """Instance-level check of a strategy postulate."""
    m = as_worlds(a, k.signature)
    if not m.is_contingent():
        raise DomainError("strategy postulates are stated for contingent propositions")
    r_pos, r_neg = _neg_pos_ranks(k, m)
    if prop == "SI":
        gammas = {s(k, f) for f in syntactic_variants(dnf(m), k.signature)}
        return len(gammas) == 1
    gamma = s(k, m)
    if prop == "I":
        return gamma == r_neg - r_pos
    if prop == "R":
        return gamma > r_neg - r_pos
    if prop == "M":
        return gamma == r_neg
    if prop == "NM":
        return gamma != r_neg
    if prop == "xE":
        for q in (2, 3):
            if s(scale(k, q), m) != q * gamma:
                return False
        return True
    raise ValueError(f"unknown strategy property {prop!r}")


# ---------------------------------------------------------------------------
# Operators


@dataclass(frozen=True)
class ForgettingOperator:
    kind: Kind
    strategy: SelectionStrategy | None = None

    def __post_init__(self) -> None:
        if (self.kind is Kind.C_CONTRACTION) != (self.strategy is not None):
            raise ValueError("exactly the c-contraction operators carry a selection strategy")

    @property
    def name(self) -> str:
        if self.kind is not Kind.C_CONTRACTION:
            return self.kind.value
        assert self.strategy is not None
        short = {"ign": "c-ign", "rev": "c-rev", "min": "c-min", "nonmin": "c-nonmin"}
        return short.get(self.strategy.name, f"c-custom:{self.strategy.name}")

    @property
    def preserves_domain(self) -> bool:
        """Output is a total OCF over the input signature."""
        return self.kind in (Kind.LIFTED_MARGINALIZATION, Kind.C_CONTRACTION)

    def __str__(self) -> str:
        return self.name


MARG = ForgettingOperator(Kind.MARGINALIZATION)
LMARG = ForgettingOperator(Kind.LIFTED_MARGINALIZATION)
COND = ForgettingOperator(Kind.CONDITIONALIZATION)


def c_contraction(strategy: SelectionStrategy) -> ForgettingOperator:
    return ForgettingOperator(Kind.C_CONTRACTION, strategy)


C_IGN = c_contraction(SIGMA_IGN)
C_REV = c_contraction(SIGMA_REV)
C_MIN = c_contraction(SIGMA_MIN)
C_NONMIN = c_contraction(SIGMA_NONMIN)

MATRIX_OPERATORS = (MARG, LMARG, COND, C_IGN, C_REV, C_MIN, C_NONMIN)


def strategy_from_expr(expr: str) -> SelectionStrategy:
    """``const:<n>`` or a named strategy (``min``, ``ign``, ``rev``, ``nonmin``, ``rev-xe``, ``nonmin-xe``)."""
    if expr.startswith("const:"):
        try:
            return constant_strategy(int(expr[len("const:"):]))
        except ValueError:
            raise ValueError(f"bad constant γ in {expr!r}") from None
    strategies = named_strategies()
    if expr not in strategies:
        raise ValueError(f"unknown strategy {expr!r}")
    return strategies[expr]


def operator_from_id(text: str, strategy: str | None = None) -> ForgettingOperator:
    """Parse an operator identifier; bare ``c-custom`` takes its strategy from ``strategy``."""
    fixed = {"marg": MARG, "lmarg": LMARG, "cond": COND, "c-ign": C_IGN, "c-rev": C_REV, "c-min": C_MIN,
             "c-nonmin": C_NONMIN}
    if text in fixed:
        if strategy is not None and fixed[text].kind is not Kind.C_CONTRACTION:
            raise ValueError(f"operator {text} takes no strategy")
        if strategy is not None:
            return c_contraction(strategy_from_expr(strategy))
        return fixed[text]
    if text == "c-custom":
        if strategy is None:
            raise ValueError("c-custom needs a strategy")
        return c_contraction(strategy_from_expr(strategy))
    if text.startswith("c-custom:"):
        return c_contraction(strategy_from_expr(text[len("c-custom:"):]))
    raise ValueError(f"unknown operator {text!r}")


def c_contract(k: RankingFunction, a: Prop, gamma: int) -> RankingFunction:
    """``(κ−A)(ω) = −κ(¬A) + κ(ω) + [ω ⊨ A]·γ``."""
    m = as_worlds(a, k.signature)
    if m.is_empty():
        raise DomainError("cannot contract by a contradiction")
    if m.is_full():
        raise DomainError("contraction by a tautology is handled by forget()")
    if not k.is_total:
        raise DomainError("c-contraction is defined for total ranking functions")
    r_pos, r_neg = _neg_pos_ranks(k, m)
    if gamma < r_neg - r_pos:
        raise DomainError(f"γ = {gamma} is below the bound κ(¬A) − κ(A) = {r_neg - r_pos}")
    ranks = tuple(-r_neg + r + (gamma if m.mask >> w & 1 else 0) for w, r in enumerate(k.ranks))
    assert min(ranks) == 0, ranks
    return RankingFunction(k.signature, ranks)


def c_contract_pm(k: RankingFunction, a: Prop, gamma_plus: int, gamma_minus: int) -> RankingFunction:
    """Type-β form: ``κ0 + κ(ω) + [ω ⊨ A]·γ⁺ + [ω ⊨ ¬A]·γ⁻`` with the normalizer ``κ0``."""
    m = as_worlds(a, k.signature)
    shifted = [r + (gamma_plus if m.mask >> w & 1 else gamma_minus) for w, r in enumerate(k.ranks)]
    low = min(shifted)
    ranks = tuple(r - low for r in shifted)
    if min(ranks) < 0:
        raise DomainError("negative rank")
    result = RankingFunction(k.signature, ranks)
    if result.rank_of_mask(m.complement().mask) != 0:
        raise DomainError("(γ⁺, γ⁻) does not yield a contraction")
    return result


def forgetting_signature(k: RankingFunction, a: WorldSet) -> Signature:
    """``sig(κ) ∖ sigmin(A)``."""
    return k.signature.without(sigmin_worlds(a).atoms)


def forget(op: ForgettingOperator, k: RankingFunction, a: Prop, contingent_only: bool = True) -> RankingFunction:
    """``κ ∘ A`` for the given operator.

    A formula mentioning atoms outside ``sig(κ)`` is read over the union
    signature: its minimal signature is computed there and then intersected
    with ``sig(κ)`` (needed when forgetting twice by marginalization).
    """
    sig = k.signature
    if op.kind is Kind.MARGINALIZATION:
        outside = a.signature if isinstance(a, WorldSet) else atoms_of(a)
        if not set(outside) <= sig.as_set():
            wide = a if isinstance(a, WorldSet) else models(a, sig.union(sorted(atoms_of(a))))
            if contingent_only and not wide.is_contingent():
                raise DomainError("forgetting needs a contingent proposition")
            drop = set(sigmin_worlds(wide).atoms) & sig.as_set()
            return marginalize_ocf(k, sig.without(drop), allow_empty=True)
    m = as_worlds(a, sig)
    if m.is_full() and op.kind is Kind.C_CONTRACTION:
        return k
    if contingent_only and not m.is_contingent():
        raise DomainError("forgetting needs a contingent proposition")
    if op.kind is Kind.MARGINALIZATION:
        return marginalize_ocf(k, forgetting_signature(k, m), allow_empty=True)
    if op.kind is Kind.LIFTED_MARGINALIZATION:
        sub = forgetting_signature(k, m)
        return lift_ocf(marginalize_ocf(k, sub, allow_empty=True), sig)
    if op.kind is Kind.CONDITIONALIZATION:
        try:
            return conditionalize(k, m.complement())
        except ValueError as exc:
            raise DomainError(str(exc)) from None
    assert op.strategy is not None
    return c_contract(k, m, op.strategy(k, m))


def selected_gamma(op: ForgettingOperator, k: RankingFunction, a: Prop) -> int | None:
    """The impact factor a c-contraction operator uses on ``(κ, A)``."""
    if op.strategy is None:
        return None
    return op.strategy(k, as_worlds(a, k.signature))
