"""Epistemic forgetting over Spohn ranking functions."""

from .forgetting import (
    COND,
    C_IGN,
    C_MIN,
    C_NONMIN,
    C_REV,
    LMARG,
    MARG,
    DomainError,
    ForgettingOperator,
    SelectionStrategy,
    c_contract,
    c_contraction,
    forget,
    named_strategies,
    operator_from_id,
)
from .logic import BeliefSet, ParseError, Signature, WorldSet, models, parse_formula, sigmin
from .ocf import (
    Conditional,
    RankingFunction,
    accepts,
    bel,
    format_ocf,
    ocf_entails,
    ocf_equiv,
    ocf_new,
    parse_ocf,
    rank,
)
from .postulates import POSTULATES, Instance, Verdict, check

__all__ = [
    "BeliefSet", "COND", "C_IGN", "C_MIN", "C_NONMIN", "C_REV", "Conditional", "DomainError",
    "ForgettingOperator", "Instance", "LMARG", "MARG", "POSTULATES", "ParseError", "RankingFunction",
    "SelectionStrategy", "Signature", "Verdict", "WorldSet", "accepts", "bel", "c_contract", "c_contraction",
    "check", "forget", "format_ocf", "models", "named_strategies", "ocf_entails", "ocf_equiv", "ocf_new",
    "operator_from_id", "parse_formula", "parse_ocf", "rank", "sigmin",
]
