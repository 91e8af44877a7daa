"""Conjunctive queries over word equations: decomposition, planning, evaluation."""

from .model import (
    Alphabet,
    FcCq,
    Pattern,
    RegularConstraint,
    UNIVERSE,
    Variable,
    WordEquation,
    default_alphabet,
)

__all__ = [
    "Alphabet",
    "FcCq",
    "Pattern",
    "RegularConstraint",
    "UNIVERSE",
    "Variable",
    "WordEquation",
    "default_alphabet",
]
