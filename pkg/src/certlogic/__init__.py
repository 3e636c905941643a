"""Logics of knowledge, belief and certainty: exact model checking,
modal decision procedures, proof checking and Miller's-principle analyses."""

from certlogic.formula import (
    And, Bottom, Formula, Implies, Know, Language, Not, Or, ParseError, Prop,
    Top, Weight, WeightIn, WeightTerm, cert, classify, desugar, modal_depth,
    parse, render, subformulas, translate_C_to_K, translate_K_to_C,
)

__version__ = "0.1.0"
