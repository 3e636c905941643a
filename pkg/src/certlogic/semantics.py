"""Satisfaction relation for knowledge and probability structures.

Extensions are computed bottom-up as state bitmasks and memoized per
structure, so nested weight formulas cost ``O(|sub(f)| * |S|)`` rational
sums.  Comparisons are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from certlogic.formula import (
    And, Bottom, Formula, Know, Not, Prop, Top, Weight, desugar, render,
)
from certlogic.structures import (
    GeneralizedProbabilityStructure, KnowledgeStructure, SimpleProbabilityStructure,
    StructureError,
)

__all__ = ["SemanticsError", "Extension", "eval_formula", "extension",
           "valid_in_structure", "satisfying_states", "Evaluator"]


class SemanticsError(ValueError):
    """Formula and structure do not fit together."""


@dataclass(frozen=True)
class Extension:
    structure: object
    formula: Formula
    states: frozenset[str]


class Evaluator:
    """Memoizing model checker bound to one structure."""

    def __init__(self, N):
        self.N = N
        self.index = {s: i for i, s in enumerate(N.states)}
        self.full = (1 << len(N.states)) - 1
        self.memo: dict[Formula, int] = {}
        self.prop_mask = {
            p: sum(1 << i for i, s in enumerate(N.states) if p in N.assign[s])
            for p in N.props
        }
        rel = getattr(N, "K", None)
        self.succ = None
        if rel is not None:
            self.succ = {
                a: [sum(1 << self.index[t] for (x, t) in rel[a] if x == s) for s in N.states]
                for a in N.agents
            }
        self.simple = isinstance(N, SimpleProbabilityStructure)
        self.dists = None
        if isinstance(N, SimpleProbabilityStructure):
            self.dists = {a: [[(self.index[t], v) for t, v in N.pr[a].items() if v]]
                          for a in N.agents}
        elif isinstance(N, GeneralizedProbabilityStructure):
            self.dists = {a: [[(self.index[t], v) for t, v in N.PR[a][s].items() if v]
                              for s in N.states] for a in N.agents}

    def _agent(self, a: int):
        if a not in self.N.agents:
            raise SemanticsError(f"agent {a} is not declared in the structure")

    def mask(self, f: Formula) -> int:
        """Bitmask of states satisfying canonical *f*."""
        m = self.memo.get(f)
        if m is not None:
            return m
        if isinstance(f, Prop):
            if f.name not in self.prop_mask:
                raise SemanticsError(f"proposition {f.name!r} is not declared")
            m = self.prop_mask[f.name]
        elif isinstance(f, Top):
            m = self.full
        elif isinstance(f, Bottom):
            m = 0
        elif isinstance(f, Not):
            m = self.full & ~self.mask(f.arg)
        elif isinstance(f, And):
            m = self.mask(f.left) & self.mask(f.right)
        elif isinstance(f, Know):
            if self.succ is None:
                raise SemanticsError("K needs a structure with an accessibility relation")
            self._agent(f.agent)
            inner = self.mask(f.arg)
            m = 0
            for i, succ in enumerate(self.succ[f.agent]):
                if succ & ~inner == 0:
                    m |= 1 << i
        elif isinstance(f, Weight):
            m = self._weight(f)
        else:
            raise SemanticsError(f"formula must be desugared first: {render(f)}")
        self.memo[f] = m
        return m

    def _prob(self, dist, mask: int) -> Fraction:
        return sum((v for i, v in dist if mask >> i & 1), Fraction(0))

    def _weight(self, f: Weight) -> int:
        if not f.is_canonical:
            raise SemanticsError(f"weight formula must be desugared first: {render(f)}")
        if self.dists is None:
            raise SemanticsError("weight formulas need a probability structure")
        args = []
        for t in f.terms:
            self._agent(t.agent)
            args.append((t.coeff, t.agent, self.mask(t.arg)))
        if self.simple:
            total = sum(c * self._prob(self.dists[a][0], m) for c, a, m in args)
            return self.full if total >= f.bound else 0
        out = 0
        for i in range(len(self.N.states)):
            total = sum(c * self._prob(self.dists[a][i], m) for c, a, m in args)
            if total >= f.bound:
                out |= 1 << i
        return out

    def states_of(self, mask: int) -> frozenset[str]:
        return frozenset(s for i, s in enumerate(self.N.states) if mask >> i & 1)


def _evaluator(N) -> Evaluator:
    if not isinstance(N, (KnowledgeStructure, SimpleProbabilityStructure,
                          GeneralizedProbabilityStructure)):
        raise SemanticsError(f"not a structure: {type(N).__name__}")
    ev = N._cache.get("evaluator")
    if ev is None:
        ev = N._cache["evaluator"] = Evaluator(N)
    return ev


def eval_formula(N, s: str, f: Formula) -> bool:
    """``(N, s) |= f``.  Sugar is removed first."""
    try:
        N.check_state(s)
    except StructureError as e:
        raise SemanticsError(str(e)) from None
    ev = _evaluator(N)
    return bool(ev.mask(desugar(f)) >> ev.index[s] & 1)


def extension(N, f: Formula) -> Extension:
    ev = _evaluator(N)
    return Extension(N, f, ev.states_of(ev.mask(desugar(f))))


def satisfying_states(N, f: Formula) -> frozenset[str]:
    return extension(N, f).states


def valid_in_structure(N, f: Formula) -> tuple[bool, str | None]:
    """``(True, None)`` if *f* holds everywhere, else ``(False, witness)``."""
    ext = satisfying_states(N, f)
    for s in N.states:
        if s not in ext:
            return False, s
    return True, None
