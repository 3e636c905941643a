"""False beliefs in simple probability structures.

A state has a false belief when some formula is certain yet false there.
In a simple structure every certainty subformula is true everywhere or
nowhere, so each definable set is a union of truth-assignment classes.  A
state therefore holds a false belief exactly when its own class has
probability zero, and the disjunction of the positive classes'
characteristic conjunctions is a witness.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from certlogic.formula import (
    Formula, Not, Prop, cert, conj, disj, format_rational, render,
)
from certlogic.semantics import eval_formula
from certlogic.structures import SimpleProbabilityStructure, StructureError

__all__ = ["FalseBeliefReport", "false_belief_states", "is_positive_structure",
           "characteristic_formula", "false_belief_states_by_enumeration"]


@dataclass(frozen=True)
class FalseBeliefReport:
    fb: frozenset[str]
    measure: Fraction
    witnesses: Mapping[str, Formula]

    def to_dict(self, states=None) -> dict:
        order = [s for s in (states or sorted(self.fb)) if s in self.fb]
        return {
            "fb": order,
            "measure": format_rational(self.measure),
            "witnesses": {s: render(self.witnesses[s]) for s in order},
        }

    def to_json(self, states=None) -> str:
        return json.dumps(self.to_dict(states), indent=2)


def _simple(N, agent: int) -> SimpleProbabilityStructure:
    if not isinstance(N, SimpleProbabilityStructure):
        raise StructureError("false beliefs are defined for simple probability structures")
    N.check_agent(agent)
    return N


def characteristic_formula(N, s: str) -> Formula:
    """Conjunction of literals fixing the truth assignment of state *s*."""
    return conj([Prop(p) if p in N.assign[s] else Not(Prop(p)) for p in N.props])


def false_belief_states(N: SimpleProbabilityStructure, agent: int = 1) -> FalseBeliefReport:
    """States where some formula is certain for *agent* yet false."""
    N = _simple(N, agent)
    pr = N.pr[agent]
    classes: dict[frozenset, list[str]] = defaultdict(list)
    for s in N.states:
        classes[N.assign[s]].append(s)
    mass = {k: sum((pr[s] for s in members), Fraction(0)) for k, members in classes.items()}
    fb = frozenset(s for s in N.states if mass[N.assign[s]] == 0)
    witnesses: dict[str, Formula] = {}
    if fb:
        positive = [members[0] for k, members in classes.items() if mass[k] > 0]
        phi = disj([characteristic_formula(N, s) for s in positive])
        claim = Not(phi) & cert(phi, agent)
        for s in sorted(fb, key=N.states.index):
            if not eval_formula(N, s, claim):
                raise AssertionError(f"witness fails at {s!r}")
            witnesses[s] = phi
    measure = sum((pr[s] for s in fb), Fraction(0))
    return FalseBeliefReport(fb, measure, witnesses)


def is_positive_structure(N: SimpleProbabilityStructure, agent: int = 1) -> bool:
    """Every state has positive probability."""
    N = _simple(N, agent)
    return all(v > 0 for v in N.pr[agent].values())


def false_belief_states_by_enumeration(N: SimpleProbabilityStructure, agent: int = 1,
                                       max_connectives: int = 6) -> frozenset[str]:
    """False-belief states found by searching formulas directly.

    Collects the extension of every certainty formula over the structure's
    propositions with at most *max_connectives* connectives (``~``, ``&``,
    ``|``, ``->``, ``Cert``), keyed by extension so equal sets are explored
    once per size.
    """
    N = _simple(N, agent)
    n = len(N.states)
    full = (1 << n) - 1
    pr = [N.pr[agent][s] for s in N.states]

    def prob(mask: int) -> Fraction:
        return sum((pr[i] for i in range(n) if mask >> i & 1), Fraction(0))

    atoms = {0, full}
    for p in N.props:
        atoms.add(sum(1 << i for i, s in enumerate(N.states) if p in N.assign[s]))
    by_size: list[set[int]] = [atoms]
    for c in range(1, max_connectives + 1):
        level: set[int] = set()
        for m in by_size[c - 1]:
            level.add(full & ~m)
            level.add(full if prob(m) == 1 else 0)
        for c1 in range(c):
            for a in by_size[c1]:
                for b in by_size[c - 1 - c1]:
                    level.update((a & b, a | b, (full & ~a) | b))
        by_size.append(level)
    found = 0
    for level in by_size:
        for m in level:
            if prob(m) == 1:
                found |= full & ~m
    return frozenset(s for i, s in enumerate(N.states) if found >> i & 1)
