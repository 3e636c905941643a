"""
Certainty in probability structures
===================================

``Cert(phi)`` is ``w(phi) = 1``.  Over all simple structures it behaves like
KD45 belief; if every state has positive probability it behaves like S5.
"""

from fractions import Fraction

from certlogic.certainty import false_belief_states
from certlogic.decision import decide_certainty
from certlogic.formula import parse
from certlogic.semantics import eval_formula
from certlogic.structures import SimpleProbabilityStructure

f = parse("Cert(p) -> p")
for cls in ("N0", "N1"):
    print(cls, decide_certainty(f, cls).verdict)

N, s = decide_certainty(f, "N0").countermodel
print("countermodel state", s, "has probability", N.pr[1][s])

# a biased coin that never lands tails in the agent's view
coin = SimpleProbabilityStructure(
    ("heads", "tails"), ("h",), {"heads": {"h"}, "tails": set()}, (1,),
    pr={1: {"heads": Fraction(1), "tails": Fraction(0)}})
print("Cert(h) at tails:", eval_formula(coin, "tails", parse("Cert(h)")))

# false beliefs only ever occur on a null set
report = false_belief_states(coin)
print(report.to_json(coin.states))
