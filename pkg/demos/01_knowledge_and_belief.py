"""
Knowledge versus belief
=======================

The same formula can be valid for knowledge (S5) and fail for belief
(KD45).  Invalid verdicts come with a finite countermodel.
"""

from certlogic.decision import check_s5_kd45_bridge, decide
from certlogic.formula import parse
from certlogic.semantics import eval_formula

truth = parse("K(p) -> p")
for system in ("S5", "KD45"):
    print(system, decide(truth, system).verdict)

# the belief countermodel: the agent believes p at a state where p is false
M, s = decide(truth, "KD45").countermodel
print("state", s, "sees", M.successors(1, s), "p at", [t for t in M.states if "p" in M.assign[t]])
print("K(p) & ~p holds there:", eval_formula(M, s, parse("K(p) & ~p")))

# introspection survives without truth
print(decide(parse("~K(p) -> K(~K(p))"), "KD45").verdict)

# a formula is S5-valid exactly when believing it is KD45-valid
for text in ["K(p) -> p", "p", "K(p | q) -> K(p) | K(q)"]:
    r = check_s5_kd45_bridge(parse(text))
    print(f"{text:28} S5 {r.s5_valid!s:5}  KD45 K(.) {r.kd45_valid!s:5}  agree {r.agree}")
