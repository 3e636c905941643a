"""
Miller's principle and uniform frames
=====================================

On a uniform frame every instance of the principle holds.  On a
non-uniform frame a one-proposition countermodel usually exists, but not
always: when every state the agent can reach is certain of itself the
instances all hold anyway.
"""

from fractions import Fraction as Fr

from certlogic.miller import (
    Interval, NoCountermodelFound, check_miller_theorem, miller_instance,
    nonuniform_countermodel,
)
from certlogic.formula import Prop, render
from certlogic.structures import Frame, is_uniform

print(render(miller_instance(Prop("p"), Interval(Fr(1, 3), Fr(1, 2))).rendered))

half = {"s": Fr(1, 2), "t": Fr(1, 2)}
uniform = Frame(("s", "t"), (1,), {1: {"s": half, "t": half}})
drifting = Frame(("s", "t"), (1,), {1: {"s": half, "t": {"t": Fr(1)}}})
reflecting = Frame(("s", "a", "b"), (1,), {1: {
    "s": {"a": Fr(1, 2), "b": Fr(1, 2)}, "a": {"a": Fr(1)}, "b": {"b": Fr(1)}}})

for name, F in [("uniform", uniform), ("drifting", drifting), ("reflecting", reflecting)]:
    r = check_miller_theorem(F)
    print(f"{name:10} uniform={is_uniform(F)!s:5} all instances valid={r.all_valid}")

N, inst, s = nonuniform_countermodel(drifting)
print("drifting frame fails at", s, "with p true at",
      [x for x in N.states if N.assign[x]], "and interval", inst.interval)

try:
    nonuniform_countermodel(reflecting)
except NoCountermodelFound as e:
    print("reflecting frame:", e)
