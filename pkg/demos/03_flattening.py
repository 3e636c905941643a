"""
Removing nested belief
======================

Under KD45 every formula is equivalent to one without nested modalities.
The rewriter records each step.
"""

from certlogic.decision import decide
from certlogic.formula import iff, modal_depth, parse, render
from certlogic.rewrite import RULES, normalize_depth_one

for rule in RULES:
    left, right = rule.example()
    print(f"{rule.name:11} {render(left):16} => {render(right):14} KD45-valid: {rule.verify()}")

f = parse("K(p | ~K(q & K(r)))")
trace = []
g = normalize_depth_one(f, trace)
print()
for step in trace:
    print(step)
print()
print(render(f), "==>", render(g))
print("depth", modal_depth(f), "->", modal_depth(g), "| equivalent:", decide(iff(f, g), "KD45").valid)

# certainty formulas go through the same rules
print(render(normalize_depth_one(parse("Cert(~Cert(p))"))))
