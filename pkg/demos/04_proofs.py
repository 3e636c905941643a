"""
Checking Hilbert-style proofs
=============================

Proofs are lists of lines, each an axiom instance, a tautology, modus
ponens or necessitation.  Swapping ``K`` for ``Cert`` maps a proof in a
knowledge system to one in its certainty counterpart.
"""

from certlogic.decision import decide
from certlogic.formula import render
from certlogic.proofs import bundled_proofs, check_proof, translate_proof

for name, proof in bundled_proofs():
    ok = check_proof(proof)
    mirrored = check_proof(translate_proof(proof))
    print(f"{name:55} {proof.system.name:5} {proof.language} checks={ok.ok} mirrored={mirrored.ok}")

name, proof = next((n, p) for n, p in bundled_proofs() if "collapse" in n)
print()
for k, line in enumerate(proof.lines, 1):
    print(f"{k:3}  {render(line.formula)}")
print("decide agrees:", decide(proof.conclusion, proof.system).valid)
