"""Hilbert-style proof checking for the normal systems and their certainty
versions.

A proof is a list of lines, each a formula with a justification: a
propositional tautology, an instance of one of the schemas K, T, 4, 5, D,
modus ponens, or necessitation.  In certainty proofs ``Cert`` takes the
place of ``K`` everywhere, in the schemas and in necessitation.

All comparisons happen on desugared formulas, so ``p -> q`` and
``~(p & ~q)`` are the same line.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping, Sequence, Union

from certlogic.decision import System
from certlogic.formula import (
    And, Bottom, Formula, Implies, Know, Language, Not, Or, Prop, Top, Weight,
    WeightTerm, agents_of, as_cert, cert, classify, desugar, parse, render,
    translate_C_to_K, translate_K_to_C,
)

__all__ = [
    "PropTaut", "AxiomInstance", "ModusPonens", "Necessitation", "Justification",
    "ProofLine", "Proof", "CheckResult", "check_proof", "match_axiom",
    "is_prop_tautology", "schema_instance", "SCHEMAS", "proof_from_dict",
    "proof_to_dict", "load_proof", "bundled_proofs", "translate_proof",
]

SCHEMAS = ("K", "T", "4", "5", "D")

_PHI = Prop("?phi")
_PSI = Prop("?psi")
_AGENT = 0          # placeholder agent in patterns
_VAR_NAMES = {"phi": _PHI, "φ": _PHI, "psi": _PSI, "ψ": _PSI}


@dataclass(frozen=True)
class PropTaut:
    pass


@dataclass(frozen=True)
class AxiomInstance:
    schema: str
    subst: Mapping[str, Formula] | None = None


@dataclass(frozen=True)
class ModusPonens:
    premise: int
    implication: int


@dataclass(frozen=True)
class Necessitation:
    line: int


Justification = Union[PropTaut, AxiomInstance, ModusPonens, Necessitation]


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    just: Justification


@dataclass
class Proof:
    system: System
    language: str                       # "LK" or "LC"
    lines: list[ProofLine] = field(default_factory=list)
    name: str = ""

    @property
    def conclusion(self) -> Formula:
        return self.lines[-1].formula


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    line: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


# --------------------------------------------------------------------------
# schemas and matching

def _box(agent: int, f: Formula, language: str) -> Formula:
    return cert(f, agent) if language == "LC" else Know(agent, f)


def _schema_pattern(schema: str, language: str) -> Formula:
    b = lambda f: _box(_AGENT, f, language)  # noqa: E731
    if schema == "K":
        return Implies(And(b(_PHI), b(Implies(_PHI, _PSI))), b(_PSI))
    if schema == "T":
        return Implies(b(_PHI), _PHI)
    if schema == "4":
        return Implies(b(_PHI), b(b(_PHI)))
    if schema == "5":
        return Implies(Not(b(_PHI)), b(Not(b(_PHI))))
    if schema == "D":
        return Not(b(Bottom()))
    raise ValueError(f"unknown schema {schema!r}")


def _instantiate(f: Formula, subst: Mapping[Formula, Formula], agent: int) -> Formula:
    if f in subst:
        return subst[f]
    if isinstance(f, (Prop, Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(_instantiate(f.arg, subst, agent))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_instantiate(f.left, subst, agent), _instantiate(f.right, subst, agent))
    if isinstance(f, Know):
        return Know(agent if f.agent == _AGENT else f.agent, _instantiate(f.arg, subst, agent))
    if isinstance(f, Weight):
        terms = tuple(WeightTerm(t.coeff, agent if t.agent == _AGENT else t.agent,
                                 _instantiate(t.arg, subst, agent)) for t in f.terms)
        return Weight(terms, f.rel, f.bound)
    raise ValueError(f"cannot instantiate {type(f).__name__}")


def schema_instance(schema: str, subst: Mapping[str, Formula], agent: int = 1,
                    language: str = "LK") -> Formula:
    """The instance of *schema* under *subst* (keys ``phi``/``psi``)."""
    table = {}
    for k, v in subst.items():
        if k not in _VAR_NAMES:
            raise ValueError(f"unknown schema variable {k!r}")
        table[_VAR_NAMES[k]] = v
    return _instantiate(_schema_pattern(schema, language), table, agent)


def _unify(pat: Formula, tgt: Formula, env: dict) -> bool:
    if isinstance(pat, Prop) and pat.name.startswith("?"):
        if pat in env:
            return env[pat] == tgt
        env[pat] = tgt
        return True
    if type(pat) is not type(tgt):
        return False
    if isinstance(pat, (Prop, Top, Bottom)):
        return pat == tgt
    if isinstance(pat, Not):
        return _unify(pat.arg, tgt.arg, env)
    if isinstance(pat, (And, Or, Implies)):
        return _unify(pat.left, tgt.left, env) and _unify(pat.right, tgt.right, env)
    if isinstance(pat, Know):
        return _agent(pat.agent, tgt.agent, env) and _unify(pat.arg, tgt.arg, env)
    if isinstance(pat, Weight):
        if (pat.rel, pat.bound, len(pat.terms)) != (tgt.rel, tgt.bound, len(tgt.terms)):
            return False
        return all(a.coeff == b.coeff and _agent(a.agent, b.agent, env) and _unify(a.arg, b.arg, env)
                   for a, b in zip(pat.terms, tgt.terms))
    return False


def _agent(pat: int, tgt: int, env: dict) -> bool:
    if pat != _AGENT:
        return pat == tgt
    if "agent" in env:
        return env["agent"] == tgt
    env["agent"] = tgt
    return True


def match_axiom(f: Formula, schema: str, language: str | None = None,
                with_agent: bool = False) -> dict[str, Formula] | None:
    """A substitution showing *f* is an instance of *schema*, else ``None``.

    Bound variables are reported as ``phi``/``psi`` (desugared formulas);
    *with_agent* adds the matched agent under ``agent``.  With *language*
    unset it is inferred from *f*.
    """
    g = desugar(f)
    if language is None:
        language = "LC" if classify(g) == Language.LC else "LK"
    env: dict = {}
    if not _unify(desugar(_schema_pattern(schema, language)), g, env):
        return None
    out: dict[str, Formula] = {}
    for var, name in ((_PHI, "phi"), (_PSI, "psi")):
        if var in env:
            out[name] = env[var]
    if with_agent and "agent" in env:
        out["agent"] = env["agent"]
    return out


# --------------------------------------------------------------------------
# propositional tautologies

def _atoms(f: Formula, out: dict):
    if isinstance(f, Not):
        _atoms(f.arg, out)
    elif isinstance(f, And):
        _atoms(f.left, out)
        _atoms(f.right, out)
    elif not isinstance(f, (Top, Bottom)):
        out.setdefault(f, len(out))


def _truth(f: Formula, val: Mapping[Formula, bool]) -> bool:
    if isinstance(f, Not):
        return not _truth(f.arg, val)
    if isinstance(f, And):
        return _truth(f.left, val) and _truth(f.right, val)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    return val[f]


def is_prop_tautology(f: Formula) -> bool:
    """Truth-table check with maximal modal and weight subformulas as atoms."""
    g = desugar(f)
    atoms: dict = {}
    _atoms(g, atoms)
    keys = list(atoms)
    for bits in itertools.product((False, True), repeat=len(keys)):
        if not _truth(g, dict(zip(keys, bits))):
            return False
    return True


# --------------------------------------------------------------------------
# checking

def _language_ok(f: Formula, language: str) -> bool:
    lang = classify(f)
    return lang == Language.PROPOSITIONAL or lang.value == language


def _necessitated(target: Formula, body: Formula, language: str) -> bool:
    if language == "LC":
        c = as_cert(target)
        return c is not None and c[1] == body
    return isinstance(target, Know) and target.arg == body


def _check_axiom(g: Formula, j: AxiomInstance, proof: Proof) -> str | None:
    if j.schema not in SCHEMAS:
        return f"unknown schema {j.schema!r}"
    if j.schema != "K" and j.schema not in proof.system.axioms:
        return f"schema {j.schema} is not an axiom of {proof.system.name}"
    if j.subst:
        agent = j.subst.get("agent")
        vars_ = {k: desugar(v) for k, v in j.subst.items() if k != "agent"}
        agents = [agent] if agent is not None else agents_of(g) or [1]
        try:
            insts = [desugar(schema_instance(j.schema, vars_, a, proof.language)) for a in agents]
        except ValueError as e:
            return f"bad substitution: {e}"
        if g not in insts:
            return f"not the instance of {j.schema} under the given substitution"
        return None
    if match_axiom(g, j.schema, proof.language) is None:
        return f"not an instance of schema {j.schema}"
    return None


def check_proof(proof: Proof) -> CheckResult:
    """Check every line; report the first bad one (1-based)."""
    if proof.language not in ("LK", "LC"):
        return CheckResult(False, None, f"unknown language {proof.language!r}")
    if not proof.lines:
        return CheckResult(False, None, "empty proof")
    seen: list[Formula] = []
    for n, line in enumerate(proof.lines, start=1):
        g = desugar(line.formula)
        if not _language_ok(g, proof.language):
            return CheckResult(False, n, f"formula is not in {proof.language}")
        j = line.just
        reason = None
        refs = ()
        if isinstance(j, ModusPonens):
            refs = (j.premise, j.implication)
        elif isinstance(j, Necessitation):
            refs = (j.line,)
        bad = [r for r in refs if not 1 <= r < n]
        if bad:
            reason = f"reference to line {bad[0]} is not an earlier line"
        elif isinstance(j, PropTaut):
            if not is_prop_tautology(g):
                reason = "not a propositional tautology"
        elif isinstance(j, AxiomInstance):
            reason = _check_axiom(g, j, proof)
        elif isinstance(j, ModusPonens):
            a, b = seen[j.premise - 1], seen[j.implication - 1]
            if b != desugar(Implies(a, g)) and a != desugar(Implies(b, g)):
                reason = f"lines {j.premise} and {j.implication} do not yield this line by modus ponens"
        elif isinstance(j, Necessitation):
            if not _necessitated(g, seen[j.line - 1], proof.language):
                reason = f"not the necessitation of line {j.line}"
        else:
            reason = f"unknown justification {j!r}"
        if reason:
            return CheckResult(False, n, reason)
        seen.append(g)
    return CheckResult(True)


def translate_proof(proof: Proof) -> Proof:
    """Swap ``K`` and ``Cert`` in every line (and in substitutions)."""
    to_c = proof.language == "LK"
    tr = translate_K_to_C if to_c else translate_C_to_K

    def just(j):
        if isinstance(j, AxiomInstance) and j.subst:
            return AxiomInstance(j.schema, {k: (v if k == "agent" else tr(desugar(v)))
                                            for k, v in j.subst.items()})
        return j

    lines = [ProofLine(tr(desugar(l.formula)), just(l.just)) for l in proof.lines]
    return Proof(proof.system, "LC" if to_c else "LK", lines, proof.name)


# --------------------------------------------------------------------------
# JSON

def _just_from_json(data) -> Justification:
    if data == "taut":
        return PropTaut()
    if isinstance(data, Mapping):
        if "axiom" in data:
            subst = data.get("subst")
            if subst is not None:
                subst = {k: (int(v) if k == "agent" else parse(v)) for k, v in subst.items()}
            return AxiomInstance(str(data["axiom"]), subst)
        if "mp" in data:
            i, j = data["mp"]
            return ModusPonens(int(i), int(j))
        if "nec" in data:
            return Necessitation(int(data["nec"]))
    raise ValueError(f"bad justification {data!r}")


def _just_to_json(j: Justification):
    if isinstance(j, PropTaut):
        return "taut"
    if isinstance(j, AxiomInstance):
        out = {"axiom": j.schema}
        if j.subst:
            out["subst"] = {k: (v if k == "agent" else render(v, multi_agent=True))
                            for k, v in j.subst.items()}
        return out
    if isinstance(j, ModusPonens):
        return {"mp": [j.premise, j.implication]}
    return {"nec": j.line}


def proof_from_dict(data: Mapping) -> Proof:
    lines = [ProofLine(parse(item["formula"]), _just_from_json(item["just"]))
             for item in data["lines"]]
    return Proof(System.parse(data["system"]), data.get("language", "LK"), lines,
                 data.get("name", ""))


def proof_to_dict(proof: Proof) -> dict:
    out = {"system": proof.system.name, "language": proof.language}
    if proof.name:
        out["name"] = proof.name
    out["lines"] = [{"formula": render(l.formula, multi_agent=True), "just": _just_to_json(l.just)}
                    for l in proof.lines]
    return out


def load_proof(path: str | Path) -> Proof:
    with open(path, encoding="utf-8") as fh:
        return proof_from_dict(json.load(fh))


def bundled_proofs() -> Iterator[tuple[str, Proof]]:
    """The proof corpus shipped with the package, sorted by file name."""
    root = resources.files("certlogic") / "data" / "proofs"
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            yield entry.name, proof_from_dict(json.loads(entry.read_text(encoding="utf-8")))
