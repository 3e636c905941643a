import itertools
import json
import random

import pytest
from hypothesis import given, strategies as st

from certlogic.decision import System, decide
from certlogic.formula import (
    And, Formula, Implies, Know, Not, Or, Prop, desugar, parse, random_formula, translate_C_to_K,
)
from certlogic.proofs import (
    AxiomInstance, ModusPonens, Necessitation, Proof, ProofLine, PropTaut, bundled_proofs,
    check_proof, is_prop_tautology, load_proof, match_axiom, proof_from_dict, proof_to_dict,
    schema_instance, translate_proof,
)
from certlogic.semantics import eval_formula
from certlogic.structures import KnowledgeStructure

P, Q = Prop("p"), Prop("q")


def proof(system, *lines, language="LK"):
    return Proof(System.parse(system), language, [ProofLine(parse(f), j) for f, j in lines])


def test_axiom_k_instance():
    pr = proof("K", ("K(p) & K(p -> p) -> K(p)", AxiomInstance("K", {"phi": P, "psi": P})))
    assert check_proof(pr)


def test_schema_gate():
    r = check_proof(proof("KD45", ("K(p) -> p", AxiomInstance("T", {"phi": P}))))
    assert not r and r.line == 1 and "T" in r.reason


def test_necessitation():
    pr = proof("K", ("p -> p | q", PropTaut()), ("K(p -> p | q)", Necessitation(1)))
    assert check_proof(pr)


def test_modus_ponens_either_order():
    pr = proof("T",
               ("K(p) -> p", AxiomInstance("T", {"phi": P})),
               ("K(p -> p | q)", Necessitation(3)))
    assert check_proof(pr).line == 2
    ok = proof("S5",
               ("p -> p", PropTaut()),
               ("K(p -> p)", Necessitation(1)),
               ("K(p -> p) -> p -> p", AxiomInstance("T", {"phi": parse("p -> p")})),
               ("p -> p", ModusPonens(2, 3)),
               ("p -> p", ModusPonens(3, 2)))
    assert check_proof(ok)


@pytest.mark.parametrize("lines, line", [
    ([("p", PropTaut())], 1),
    ([("K(p) -> p", AxiomInstance("T", {"phi": Q}))], 1),
    ([("p | ~p", PropTaut()), ("q", ModusPonens(1, 1))], 2),
    ([("p | ~p", PropTaut()), ("K(p | ~p)", Necessitation(2))], 2),
    ([("p | ~p", PropTaut()), ("K_2(q | ~q)", Necessitation(1))], 2),
    ([("w(p) >= 0", PropTaut())], 1),
])
def test_errors_name_the_line(lines, line):
    r = check_proof(proof("S5", *lines))
    assert not r.ok and r.line == line and r.reason


def test_empty_proof_and_bad_language():
    assert not check_proof(Proof(System.parse("K"), "LK", []))
    assert not check_proof(Proof(System.parse("K"), "LP", [ProofLine(P | Not(P), PropTaut())]))


@pytest.mark.parametrize("text, schema, subst", [
    ("~K(q) -> K(~K(q))", "5", {"phi": Q}),
    ("K(q) -> K(K(q))", "T", None),
    ("K(q) -> K(K(q))", "4", {"phi": Q}),
    ("K(p) -> p", "T", {"phi": P}),
    ("K_2(p) -> p", "T", {"phi": P}),
    ("K_2(p) -> K_1(K_2(p))", "4", None),
    ("~K(false)", "D", {}),
    ("K(p) & K(p -> q) -> K(q)", "K", {"phi": P, "psi": Q}),
])
def test_match_axiom(text, schema, subst):
    assert match_axiom(parse(text), schema) == subst


def test_match_axiom_certainty():
    assert match_axiom(parse("~Cert(false)"), "D", language="LC") == {}
    assert match_axiom(parse("~Cert(false)"), "D", language="LK") is None
    assert match_axiom(parse("Cert_2(p) -> p"), "T", with_agent=True) == {"phi": P, "agent": 2}


@pytest.mark.parametrize("schema", ["K", "T", "4", "5", "D"])
@pytest.mark.parametrize("language", ["LK", "LC"])
def test_schema_instance_round_trip(schema, language):
    subst = {"phi": parse("p & ~q"), "psi": parse("K(q)" if language == "LK" else "Cert(q)")}
    if schema != "K":
        subst.pop("psi")
    if schema == "D":
        subst = {}
    f = schema_instance(schema, subst, agent=2, language=language)
    expected = {k: desugar(v) for k, v in subst.items()}
    assert match_axiom(f, schema, language=language) == expected


@pytest.mark.parametrize("text, taut", [
    ("K(p) | ~K(p)", True),
    ("K(p) -> p", False),
    ("(p -> q) -> ~q -> ~p", True),
    ("w(p) >= 1/2 | ~(w(p) >= 1/2)", True),
    ("Cert(p) -> Cert(p)", True),
    ("K(p & q) -> K(q & p)", False),
])
def test_tautology_examples(text, taut):
    assert is_prop_tautology(parse(text)) is taut


def _truth_table(f: Formula, atoms) -> bool:
    """Brute force via one-state structures, one per valuation."""
    for bits in itertools.product([False, True], repeat=len(atoms)):
        on = {a for a, b in zip(atoms, bits) if b}
        M = KnowledgeStructure(("s",), tuple(atoms), {"s": on}, (1,), K={1: set()})
        if not eval_formula(M, "s", f):
            return False
    return True


ATOMS = tuple("abcdef")


def substitute(f, table):
    if f in table:
        return table[f]
    if isinstance(f, (Not, Know)):
        return type(f)(*([f.agent] if isinstance(f, Know) else []), substitute(f.arg, table))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(substitute(f.left, table), substitute(f.right, table))
    return f


@given(st.integers(0, 2 ** 32), st.integers(1, 6), st.integers(1, 9))
def test_tautology_matches_truth_table(seed, k, size):
    f = random_formula(random.Random(seed), ATOMS[:k], 0, size, "K", (1,), True)
    assert is_prop_tautology(f) == _truth_table(desugar(f), ATOMS[:k])


@given(st.integers(0, 2 ** 32))
def test_tautology_stable_under_modal_substitution(seed):
    rng = random.Random(seed)
    f = random_formula(rng, ("a", "b"), 0, 6, "K", (1,), True)
    g = substitute(f, {Prop("a"): parse("K(p)"), Prop("b"): parse("K(p & q)")})
    assert is_prop_tautology(g) == is_prop_tautology(f)


CORPUS = list(bundled_proofs())


def test_corpus_size():
    assert len(CORPUS) >= 10
    assert {p.language for _, p in CORPUS} == {"LK", "LC"}


@pytest.mark.parametrize("name, pr", CORPUS, ids=[n for n, _ in CORPUS])
def test_corpus_checks_and_is_valid(name, pr):
    assert check_proof(pr), check_proof(pr).reason
    g = translate_C_to_K(desugar(pr.conclusion)) if pr.language == "LC" else pr.conclusion
    assert decide(g, pr.system).valid


@pytest.mark.parametrize("name, pr", CORPUS, ids=[n for n, _ in CORPUS])
def test_corpus_translates(name, pr):
    tr = translate_proof(pr)
    assert tr.language != pr.language
    assert check_proof(tr), check_proof(tr).reason
    assert check_proof(translate_proof(tr))


@pytest.mark.parametrize("name, pr", CORPUS, ids=[n for n, _ in CORPUS])
def test_corpus_json_round_trip(name, pr):
    back = proof_from_dict(json.loads(json.dumps(proof_to_dict(pr))))
    assert [desugar(l.formula) for l in back.lines] == [desugar(l.formula) for l in pr.lines]
    assert back.system == pr.system and back.language == pr.language


def test_introspection_collapse_in_corpus():
    want = desugar(parse("(K(~K(p)) -> ~K(p)) & (~K(p) -> K(~K(p)))"))
    assert any(p.system.name == "KD45" and desugar(p.conclusion) == want for _, p in CORPUS)


def test_s5_truth_instance_in_corpus():
    assert any(p.system.name == "S5" and match_axiom(p.conclusion, "T") for _, p in CORPUS)


def test_broken_proof_rejected(tmp_path):
    data = {"system": "K", "language": "LK",
            "lines": [{"formula": "p | ~p", "just": "taut"},
                      {"formula": "K(p | ~p)", "just": {"nec": 1}},
                      {"formula": "K(p | ~p) -> p | ~p", "just": {"axiom": "T", "subst": {"phi": "p | ~p"}}}]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    r = check_proof(load_proof(path))
    assert not r and r.line == 3


@pytest.mark.parametrize("just", [{"ax": "K"}, "tautology", {"mp": [1]}])
def test_bad_json_justification(just):
    with pytest.raises((ValueError, TypeError)):
        proof_from_dict({"system": "K", "lines": [{"formula": "p", "just": just}]})
