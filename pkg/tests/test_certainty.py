import itertools
import json
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from certlogic.certainty import (
    characteristic_formula, false_belief_states, false_belief_states_by_enumeration,
    is_positive_structure,
)
from certlogic.formula import Not, cert, enumerate_formulas, parse
from certlogic.semantics import eval_formula
from certlogic.structures import (
    GeneralizedProbabilityStructure, SimpleProbabilityStructure, StructureError,
    enumerate_distributions, random_generalized_structure,
)


def simple(assign, pr, props=("p",)):
    states = tuple(assign)
    return SimpleProbabilityStructure(states, props, assign, (1,), pr={1: pr})


def test_measure_zero_state_has_false_belief():
    N = simple({"s1": {"p"}, "s2": set()}, {"s1": 1, "s2": 0})
    r = false_belief_states(N)
    assert r.fb == {"s2"} and r.measure == 0
    assert eval_formula(N, "s2", r.witnesses["s2"]) is False
    assert eval_formula(N, "s2", cert(r.witnesses["s2"])) is True
    assert r.to_dict(N.states) == {"fb": ["s2"], "measure": "0", "witnesses": {"s2": "p"}}
    assert json.loads(r.to_json()) == r.to_dict()


def test_positive_structure_has_none():
    N = simple({"s1": {"p"}, "s2": set()}, {"s1": Fr(1, 2), "s2": Fr(1, 2)})
    assert is_positive_structure(N)
    assert false_belief_states(N).fb == frozenset()


def test_null_state_sharing_a_positive_class():
    N = simple({"s1": {"p"}, "s2": {"p"}}, {"s1": 1, "s2": 0})
    assert not is_positive_structure(N)
    assert false_belief_states(N).fb == frozenset()
    assert false_belief_states_by_enumeration(N) == frozenset()


def test_characteristic_formula():
    N = simple({"s": {"q"}}, {"s": 1}, props=("p", "q"))
    assert characteristic_formula(N, "s") == parse("~p & q")


def test_generalized_structures_rejected():
    G = GeneralizedProbabilityStructure(("s",), (), {"s": ()}, (1,), PR={1: {"s": {"s": 1}}})
    with pytest.raises(StructureError):
        false_belief_states(G)
    with pytest.raises(StructureError):
        false_belief_states(simple({"s": set()}, {"s": 1}), agent=3)


def _grid(n, props):
    states = tuple(f"s{i}" for i in range(n))
    for pr in enumerate_distributions(states, 4):
        for bits in itertools.product(range(1 << len(props)), repeat=n):
            assign = {s: {p for j, p in enumerate(props) if b >> j & 1} for s, b in zip(states, bits)}
            yield simple(assign, pr, props)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_class_characterization_matches_enumeration_on_grid(n):
    for N in _grid(n, ("p",)):
        r = false_belief_states(N)
        assert r.measure == 0
        assert r.fb == false_belief_states_by_enumeration(N)


def test_two_props_sample():
    for k, N in enumerate(_grid(3, ("p", "q"))):
        if k % 7 == 0:
            assert false_belief_states(N).fb == false_belief_states_by_enumeration(N)


def _naive_fb(N, formulas):
    return frozenset(s for s in N.states for f in formulas
                     if eval_formula(N, s, Not(f) & cert(f)))


def test_naive_formula_search_is_contained():
    """Direct evaluation of every small formula finds no extra states."""
    fs = list(enumerate_formulas(("p",), 3, modal="Cert", constants=True))
    for N in list(_grid(3, ("p",)))[::13]:
        naive = _naive_fb(N, fs)
        assert naive <= false_belief_states_by_enumeration(N)
        assert naive == false_belief_states(N).fb


@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_random_structures(seed, n):
    N = random_generalized_structure(n, ("p", "q"), 6, seed=seed, shape="simple")
    r = false_belief_states(N)
    assert r.measure == 0
    assert set(r.witnesses) == r.fb
    for s, phi in r.witnesses.items():
        assert eval_formula(N, s, Not(phi) & cert(phi))


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_positive_means_no_false_beliefs(seed):
    N = random_generalized_structure(4, ("p", "q"), 5, seed=seed, shape="positive-simple")
    assert is_positive_structure(N)
    assert not false_belief_states(N).fb
