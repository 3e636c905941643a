import itertools
from fractions import Fraction as Fr
from importlib import resources

import pytest
from hypothesis import given, strategies as st

from certlogic import structures as S
from certlogic.structures import (
    Frame, GeneralizedProbabilityStructure, KnowledgeStructure, SimpleProbabilityStructure,
    StructureError, count_knowledge_structures, embed_simple, enumerate_distributions,
    enumerate_frames, enumerate_knowledge_structures, frame_properties, is_uniform,
    random_generalized_structure, support_relation, to_knowledge_structure,
)

SAMPLES = resources.files("certlogic") / "data" / "samples"


def gen(PR, props=(), assign=None):
    states = tuple(PR)
    return GeneralizedProbabilityStructure(states, props, assign or {s: () for s in states}, (1,),
                                           PR={1: PR})


def test_coin_sample():
    N = S.loads((SAMPLES / "coin.json").read_text())
    assert isinstance(N, GeneralizedProbabilityStructure)
    assert len(N.states) == 4
    assert N.PR[1]["biased"]["biased"] == Fr(1, 3)
    assert to_knowledge_structure(N).successors(1, "fair") == ["fair", "fair_tails"]
    assert to_knowledge_structure(N).successors(1, "biased_tails") == ["biased", "biased_tails"]


def test_one_state_structure():
    N = SimpleProbabilityStructure(("s",), (), {"s": ()}, (1,), pr={1: {"s": 1}})
    assert N.pr[1]["s"] == 1
    assert to_knowledge_structure(N).K[1] == {("s", "s")}


@pytest.mark.parametrize("pr", [{"s": Fr(2, 3)}, {"s": Fr(3, 2), "t": Fr(-1, 2)}, {"s": 1, "u": 0}])
def test_bad_distributions_rejected(pr):
    with pytest.raises(StructureError):
        SimpleProbabilityStructure(("s", "t"), (), {"s": (), "t": ()}, (1,), pr={1: pr})


@pytest.mark.parametrize("data", [
    {"type": "simple", "agents": ["x"], "states": ["s"], "pr": {"x": {"s": "1"}}},
    {"type": "simple", "agents": ["1"], "states": ["s"], "pr": {"1": {"s": "0.5"}}},
    {"type": "mystery"},
    {"type": "knowledge", "states": ["s"], "K": {"1": [["s", "t"]]}},
    {"type": "simple", "states": ["s"], "pr": {"1": {"s": "1"}}, "K": {"1": []}},
])
def test_bad_files_rejected(data):
    with pytest.raises(StructureError):
        S.from_dict(data)


def test_support_relation_examples():
    assert support_relation(gen({"s": {"s": 1}})) == {("s", "s")}
    N = gen({"s": {"s": Fr(1, 3), "t": Fr(2, 3)}, "t": {"t": 1}})
    assert support_relation(N) == {("s", "s"), ("s", "t"), ("t", "t")}


@pytest.mark.parametrize("rel, states, expected", [
    ({("s", "s")}, ("s",), dict(reflexive=True, transitive=True, symmetric=True, euclidean=True, serial=True)),
    (set(), ("s",), dict(reflexive=False, transitive=True, symmetric=True, euclidean=True, serial=False)),
    ({("s", "t"), ("t", "t")}, ("s", "t"), dict(reflexive=False, transitive=True, symmetric=False, euclidean=True, serial=True)),
])
def test_frame_properties_examples(rel, states, expected):
    assert vars(frame_properties(rel, states)) == expected


def _naive_props(rel, states):
    R = lambda a, b: (a, b) in rel  # noqa: E731
    return dict(
        reflexive=all(R(s, s) for s in states),
        transitive=all(not (R(a, b) and R(b, c)) or R(a, c) for a in states for b in states for c in states),
        symmetric=all(not R(a, b) or R(b, a) for a in states for b in states),
        euclidean=all(not (R(a, b) and R(a, c)) or R(b, c) for a in states for b in states for c in states),
        serial=all(any(R(a, b) for b in states) for a in states),
    )


@pytest.mark.parametrize("n", [1, 2, 3])
def test_frame_properties_match_naive_oracle_exhaustively(n):
    states = tuple(f"s{i}" for i in range(n))
    pairs = list(itertools.product(states, states))
    for bits in range(1 << len(pairs)):
        rel = {e for k, e in enumerate(pairs) if bits >> k & 1}
        assert vars(frame_properties(rel, states)) == _naive_props(rel, states)


@given(st.sets(st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd"))))
def test_frame_properties_match_naive_oracle_on_four_states(rel):
    assert vars(frame_properties(rel, tuple("abcd"))) == _naive_props(rel, tuple("abcd"))


def test_equivalence_relations_are_symmetric():
    for n in (1, 2, 3):
        states = tuple(range(n))
        for K in enumerate_knowledge_structures(n, (), {"reflexive": True, "euclidean": True, "transitive": True}, exact=True):
            assert frame_properties(K.K[1], K.states).symmetric


@pytest.mark.parametrize("PR, uniform", [
    ({"s": {"s": Fr(1, 2), "t": Fr(1, 2)}, "t": {"t": 1}}, False),
    ({"s": {"s": 1}, "t": {"t": 1}}, True),
    ({"s": {"t": 1}, "t": {"t": 1}}, True),
    ({"s": {"t": 1}, "t": {"s": 1}}, False),
])
def test_is_uniform_examples(PR, uniform):
    assert is_uniform(gen(PR)) is uniform


def test_embed_simple():
    N = SimpleProbabilityStructure(("s", "t"), (), {"s": (), "t": ()}, (1,), pr={1: {"s": Fr(1, 2), "t": Fr(1, 2)}})
    G = embed_simple(N)
    assert G.PR[1]["s"] == G.PR[1]["t"] == {"s": Fr(1, 2), "t": Fr(1, 2)}
    assert is_uniform(G) and is_uniform(N)


@pytest.mark.parametrize("n, props, constraints, exact, count", [
    (1, (), None, True, 2),
    (1, (), {"serial": True}, True, 1),
    (2, ("p",), None, True, 64),        # 2^4 relations x 2^2 assignments
    (2, ("p",), None, False, 4 + 64),
])
def test_enumerate_knowledge_structures_counts(n, props, constraints, exact, count):
    assert sum(1 for _ in enumerate_knowledge_structures(n, props, constraints, exact=exact)) == count


def test_count_is_closed_form():
    assert count_knowledge_structures(2, ("p",), exact=True) == 2 ** 4 * 2 ** 2
    assert count_knowledge_structures(3, ("p", "q"), exact=True) == 2 ** 9 * 2 ** 6


def test_enumeration_limit():
    with pytest.raises(S.ResourceLimitExceeded):
        list(enumerate_knowledge_structures(3, ("p",), limit=100))


def _compositions(n_states, den):
    """All distributions with every mass a multiple of 1/den."""
    return {tuple(Fr(c, den) for c in combo)
            for combo in itertools.product(range(den + 1), repeat=n_states) if sum(combo) == den}


@pytest.mark.parametrize("n, max_den, count", [(2, 3, 5), (3, 4, 22), (2, 4, 7)])
def test_enumerate_distributions(n, max_den, count):
    states = tuple(f"s{i}" for i in range(n))
    got = {tuple(d[s] for s in states) for d in enumerate_distributions(states, max_den)}
    oracle = set().union(*(_compositions(n, d) for d in range(1, max_den + 1)))
    assert got == oracle and len(got) == count


def test_enumerate_frames():
    assert sum(1 for _ in enumerate_frames(2, 3)) == 25
    assert sum(1 for _ in enumerate_frames(3, 4)) == 22 ** 3


@given(st.integers(0, 10 ** 6), st.sampled_from(["any", "uniform", "simple", "positive-simple"]),
       st.integers(1, 4))
def test_random_structures(seed, shape, n):
    a = random_generalized_structure(n, ("p", "q"), 4, seed=seed, shape=shape)
    b = random_generalized_structure(n, ("p", "q"), 4, seed=seed, shape=shape)
    assert S.dumps(a) == S.dumps(b)
    if shape == "positive-simple":
        assert all(v > 0 for v in a.pr[1].values())
    if shape == "uniform":
        assert is_uniform(a)
    rel = support_relation(a)
    assert frame_properties(rel, a.states).serial


@given(st.integers(0, 10 ** 6))
def test_uniform_support_is_kd45(seed):
    N = random_generalized_structure(4, ("p",), 4, seed=seed, shape="uniform")
    fp = frame_properties(support_relation(N), N.states)
    assert fp.serial and fp.transitive and fp.euclidean


def test_uniform_support_is_kd45_exhaustively():
    for F in enumerate_frames(3, 3):
        if is_uniform(F):
            fp = frame_properties(support_relation(F), F.states)
            assert fp.serial and fp.transitive and fp.euclidean


@given(st.integers(0, 10 ** 6), st.sampled_from(["any", "simple"]))
def test_json_roundtrip(seed, shape):
    N = random_generalized_structure(3, ("p",), 4, seed=seed, shape=shape)
    assert S.loads(S.dumps(N)) == N
    K = to_knowledge_structure(N)
    assert S.loads(S.dumps(K)) == K


def test_frame_json_roundtrip():
    F = S.loads((SAMPLES / "frame_nonuniform.json").read_text())
    assert isinstance(F, Frame)
    assert S.loads(S.dumps(F)) == F
    assert not is_uniform(F)
