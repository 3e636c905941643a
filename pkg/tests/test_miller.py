import itertools
import json
from fractions import Fraction as Fr
from importlib import resources

import pytest
from hypothesis import given, settings, strategies as st

from certlogic import structures as S
from certlogic.formula import Prop, Weight, desugar, parse, render
from certlogic.miller import (
    Interval, NoCountermodelFound, battery_from_json, battery_to_json, check_miller_theorem,
    default_battery, equivalence_class_constraint, introspection_formula, miller_instance,
    nonuniform_countermodel, nonuniform_witness_pairs, s_good, stronger_miller_instance,
)
from certlogic.semantics import eval_formula, satisfying_states, valid_in_structure
from certlogic.structures import (
    Frame, GeneralizedProbabilityStructure, enumerate_frames, is_uniform,
    random_generalized_structure, structure_from_frame,
)

SAMPLES = resources.files("certlogic") / "data" / "samples"
P = Prop("p")


def frame(PR, agents=(1,)):
    states = tuple(next(iter(PR.values())))
    return Frame(states, agents, PR)


@pytest.mark.parametrize("lo, hi", [(2, 3), (Fr(1, 2), Fr(1, 3)), (-1, 0)])
def test_interval_errors(lo, hi):
    with pytest.raises(ValueError):
        Interval(lo, hi)


def test_interval_point_and_str():
    assert Interval.point(Fr(1, 3)) == Interval(Fr(1, 3), Fr(1, 3))
    assert str(Interval(0, Fr(1, 2))) == "[0, 1/2]"


def test_full_interval_instance_is_trivial():
    inst = miller_instance(P, Interval(0, 1))
    for seed in range(20):
        N = random_generalized_structure(3, ("p",), 4, seed=seed)
        assert valid_in_structure(N, inst.rendered)[0]


def test_point_instance_is_cleared():
    inst = miller_instance(P, Interval.point(Fr(1, 3)))
    lower, upper = inst.rendered.left, inst.rendered.right
    assert isinstance(lower, Weight) and isinstance(upper, Weight)
    assert sorted(abs(t.coeff) for t in lower.terms) == [1, 3]
    assert sorted(abs(t.coeff) for t in upper.terms) == [1, 3]
    assert lower.bound == upper.bound == 0


def _direct(N, x, phi, I, w1, w2):
    """Conditional-probability reading of the instance, with no clearing."""
    ext = satisfying_states(N, phi)
    E = {y for y in N.states if I.lo <= sum((N.PR[w2][y][t] for t in ext), Fr(0)) <= I.hi}
    d = N.PR[w1][x]
    wE = sum((d[t] for t in E), Fr(0))
    wPE = sum((d[t] for t in E & set(ext)), Fr(0))
    return I.lo * wE <= wPE <= I.hi * wE


@settings(max_examples=80)
@given(st.integers(0, 10 ** 6), st.sampled_from(default_battery()),
       st.sampled_from([(1, 1), (1, 2), (2, 1)]))
def test_instance_matches_direct_evaluation(seed, base, agents):
    inst = miller_instance(base.phi, base.interval, *agents)
    N = random_generalized_structure(3, ("p",), 4, seed=seed, agents=(1, 2))
    for x in N.states:
        assert eval_formula(N, x, inst.rendered) == _direct(N, x, desugar(inst.phi), inst.interval, *agents)


def test_stronger_instance():
    assert stronger_miller_instance(P, [], Interval(0, 0)) == miller_instance(P, Interval(0, 0)).rendered
    f = stronger_miller_instance(P, [parse("w(q) in [1/2, 1]")], Interval(0, 0))
    event = desugar(parse("p & w(q) in [1/2, 1] & w(p) in [0, 0]"))
    for seed in range(30):
        N = random_generalized_structure(3, ("p", "q"), 4, seed=seed)
        ext = satisfying_states(N, event)
        for x in N.states:
            # I = [0, 0]: both sides reduce to w(p & E) = 0
            assert eval_formula(N, x, f) == (sum((N.PR[1][x][t] for t in ext), Fr(0)) == 0)
    with pytest.raises(ValueError):
        stronger_miller_instance(P, [parse("q")], Interval(0, 0))
    with pytest.raises(ValueError):
        stronger_miller_instance(P, [parse("w_2(q) in [0, 1]")], Interval(0, 0), 1, 1)


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6), st.sampled_from(default_battery()[:28]),
       st.sampled_from(["0", "1/2", "1/3"]))
def test_stronger_instance_sound_on_uniform_structures(seed, base, c):
    N = random_generalized_structure(3, ("p", "q"), 4, seed=seed, shape="uniform")
    psi = parse(f"w(q) in [{c}, 1]")
    assert valid_in_structure(N, stronger_miller_instance(P, [psi], base.interval))[0]


def test_default_battery():
    b = default_battery()
    assert len(b) == 50 and len({(render(m.phi), m.interval) for m in b}) == 50
    assert json.loads(battery_to_json(b))[0] == {"phi": "p", "interval": ["0", "0"], "agents": [1, 1]}
    back = battery_from_json(battery_to_json(b))
    assert [m.rendered for m in back] == [m.rendered for m in b]


def test_bundled_battery_file():
    b = battery_from_json((SAMPLES / "battery.json").read_text())
    assert len(b) == 6


def test_single_state_frame():
    r = check_miller_theorem(frame({1: {"s": {"s": 1}}}))
    assert r.uniform and r.all_valid


def test_uniform_two_state_frame():
    F = frame({1: {"s": {"s": Fr(1, 2), "t": Fr(1, 2)}, "t": {"s": Fr(1, 2), "t": Fr(1, 2)}}})
    r = check_miller_theorem(F)
    assert r.uniform and r.all_valid and r.countermodel is None


def test_uniform_frames_validate_battery_exhaustively():
    battery = default_battery()
    for F in enumerate_frames(2, 3):
        if is_uniform(F):
            assert check_miller_theorem(F, battery).all_valid


def test_nonuniform_example():
    F = frame({1: {"s": {"s": Fr(1, 2), "t": Fr(1, 2)}, "t": {"t": 1}}})
    N, inst, s = nonuniform_countermodel(F)
    assert (N.assign["s"], N.assign["t"]) == ({"p"}, frozenset())
    assert inst.interval == Interval.point(Fr(1, 2)) and s == "s"
    assert not eval_formula(N, s, inst.rendered)
    r = check_miller_theorem(F)
    assert not r.uniform and not r.all_valid and r.countermodel is not None


def test_zero_point_interval_on_t_is_not_a_countermodel():
    """p true only at t with the point interval [0, 0] holds at every state."""
    F = frame({1: {"s": {"s": Fr(1, 2), "t": Fr(1, 2)}, "t": {"t": 1}}})
    N = structure_from_frame(F, ("p",), {"t": ("p",)})
    assert valid_in_structure(N, miller_instance(P, Interval(0, 0)).rendered)[0]


def test_uniform_frame_rejected():
    with pytest.raises(ValueError):
        nonuniform_countermodel(frame({1: {"s": {"s": 1}}}))


def test_reflection_frame_has_no_one_prop_countermodel():
    F = S.loads((SAMPLES / "frame_reflection.json").read_text())
    assert not is_uniform(F)
    assert nonuniform_witness_pairs(F) == [("s", "a"), ("s", "b")]
    with pytest.raises(NoCountermodelFound):
        nonuniform_countermodel(F)
    r = check_miller_theorem(F, props=("p", "q"))
    assert not r.uniform and r.all_valid and r.countermodel_error


def test_introspection_formula():
    f = introspection_formula(Fr(1, 2))
    for F in enumerate_frames(2, 3):
        if is_uniform(F):
            assert check_miller_theorem(F, default_battery()[:1], extra=[f]).extra_valid
    F = frame({1: {"s": {"s": Fr(1, 2), "t": Fr(1, 2)}, "t": {"s": 1}}})
    assert check_miller_theorem(F, default_battery()[:1], extra=[f]).extra_valid is False


def test_parallel_check_matches_serial():
    F = S.loads((SAMPLES / "frame_nonuniform.json").read_text())
    a = check_miller_theorem(F).to_dict()
    b = check_miller_theorem(F, jobs=2).to_dict()
    assert a == b


def two_agent(PR1, PR2):
    states = tuple(PR1)
    return GeneralizedProbabilityStructure(states, (), {s: () for s in states}, (1, 2),
                                           PR={1: PR1, 2: PR2})


H = {"s": Fr(1, 2), "t": Fr(1, 2)}


@pytest.mark.parametrize("PR1, good", [
    ({"s": {"s": 1}, "t": {"t": 1}}, {"s", "t"}),
    ({"s": H, "t": H}, {"s", "t"}),
    ({"s": H, "t": {"s": 1}}, set()),
])
def test_s_good(PR1, good):
    N = two_agent(PR1, {"s": H, "t": H})
    assert s_good(N) == good


def _s_good_brute(N, expert):
    """Largest set C containing s on which PR_expert is constant, checked over all subsets."""
    PR = N.PR[expert]
    out = set()
    for s in N.states:
        for r in range(1, len(N.states) + 1):
            for C in itertools.combinations(N.states, r):
                if s in C and all(PR[t] == PR[s] for t in C) and \
                        all(t in C for t in N.states if PR[t] == PR[s]):
                    if sum((PR[s][t] for t in C), Fr(0)) == 1:
                        out.add(s)
    return out


@given(st.integers(0, 10 ** 6))
def test_s_good_brute_force(seed):
    N = random_generalized_structure(3, (), 3, seed=seed, agents=(1, 2))
    assert s_good(N) == _s_good_brute(N, 1)


def test_equivalence_class_constraint():
    assert equivalence_class_constraint(two_agent({"s": {"s": 1}, "t": {"t": 1}}, {"s": H, "t": H}))
    assert not equivalence_class_constraint(two_agent({"s": H, "t": {"s": 1}}, {"s": H, "t": H}))
    ok = two_agent({"s": {"s": 1}, "t": H}, {"s": {"s": 1}, "t": {"s": 1}})
    assert s_good(ok) == {"s"} and equivalence_class_constraint(ok)
    with pytest.raises(ValueError):
        equivalence_class_constraint(two_agent({"s": H, "t": H}, {"s": {"s": 1}, "t": {"t": 1}}))
