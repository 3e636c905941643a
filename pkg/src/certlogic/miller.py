"""Miller's principle: instances, frame checks, countermodel search and the
expert-agent constraint.

The principle ``w1(phi | w2(phi) in I) in I`` is used in its
denominator-free form: with ``E = (w2(phi) in [a, b])``,

    a * w1(E) <= w1(phi & E) <= b * w1(E)

and each side is scaled by the denominator of its rational coefficient so
that all coefficients are integers.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

from certlogic.formula import (
    And, Formula, Implies, Prop, Weight, WeightIn, WeightTerm, conj, desugar,
    format_rational, parse, parse_rational, render,
)
from certlogic.semantics import eval_formula, valid_in_structure
from certlogic.structures import (
    Frame, GeneralizedProbabilityStructure, StructureError, all_assignments,
    is_uniform, structure_from_frame, support_relation,
)

__all__ = [
    "Interval", "MillerInstance", "miller_instance", "stronger_miller_instance",
    "default_battery", "introspection_formula", "MillerReport", "check_miller_theorem",
    "nonuniform_countermodel", "NoCountermodelFound", "s_good",
    "equivalence_class_constraint", "battery_from_json", "battery_to_json",
]

MAX_ASSIGNMENTS = 1 << 16


class NoCountermodelFound(RuntimeError):
    """The search found no falsified instance on a non-uniform frame."""


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"need 0 <= lo <= hi <= 1, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, c) -> "Interval":
        return cls(c, c)

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


@dataclass(frozen=True)
class MillerInstance:
    phi: Formula
    interval: Interval
    agents: tuple[int, int]
    formula: Formula = field(compare=False)     # with interval sugar
    rendered: Formula = field(compare=False)    # canonical weight form

    def __str__(self) -> str:
        return render(self.formula, multi_agent=self.agents != (1, 1))


def _side(pos: Formula, neg: Formula, coeff: Fraction, agent: int, lower: bool) -> Weight:
    """``w(pos) >= coeff*w(neg)`` (lower) or ``coeff*w(neg) >= w(pos)``,
    cleared of denominators, zero terms dropped, coefficients reduced."""
    p, q = coeff.numerator, coeff.denominator
    sign = 1 if lower else -1
    terms = [(sign * q, pos), (-sign * p, neg)]
    terms = [(c, f) for c, f in terms if c]
    g = 0
    for c, _ in terms:
        g = gcd(g, c)
    return Weight(tuple(WeightTerm(c // g, agent, f) for c, f in terms), ">=", Fraction(0))


def _build(phi: Formula, event: Formula, I: Interval, w1: int) -> Formula:
    both = And(phi, event)
    return And(_side(both, event, I.lo, w1, True), _side(both, event, I.hi, w1, False))


def miller_instance(phi: Formula, I: Interval, w1: int = 1, w2: int = 1) -> MillerInstance:
    """The instance of the principle for *phi* and *I*."""
    if not isinstance(I, Interval):
        I = Interval(*I)
    event = WeightIn(w2, phi, I.lo, I.hi)
    f = _build(phi, event, I, w1)
    return MillerInstance(phi, I, (w1, w2), f, desugar(f))


def stronger_miller_instance(phi: Formula, psi_atoms: Sequence[Formula], I: Interval,
                             w1: int = 1, w2: int = 1) -> Formula:
    """Instance conditioned on ``psi & (w2(phi) in I)``; *psi_atoms* are
    ``w2(chi) in J`` atoms.  Returned in canonical form."""
    if not isinstance(I, Interval):
        I = Interval(*I)
    for a in psi_atoms:
        if not isinstance(a, WeightIn) or a.agent != w2:
            raise ValueError(f"conditioning atom must be w_{w2}(chi) in [a, b]: {render(a)}")
        Interval(a.lo, a.hi)
    if not psi_atoms:
        return miller_instance(phi, I, w1, w2).rendered
    event = And(conj(list(psi_atoms)), WeightIn(w2, phi, I.lo, I.hi))
    return desugar(_build(phi, event, I, w1))


def introspection_formula(a, agent: int = 1, prop: str = "p") -> Formula:
    """``w(p) > a -> w(w(p) > a) = 1``: valid on uniform frames, but not a
    consequence of the principle plus the probability axioms."""
    a = Fraction(a)
    p = Prop(prop)
    above = Weight((WeightTerm(1, agent, p),), ">", a)
    return Implies(above, Weight((WeightTerm(1, agent, above),), "=", Fraction(1)))


_ENDPOINTS = [Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
              Fraction(2, 3), Fraction(3, 4), Fraction(1)]


def default_battery(agents: tuple[int, int] = (1, 1), prop: str = "p") -> list[MillerInstance]:
    """Fifty instances over one proposition.

    ``p`` with all 28 intervals over a grid of endpoints, ``~p`` with the
    first 14 of them, and 8 with a higher-order ``phi``.
    """
    p = Prop(prop)
    intervals = [Interval(a, b) for a, b in itertools.combinations_with_replacement(_ENDPOINTS, 2)]
    out = [miller_instance(p, I, *agents) for I in intervals]
    out += [miller_instance(~p, I, *agents) for I in intervals[:14]]
    high = parse(f"w_{agents[1]}({prop}) >= 1/2")
    for I in [Interval(0, 0), Interval(1, 1), Interval(0, 1), Interval(Fraction(1, 2), 1),
              Interval(0, Fraction(1, 2)), Interval.point(Fraction(1, 2)),
              Interval(Fraction(1, 4), Fraction(3, 4)), Interval.point(Fraction(1, 3))]:
        out.append(miller_instance(high, I, *agents))
    return out


# --------------------------------------------------------------------------
# frames

@dataclass
class MillerReport:
    uniform: bool
    all_valid: bool
    counterexample: tuple | None = None       # (assignment, state, instance)
    countermodel: tuple | None = None         # (structure, instance, state)
    countermodel_error: str | None = None
    extra_valid: bool | None = None

    def to_dict(self) -> dict:
        out = {"uniform": self.uniform, "all_valid": self.all_valid}
        if self.counterexample:
            assign, s, inst = self.counterexample
            out["counterexample"] = {
                "assignment": {k: sorted(v) for k, v in assign.items()},
                "state": s, "instance": str(inst)}
        if self.countermodel:
            N, inst, s = self.countermodel
            out["countermodel"] = {
                "assignment": {k: sorted(v) for k, v in N.assign.items()},
                "state": s, "instance": str(inst)}
        if self.countermodel_error:
            out["countermodel_error"] = self.countermodel_error
        if self.extra_valid is not None:
            out["extra_valid"] = self.extra_valid
        return out


def _frame_agents(F: Frame, instances: Iterable[MillerInstance]):
    for inst in instances:
        for a in inst.agents:
            if a not in F.agents:
                raise StructureError(f"instance uses agent {a} not declared in the frame")


def _check_assignment(args) -> tuple[tuple[str, int] | None, bool]:
    """First failing (state, battery index) and whether all extras hold."""
    F, props, battery, extra, assign = args
    N = structure_from_frame(F, props, assign)
    fail = None
    for k, inst in enumerate(battery):
        ok, s = valid_in_structure(N, inst.rendered)
        if not ok:
            fail = (s, k)
            break
    return fail, all(valid_in_structure(N, f)[0] for f in extra)


def check_miller_theorem(F: Frame, battery: Sequence[MillerInstance] | None = None,
                         props: Sequence[str] = ("p",), agent: int = 1,
                         extra: Sequence[Formula] = (), jobs: int = 1) -> MillerReport:
    """Uniformity of *F* against validity of every battery instance in every
    structure on *F* over *props*.

    *extra* formulas are checked in the same structures and reported
    separately.  On a non-uniform frame the countermodel search is run; if
    it finds nothing the report carries the reason.  With ``jobs > 1`` the
    assignments are checked in worker processes; the report is the same.
    """
    battery = list(battery) if battery is not None else default_battery((agent, agent))
    if not battery:
        raise ValueError("empty battery")
    _frame_agents(F, battery)
    if 2 ** (len(F.states) * len(props)) > MAX_ASSIGNMENTS:
        raise ValueError("too many truth assignments to enumerate")
    props = tuple(props)
    extra = tuple(extra)
    assigns = list(all_assignments(F.states, props))
    tasks = [(F, props, battery, extra, a) for a in assigns]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_check_assignment, tasks, chunksize=8))
    else:
        results = []
        for t in tasks:
            results.append(_check_assignment(t))
            if results[-1][0] is not None and not extra:
                break
    report = MillerReport(is_uniform(F, agent), True)
    for assign, (fail, _) in zip(assigns, results):
        if fail is not None:
            report.all_valid = False
            report.counterexample = (assign, fail[0], battery[fail[1]])
            break
    if extra:
        report.extra_valid = all(ok for _, ok in results)
    if not report.uniform:
        try:
            report.countermodel = nonuniform_countermodel(F, agent)
        except NoCountermodelFound as e:
            report.countermodel_error = str(e)
    return report


def _mass(d: Mapping[str, Fraction], B: Iterable[str]) -> Fraction:
    return sum((d[t] for t in B), Fraction(0))


def nonuniform_countermodel(F: Frame, agent: int = 1, prop: str = "p"
                            ) -> tuple[GeneralizedProbabilityStructure, MillerInstance, str]:
    """A structure on *F*, an instance and a state where the instance fails.

    Searches events ``B`` (the set where *prop* holds; singletons first, in
    state order), intervals whose endpoints are probabilities of ``B``
    (point intervals first) and states.  Every hit is confirmed by the
    model checker.  Raises :class:`NoCountermodelFound` when no instance
    over one proposition fails, which happens on some non-uniform frames.
    """
    if is_uniform(F, agent):
        raise ValueError("frame is uniform; every instance is valid")
    p = Prop(prop)
    states = F.states
    PR = F.PR[agent]
    subsets = [B for r in range(1, len(states) + 1) for B in itertools.combinations(states, r)]
    for B in subsets:
        N = structure_from_frame(F, (prop,), {s: ((prop,) if s in B else ()) for s in states})
        values = sorted({_mass(PR[y], B) for y in states})
        intervals = [Interval.point(v) for v in values]
        intervals += [Interval(a, b) for a, b in itertools.combinations(values, 2)]
        for I in intervals:
            inst = miller_instance(p, I, agent, agent)
            for s in states:
                if not eval_formula(N, s, inst.rendered):
                    return N, inst, s
    raise NoCountermodelFound(
        "no instance over one proposition is falsified on this frame: at every "
        "support-linked pair the conditional probabilities stay inside the interval")


def nonuniform_witness_pairs(F: Frame, agent: int = 1) -> list[tuple[str, str]]:
    """Support-linked pairs whose distributions differ."""
    PR = F.PR[agent]
    return sorted((s, t) for s, t in support_relation(F, agent) if PR[s] != PR[t])


# --------------------------------------------------------------------------
# expert agents

def s_good(N, expert: int = 1, agent: int = 2) -> frozenset[str]:
    """States where the expert is certain of its own distribution."""
    N.check_agent(expert)
    N.check_agent(agent)
    PR = N.PR[expert]
    out = set()
    for s in N.states:
        cls = [t for t in N.states if PR[t] == PR[s]]
        if _mass(PR[s], cls) == 1:
            out.add(s)
    return frozenset(out)


def equivalence_class_constraint(N, expert: int = 1, agent: int = 2) -> bool:
    """``pr_agent(S_good) = 1``; the agent's distribution must not depend on
    the state."""
    N.check_agent(agent)
    PR = N.PR[agent]
    first = PR[N.states[0]]
    if any(PR[s] != first for s in N.states):
        raise ValueError(f"distribution of agent {agent} varies with the state")
    return _mass(first, s_good(N, expert, agent)) == 1


# --------------------------------------------------------------------------
# battery files

def battery_from_json(text: str) -> list[MillerInstance]:
    out = []
    for item in json.loads(text):
        lo, hi = (parse_rational(x) for x in item["interval"])
        w1, w2 = item.get("agents", [1, 1])
        out.append(miller_instance(parse(item["phi"]), Interval(lo, hi), int(w1), int(w2)))
    return out


def battery_to_json(battery: Sequence[MillerInstance]) -> str:
    items = [{"phi": render(m.phi, multi_agent=True),
              "interval": [format_rational(m.interval.lo), format_rational(m.interval.hi)],
              "agents": list(m.agents)} for m in battery]
    return json.dumps(items, indent=2)
