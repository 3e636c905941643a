"""Knowledge structures, probability structures and probability frames.

All probabilities are :class:`fractions.Fraction`; state sets are finite.
Every structure carries a tuple of agent ids (positive integers); the
single-agent fragments use agent ``1``.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from certlogic.formula import format_rational, parse_rational

__all__ = [
    "StructureError", "ResourceLimitExceeded",
    "KnowledgeStructure", "SimpleProbabilityStructure",
    "GeneralizedProbabilityStructure", "Frame", "FrameProperties",
    "frame_properties", "support_relation", "is_uniform",
    "to_knowledge_structure", "embed_simple", "structure_from_frame",
    "load", "save", "loads", "dumps", "to_dict", "from_dict",
    "enumerate_knowledge_structures", "count_knowledge_structures",
    "enumerate_distributions", "enumerate_frames",
    "enumerate_generalized_structures", "enumerate_simple_structures",
    "all_assignments", "random_generalized_structure", "rational_grid",
]

Relation = frozenset  # of (state, state) pairs
Distribution = Mapping[str, Fraction]


class StructureError(ValueError):
    """A structure violates its invariants or a file is malformed."""


class ResourceLimitExceeded(RuntimeError):
    """An enumeration or search would exceed its configured budget."""


def _check_states(states: Sequence[str]) -> tuple[str, ...]:
    states = tuple(states)
    if not states:
        raise StructureError("a structure needs at least one state")
    if len(set(states)) != len(states):
        raise StructureError("duplicate state ids")
    return states


def _check_assign(states, props, assign) -> dict[str, frozenset[str]]:
    out = {}
    for s in states:
        true = frozenset(assign.get(s, ()))
        unknown = true - set(props)
        if unknown:
            raise StructureError(f"undeclared props {sorted(unknown)} at state {s!r}")
        out[s] = true
    extra = set(assign) - set(states)
    if extra:
        raise StructureError(f"assignment for undeclared states {sorted(extra)}")
    return out


def _check_agents(agents) -> tuple[int, ...]:
    agents = tuple(agents)
    if not agents:
        raise StructureError("at least one agent is required")
    for a in agents:
        if not isinstance(a, int) or isinstance(a, bool) or a < 1:
            raise StructureError(f"agent ids are positive integers, got {a!r}")
    return agents


def _check_dist(dist: Mapping[str, Fraction], states, where: str) -> dict[str, Fraction]:
    out = {s: Fraction(0) for s in states}
    for t, v in dist.items():
        if t not in out:
            raise StructureError(f"{where}: undeclared state {t!r}")
        v = Fraction(v)
        if v < 0:
            raise StructureError(f"{where}: negative probability for {t!r}")
        out[t] = v
    total = sum(out.values())
    if total != 1:
        raise StructureError(f"{where}: probabilities sum to {total}, not 1")
    return out


def _check_relation(rel: Iterable, states, where: str) -> frozenset[tuple[str, str]]:
    known = set(states)
    out = frozenset((s, t) for s, t in rel)
    for s, t in out:
        if s not in known or t not in known:
            raise StructureError(f"{where}: relation mentions undeclared state")
    return out


@dataclass(frozen=True)
class _Base:
    states: tuple[str, ...]
    props: tuple[str, ...]
    assign: Mapping[str, frozenset[str]]
    agents: tuple[int, ...]
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", _check_states(self.states))
        object.__setattr__(self, "props", tuple(self.props))
        object.__setattr__(self, "agents", _check_agents(self.agents))
        object.__setattr__(self, "assign", _check_assign(self.states, self.props, self.assign))

    def check_agent(self, agent: int):
        if agent not in self.agents:
            raise StructureError(f"undeclared agent {agent}")

    def check_state(self, s: str):
        if s not in self.assign:
            raise StructureError(f"undeclared state {s!r}")


@dataclass(frozen=True)
class KnowledgeStructure(_Base):
    """``(S, pi, K_1..K_n)``."""

    K: Mapping[int, frozenset[tuple[str, str]]] = field(default_factory=dict)

    def __post_init__(self):
        super().__post_init__()
        rels = {}
        for a in self.agents:
            rels[a] = _check_relation(self.K.get(a, ()), self.states, f"K[{a}]")
        extra = set(self.K) - set(self.agents)
        if extra:
            raise StructureError(f"relation for undeclared agents {sorted(extra)}")
        object.__setattr__(self, "K", rels)

    def successors(self, agent: int, s: str) -> list[str]:
        rel = self.K[agent]
        return [t for t in self.states if (s, t) in rel]


@dataclass(frozen=True)
class SimpleProbabilityStructure(_Base):
    """``(S, pi, pr_1..pr_n)``: one distribution per agent.

    An optional accessibility relation ``K`` may be attached for mixed
    formulas.
    """

    pr: Mapping[int, Mapping[str, Fraction]] = field(default_factory=dict)
    K: Mapping[int, frozenset[tuple[str, str]]] | None = None

    def __post_init__(self):
        super().__post_init__()
        pr = {}
        for a in self.agents:
            if a not in self.pr:
                raise StructureError(f"no distribution for agent {a}")
            pr[a] = _check_dist(self.pr[a], self.states, f"pr[{a}]")
        extra = set(self.pr) - set(self.agents)
        if extra:
            raise StructureError(f"distribution for undeclared agents {sorted(extra)}")
        object.__setattr__(self, "pr", pr)
        if self.K is not None:
            object.__setattr__(self, "K", {
                a: _check_relation(self.K.get(a, ()), self.states, f"K[{a}]")
                for a in self.agents})

    def distribution(self, agent: int, s: str) -> Mapping[str, Fraction]:
        return self.pr[agent]


@dataclass(frozen=True)
class GeneralizedProbabilityStructure(_Base):
    """``(S, pi, PR_1..PR_n)``: a distribution per agent and state."""

    PR: Mapping[int, Mapping[str, Mapping[str, Fraction]]] = field(default_factory=dict)
    K: Mapping[int, frozenset[tuple[str, str]]] | None = None

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "PR", _check_PR(self.PR, self.states, self.agents))
        if self.K is not None:
            object.__setattr__(self, "K", {
                a: _check_relation(self.K.get(a, ()), self.states, f"K[{a}]")
                for a in self.agents})

    def distribution(self, agent: int, s: str) -> Mapping[str, Fraction]:
        return self.PR[agent][s]


def _check_PR(PR, states, agents):
    out = {}
    for a in agents:
        if a not in PR:
            raise StructureError(f"no distributions for agent {a}")
        per = {}
        for s in states:
            if s not in PR[a]:
                raise StructureError(f"PR[{a}] has no distribution at state {s!r}")
            per[s] = _check_dist(PR[a][s], states, f"PR[{a}][{s}]")
        extra = set(PR[a]) - set(states)
        if extra:
            raise StructureError(f"PR[{a}] mentions undeclared states {sorted(extra)}")
        out[a] = per
    extra = set(PR) - set(agents)
    if extra:
        raise StructureError(f"distributions for undeclared agents {sorted(extra)}")
    return out


@dataclass(frozen=True)
class Frame:
    """``(S, PR)``: a generalized probability structure without valuation."""

    states: tuple[str, ...]
    agents: tuple[int, ...]
    PR: Mapping[int, Mapping[str, Mapping[str, Fraction]]]

    def __post_init__(self):
        object.__setattr__(self, "states", _check_states(self.states))
        object.__setattr__(self, "agents", _check_agents(self.agents))
        object.__setattr__(self, "PR", _check_PR(self.PR, self.states, self.agents))

    def distribution(self, agent: int, s: str) -> Mapping[str, Fraction]:
        return self.PR[agent][s]


@dataclass(frozen=True)
class FrameProperties:
    reflexive: bool
    transitive: bool
    symmetric: bool
    euclidean: bool
    serial: bool

    def satisfies(self, required: Mapping[str, bool] | "FrameProperties" | None) -> bool:
        """True if every flag set in *required* also holds here."""
        if required is None:
            return True
        if isinstance(required, FrameProperties):
            required = {k: v for k, v in vars(required).items() if v}
        return all(getattr(self, k) for k, v in required.items() if v)


def frame_properties(rel: Iterable[tuple[str, str]], states: Sequence[str]) -> FrameProperties:
    rel = set(rel)
    succ = {s: {t for (x, t) in rel if x == s} for s in states}
    return FrameProperties(
        reflexive=all((s, s) in rel for s in states),
        transitive=all((s, u) in rel for s in states for t in succ[s] for u in succ[t]),
        symmetric=all((t, s) in rel for (s, t) in rel),
        euclidean=all((t, u) in rel for s in states for t in succ[s] for u in succ[s]),
        serial=all(succ[s] for s in states),
    )


def support_relation(N, agent: int = 1) -> frozenset[tuple[str, str]]:
    """``{(s, t) : PR(s)(t) > 0}`` for a generalized structure or frame."""
    if isinstance(N, SimpleProbabilityStructure):
        N = embed_simple(N)
    if agent not in N.agents:
        raise StructureError(f"undeclared agent {agent}")
    PR = N.PR[agent]
    return frozenset((s, t) for s in N.states for t in N.states if PR[s][t] > 0)


def is_uniform(N, agent: int | None = None) -> bool:
    """Support-linked states carry the same distribution (all agents by default)."""
    if isinstance(N, SimpleProbabilityStructure):
        return True
    agents = N.agents if agent is None else (agent,)
    for a in agents:
        PR = N.PR[a]
        for s, t in support_relation(N, a):
            if PR[s] != PR[t]:
                return False
    return True


def to_knowledge_structure(N) -> KnowledgeStructure:
    """The knowledge structure whose relations are the support relations."""
    if isinstance(N, SimpleProbabilityStructure):
        N = embed_simple(N)
    return KnowledgeStructure(N.states, N.props, N.assign, N.agents,
                              K={a: support_relation(N, a) for a in N.agents})


def embed_simple(N: SimpleProbabilityStructure) -> GeneralizedProbabilityStructure:
    return GeneralizedProbabilityStructure(
        N.states, N.props, N.assign, N.agents,
        PR={a: {s: dict(N.pr[a]) for s in N.states} for a in N.agents}, K=N.K)


def structure_from_frame(F: Frame, props: Sequence[str],
                         assign: Mapping[str, Iterable[str]]) -> GeneralizedProbabilityStructure:
    return GeneralizedProbabilityStructure(
        F.states, tuple(props), {s: frozenset(assign.get(s, ())) for s in F.states},
        F.agents, PR=F.PR)


# --------------------------------------------------------------------------
# JSON

def _agent_id(name) -> int:
    try:
        a = int(name)
    except (TypeError, ValueError):
        raise StructureError(f"agent names must be positive integers, got {name!r}") from None
    if a < 1 or str(a) != str(name).strip():
        raise StructureError(f"agent names must be positive integers, got {name!r}")
    return a


def _rat(text, where: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise StructureError(f"{where}: {e}") from None


def from_dict(data: Mapping):
    """Build a structure or frame from its JSON object form."""
    if not isinstance(data, Mapping):
        raise StructureError("structure file must hold a JSON object")
    kind = data.get("type")
    if kind not in ("knowledge", "simple", "generalized", "frame"):
        raise StructureError(f"unknown structure type {kind!r}")
    agents = tuple(_agent_id(a) for a in data.get("agents", ["1"]))
    names = {str(a): a for a in agents}

    def agent_key(key) -> int:
        if str(key) not in names:
            raise StructureError(f"undeclared agent {key!r}")
        return names[str(key)]

    raw_states = data.get("states", [])
    states, assign = [], {}
    props = tuple(data.get("props", []))
    for entry in raw_states:
        if isinstance(entry, str):
            sid, asg = entry, {}
        else:
            sid, asg = entry.get("id"), entry.get("assign", {})
        if not isinstance(sid, str):
            raise StructureError(f"state id must be a string, got {sid!r}")
        for p, v in asg.items():
            if p not in props:
                raise StructureError(f"undeclared prop {p!r} at state {sid!r}")
            if not isinstance(v, bool):
                raise StructureError(f"truth value for {p!r} at {sid!r} must be boolean")
        states.append(sid)
        assign[sid] = frozenset(p for p, v in asg.items() if v)
    keys = [k for k in ("K", "pr", "PR") if k in data]
    expected = {"knowledge": "K", "simple": "pr", "generalized": "PR", "frame": "PR"}[kind]
    if keys != [expected]:
        raise StructureError(f"a {kind} structure needs exactly the field {expected!r}")
    if kind == "knowledge":
        K = {agent_key(a): [tuple(pair) for pair in pairs] for a, pairs in data["K"].items()}
        for pairs in K.values():
            if any(len(p) != 2 for p in pairs):
                raise StructureError("relation entries must be [s, t] pairs")
        return KnowledgeStructure(states, props, assign, agents, K=K)
    if kind == "simple":
        pr = {agent_key(a): {t: _rat(v, f"pr[{a}][{t}]") for t, v in d.items()}
              for a, d in data["pr"].items()}
        return SimpleProbabilityStructure(states, props, assign, agents, pr=pr)
    PR = {agent_key(a): {s: {t: _rat(v, f"PR[{a}][{s}][{t}]") for t, v in d.items()}
                         for s, d in per.items()}
          for a, per in data["PR"].items()}
    if kind == "frame":
        return Frame(states, agents, PR)
    return GeneralizedProbabilityStructure(states, props, assign, agents, PR=PR)


def _dist_json(d: Mapping[str, Fraction]) -> dict[str, str]:
    return {t: format_rational(v) for t, v in d.items() if v != 0}


def to_dict(N) -> dict:
    if isinstance(N, Frame):
        return {"type": "frame", "agents": [str(a) for a in N.agents],
                "states": [{"id": s} for s in N.states],
                "PR": {str(a): {s: _dist_json(N.PR[a][s]) for s in N.states} for a in N.agents}}
    out = {
        "type": {KnowledgeStructure: "knowledge", SimpleProbabilityStructure: "simple",
                 GeneralizedProbabilityStructure: "generalized"}[type(N)],
        "agents": [str(a) for a in N.agents],
        "props": list(N.props),
        "states": [{"id": s, "assign": {p: p in N.assign[s] for p in N.props}} for s in N.states],
    }
    order = {s: i for i, s in enumerate(N.states)}
    if isinstance(N, KnowledgeStructure):
        out["K"] = {str(a): [list(e) for e in sorted(N.K[a], key=lambda e: (order[e[0]], order[e[1]]))]
                    for a in N.agents}
    elif isinstance(N, SimpleProbabilityStructure):
        out["pr"] = {str(a): _dist_json(N.pr[a]) for a in N.agents}
    else:
        out["PR"] = {str(a): {s: _dist_json(N.PR[a][s]) for s in N.states} for a in N.agents}
    return out


def dumps(N) -> str:
    return json.dumps(to_dict(N), indent=2)


def loads(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise StructureError(f"invalid JSON: {e}") from None
    return from_dict(data)


def load(path):
    with open(path) as fh:
        return loads(fh.read())


def save(N, path):
    with open(path, "w") as fh:
        fh.write(dumps(N) + "\n")


# --------------------------------------------------------------------------
# enumeration

def _state_names(n: int) -> tuple[str, ...]:
    return tuple(f"s{i}" for i in range(n))


def all_assignments(states: Sequence[str], props: Sequence[str]) -> Iterator[dict[str, frozenset[str]]]:
    """Every valuation of *props* over *states*, in a fixed order."""
    per_state = [frozenset(c) for r in range(len(props) + 1)
                 for c in itertools.combinations(props, r)]
    for combo in itertools.product(per_state, repeat=len(states)):
        yield dict(zip(states, combo))


_PROP_FLAGS = ("reflexive", "transitive", "symmetric", "euclidean", "serial")


def _relations(states: Sequence[str], constraints) -> list[frozenset]:
    pairs = [(s, t) for s in states for t in states]
    out = []
    for bits in range(1 << len(pairs)):
        rel = frozenset(p for k, p in enumerate(pairs) if bits >> k & 1)
        if frame_properties(rel, states).satisfies(constraints):
            out.append(rel)
    return out


def count_knowledge_structures(n_states: int, props: Sequence[str], agents=(1,),
                               exact: bool = False) -> int:
    """Upper bound on what :func:`enumerate_knowledge_structures` yields."""
    sizes = [n_states] if exact else range(1, n_states + 1)
    return sum((2 ** (n * n)) ** len(agents) * 2 ** (n * len(props)) for n in sizes)


def enumerate_knowledge_structures(n_states: int, props: Sequence[str] = (),
                                   constraints: Mapping[str, bool] | FrameProperties | None = None,
                                   agents: Sequence[int] = (1,), exact: bool = False,
                                   limit: int = 10 ** 6) -> Iterator[KnowledgeStructure]:
    """All knowledge structures with at most *n_states* states.

    Every relation (one per agent) must satisfy the flags set in
    *constraints*.  With *exact* only structures of exactly *n_states*
    states are produced.  States are named ``s0, s1, ...``; no isomorphism
    reduction is attempted.
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    if count_knowledge_structures(n_states, props, agents, exact) > limit:
        raise ResourceLimitExceeded(
            f"more than {limit} structures for {n_states} states, {len(props)} props")
    props = tuple(props)
    agents = tuple(agents)
    sizes = [n_states] if exact else range(1, n_states + 1)
    for n in sizes:
        states = _state_names(n)
        rels = _relations(states, constraints)
        for combo in itertools.product(rels, repeat=len(agents)):
            K = dict(zip(agents, combo))
            for assign in all_assignments(states, props):
                yield KnowledgeStructure(states, props, assign, agents, K=K)


def rational_grid(max_den: int) -> list[Fraction]:
    """All rationals in [0, 1] with denominator <= *max_den*, sorted."""
    return sorted({Fraction(k, d) for d in range(1, max_den + 1) for k in range(d + 1)})


def enumerate_distributions(states: Sequence[str], max_den: int) -> list[dict[str, Fraction]]:
    """Distributions on *states* whose values all have denominator <= *max_den*."""
    grid = rational_grid(max_den)
    out = []

    def rec(i: int, remaining: Fraction, acc: list[Fraction]):
        if i == len(states) - 1:
            if remaining in grid_set:
                out.append(dict(zip(states, acc + [remaining])))
            return
        for v in grid:
            if v > remaining:
                break
            rec(i + 1, remaining - v, acc + [v])

    grid_set = set(grid)
    rec(0, Fraction(1), [])
    return out


def enumerate_frames(n_states: int, max_den: int, agents: Sequence[int] = (1,),
                     exact: bool = True) -> Iterator[Frame]:
    sizes = [n_states] if exact else range(1, n_states + 1)
    for n in sizes:
        states = _state_names(n)
        dists = enumerate_distributions(states, max_den)
        per_agent = list(itertools.product(dists, repeat=n))
        for combo in itertools.product(per_agent, repeat=len(agents)):
            PR = {a: dict(zip(states, rows)) for a, rows in zip(agents, combo)}
            yield Frame(states, tuple(agents), PR)


def enumerate_generalized_structures(n_states: int, props: Sequence[str], max_den: int,
                                     agents: Sequence[int] = (1,),
                                     exact: bool = False) -> Iterator[GeneralizedProbabilityStructure]:
    for F in enumerate_frames(n_states, max_den, agents, exact=exact):
        for assign in all_assignments(F.states, props):
            yield structure_from_frame(F, props, assign)


def enumerate_simple_structures(n_states: int, props: Sequence[str], max_den: int,
                                agents: Sequence[int] = (1,),
                                exact: bool = False) -> Iterator[SimpleProbabilityStructure]:
    sizes = [n_states] if exact else range(1, n_states + 1)
    for n in sizes:
        states = _state_names(n)
        dists = enumerate_distributions(states, max_den)
        for combo in itertools.product(dists, repeat=len(agents)):
            pr = dict(zip(agents, combo))
            for assign in all_assignments(states, props):
                yield SimpleProbabilityStructure(states, tuple(props), assign, tuple(agents), pr=pr)


# --------------------------------------------------------------------------
# random structures

def _random_dist(rng: random.Random, support: Sequence[str], states: Sequence[str],
                 den: int, positive: bool = False) -> dict[str, Fraction]:
    """Random distribution on *support* with common denominator *den*."""
    k = len(support)
    if positive:
        den = max(den, k)
        cuts = sorted(rng.sample(range(1, den), k - 1)) if k > 1 else []
    else:
        cuts = sorted(rng.randint(0, den) for _ in range(k - 1))
    bounds = [0] + cuts + [den]
    weights = [bounds[i + 1] - bounds[i] for i in range(k)]
    d = {s: Fraction(0) for s in states}
    for s, w in zip(support, weights):
        d[s] = Fraction(w, den)
    return d


def random_generalized_structure(n_states: int, props: Sequence[str] = ("p",),
                                 denominator_bound: int = 4, seed: int | None = None,
                                 shape: str = "any", agents: Sequence[int] = (1,)):
    """A seeded random structure.

    ``shape`` is one of ``"any"`` (independent distribution at each state),
    ``"uniform"`` (support-linked states share their distribution),
    ``"simple"`` (one distribution per agent) or ``"positive-simple"``
    (simple, every state of positive probability).  The simple shapes
    return a :class:`SimpleProbabilityStructure`.
    """
    if denominator_bound < 1:
        raise ValueError("denominator_bound must be >= 1")
    if shape not in ("any", "uniform", "simple", "positive-simple"):
        raise ValueError(f"unknown shape {shape!r}")
    rng = random.Random(seed)
    states = _state_names(n_states)
    props = tuple(props)
    assign = {s: frozenset(p for p in props if rng.random() < 0.5) for s in states}
    agents = tuple(agents)

    def den() -> int:
        return rng.randint(1, denominator_bound)

    if shape in ("simple", "positive-simple"):
        positive = shape == "positive-simple"
        pr = {a: _random_dist(rng, states, states, den(), positive) for a in agents}
        return SimpleProbabilityStructure(states, props, assign, agents, pr=pr)
    PR = {}
    for a in agents:
        if shape == "any":
            PR[a] = {s: _random_dist(rng, states, states, den()) for s in states}
            continue
        # uniform: partition into groups, each group shares one distribution
        # supported inside the group
        order = list(states)
        rng.shuffle(order)
        groups, i = [], 0
        while i < len(order):
            size = rng.randint(1, len(order) - i)
            groups.append(order[i:i + size])
            i += size
        per = {}
        for g in groups:
            core = rng.sample(g, rng.randint(1, len(g)))
            core.sort(key=states.index)
            d = _random_dist(rng, core, states, den(), positive=True)
            for s in g:
                per[s] = d
        PR[a] = per
    return GeneralizedProbabilityStructure(states, props, assign, agents, PR=PR)
