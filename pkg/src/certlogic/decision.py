"""Decision procedures for the normal modal systems and their certainty
translations.

Validity of a knowledge formula in a normal system ``A`` (``P``, ``K``,
``R1``, ``R2`` plus a subset of ``T``, ``4``, ``5``, ``D``) is decided by a
labelled tableau that builds a countermodel for the negation:

* systems without ``5`` expand diamonds into fresh successors, propagate
  boxes (and, with ``4``, the boxes themselves) and block a successor whose
  label is contained in the label of a world on the current path;
* systems with ``5`` decide every relevant ``K_i`` atom by analytic cut and
  build the Euclidean cluster explicitly (root, optional entry set, and a
  cluster in which every world sees every other).

Countermodels are checked with the model checker before they are returned.
Certainty questions are reduced to knowledge questions through the
support relation and realized as probability structures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from certlogic.formula import (
    And, Bottom, Formula, Know, Language, Not, Prop, Top, agents_of, cert,
    classify, desugar, props_of, render, translate_C_to_K, translate_K_to_C,
)
from certlogic.semantics import eval_formula
from certlogic.structures import (
    GeneralizedProbabilityStructure, KnowledgeStructure, ResourceLimitExceeded,
    SimpleProbabilityStructure, frame_properties, is_uniform,
)

__all__ = [
    "System", "DecisionResult", "decide", "decide_certainty",
    "check_s5_kd45_bridge", "cert_of_translation", "bounded_countermodel",
    "realize_certainty_countermodel", "ResourceLimitExceeded",
    "CERTAINTY_CLASSES",
]

DEFAULT_BUDGET = 10 ** 6

_ALIASES = {
    "K": "", "T": "T", "KT": "T", "D": "D", "KD": "D", "S4": "T4", "KT4": "T4",
    "S5": "T45", "KT45": "T45", "WEAK S5": "D45", "WEAKS5": "D45", "D4": "D4",
    "D45": "D45", "D5": "D5",
}
_NAMES = {
    frozenset(): "K", frozenset("T"): "T", frozenset("D"): "D",
    frozenset("T4"): "S4", frozenset("T45"): "S5",
}


@dataclass(frozen=True)
class System:
    """A normal axiom system, named by its extra axioms."""

    axioms: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "axioms", frozenset(self.axioms))
        bad = self.axioms - set("T45D")
        if bad:
            raise ValueError(f"unknown axioms {sorted(bad)}")

    @classmethod
    def parse(cls, name: "str | System") -> "System":
        if isinstance(name, System):
            return name
        key = name.strip().upper()
        if key in _ALIASES:
            return cls(frozenset(_ALIASES[key]))
        body = key[1:] if key.startswith("K") else key
        if not body or any(c not in "T45D" for c in body):
            raise ValueError(f"unknown system {name!r}")
        return cls(frozenset(body))

    @property
    def name(self) -> str:
        if self.axioms in _NAMES:
            return _NAMES[self.axioms]
        return "K" + "".join(c for c in "DT45" if c in self.axioms)

    def __str__(self) -> str:
        return self.name

    @property
    def constraints(self) -> dict[str, bool]:
        """Frame conditions of the corresponding class of structures."""
        return {
            "reflexive": "T" in self.axioms,
            "transitive": "4" in self.axioms,
            "euclidean": "5" in self.axioms,
            "serial": "D" in self.axioms,
        }

    def admits(self, rel, states) -> bool:
        return frame_properties(rel, states).satisfies(self.constraints)


@dataclass
class DecisionResult:
    verdict: str                       # "valid" | "invalid"
    countermodel: tuple | None = None  # (structure, state)
    trace: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.verdict == "valid"


# --------------------------------------------------------------------------
# tableau

@lru_cache(maxsize=None)
def _key(f: Formula) -> str:
    return render(f, multi_agent=True)


def _sorted(fs: Iterable[Formula]) -> list[Formula]:
    return sorted(fs, key=_key)


def _neg(f: Formula) -> Formula:
    return f.arg if isinstance(f, Not) else Not(f)


class _Node:
    __slots__ = ("label", "succ")

    def __init__(self, label: frozenset):
        self.label = label
        self.succ: dict[int, list[_Node]] = {}


class _Tableau:
    def __init__(self, system: System, agents: Sequence[int], budget: int):
        ax = system.axioms
        self.T = "T" in ax
        self.four = "4" in ax
        self.five = "5" in ax
        self.serial = "D" in ax or self.T
        if self.five:
            self.mode = "S5" if self.T else ("K45" if self.four else "K5")
        else:
            self.mode = "plain"
        self.blocking = self.four and not self.five
        self.agents = tuple(agents)
        self.budget = budget
        self.steps = 0
        self.unsat: set = set()
        self.done: dict = {}
        self._sink: _Node | None = None

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise ResourceLimitExceeded(f"tableau exceeded its budget of {self.budget} nodes")

    @property
    def sink(self) -> _Node:
        if self._sink is None:
            node = _Node(frozenset())
            for a in self.agents:
                node.succ[a] = [node]
            self._sink = node
        return self._sink

    # -- saturation -------------------------------------------------------

    @staticmethod
    def cut_atoms(label: Iterable[Formula], agent: int) -> list[Know]:
        """``K_agent`` atoms reachable through Boolean connectives and ``K_agent``."""
        seen: dict[Formula, None] = {}
        stack = list(reversed(_sorted(label)))
        visited = set()
        while stack:
            g = stack.pop()
            if g in visited:
                continue
            visited.add(g)
            if isinstance(g, Not):
                stack.append(g.arg)
            elif isinstance(g, And):
                stack.extend((g.right, g.left))
            elif isinstance(g, Know) and g.agent == agent:
                seen[g] = None
                stack.append(g.arg)
        return _sorted(seen)

    def saturations(self, label: frozenset, cuts: list[Formula]) -> Iterator[frozenset]:
        yield from self._saturate(list(reversed(_sorted(label))), set(), cuts)

    def _saturate(self, todo: list, acc: set, cuts: list) -> Iterator[frozenset]:
        self.tick()
        while todo:
            f = todo.pop()
            if f in acc:
                continue
            if isinstance(f, Bottom) or (isinstance(f, Not) and isinstance(f.arg, Top)):
                return
            if _neg(f) in acc:
                return
            acc.add(f)
            if isinstance(f, And):
                todo += [f.right, f.left]
            elif isinstance(f, Not) and isinstance(f.arg, Not):
                todo.append(f.arg.arg)
            elif isinstance(f, Not) and isinstance(f.arg, And):
                a, b = f.arg.left, f.arg.right
                yield from self._saturate(todo + [Not(a)], set(acc), cuts)
                yield from self._saturate(todo + [Not(b), a], set(acc), cuts)
                return
            elif isinstance(f, Know) and self.T:
                todo.append(f.arg)
        for atom in cuts:
            if atom not in acc and Not(atom) not in acc:
                yield from self._saturate([atom], set(acc), cuts)
                yield from self._saturate([Not(atom)], set(acc), cuts)
                return
        yield frozenset(acc)

    # -- expansion --------------------------------------------------------

    def sat(self, label: frozenset, skip: frozenset, path: tuple) -> _Node | None:
        key = (label, skip)
        if key in self.unsat:
            return None
        if key in self.done:
            return self.done[key]
        self.tick()
        cuts: list[Formula] = []
        if self.five:
            for a in self.agents:
                if a not in skip:
                    cuts += self.cut_atoms(label, a)
        for sigma in self.saturations(label, cuts):
            node = _Node(sigma)
            sub = path + (node,)
            if all(self.expand(node, a, sub) for a in self.agents if a not in skip):
                if self.mode == "plain" and not self.blocking:
                    self.done[key] = node
                return node
        self.unsat.add(key)
        return None

    def _modal_parts(self, sigma, agent):
        pos, neg, lits = [], [], []
        for f in _sorted(sigma):
            if isinstance(f, Know) and f.agent == agent:
                pos.append(f.arg)
                lits.append(f)
            elif isinstance(f, Not) and isinstance(f.arg, Know) and f.arg.agent == agent:
                neg.append(f.arg.arg)
                lits.append(f)
        return pos, neg, lits

    def expand(self, node: _Node, agent: int, path: tuple) -> bool:
        pos, neg, lits = self._modal_parts(node.label, agent)
        if self.mode == "plain":
            return self._expand_plain(node, agent, pos, neg, path)
        return self._expand_cluster(node, agent, pos, neg, lits, path)

    def _expand_plain(self, node, agent, pos, neg, path) -> bool:
        base = set(pos)
        if self.four:
            base |= {Know(agent, a) for a in pos}
        reqs = [frozenset(base | {Not(a)}) for a in neg]
        children = []
        if not reqs and self.serial and not self.T:
            if not base:
                node.succ[agent] = [self.sink]
                return True
            reqs = [frozenset(base)]
        for req in reqs:
            if self.blocking:
                blocker = next((z for z in reversed(path) if req <= z.label), None)
                if blocker is not None:
                    children.append(blocker)
                    continue
            child = self.sat(req, frozenset(), path)
            if child is None:
                return False
            children.append(child)
        node.succ[agent] = children
        return True

    def _worlds(self, reqs, agent, path) -> list[_Node] | None:
        out = []
        for req in reqs:
            if not req:
                out.append(self.sink)
                continue
            w = self.sat(frozenset(req), frozenset({agent}), path)
            if w is None:
                return None
            out.append(w)
        return out

    def _link_cluster(self, cluster: list[_Node], agent: int):
        if self._sink is not None and self._sink in cluster:
            assert cluster == [self._sink]
            return
        for w in cluster:
            w.succ[agent] = cluster

    def _expand_cluster(self, node, agent, pos, neg, lits, path) -> bool:
        if self.mode == "S5":
            worlds = self._worlds([{Not(a), *pos, *lits} for a in neg], agent, path)
            if worlds is None:
                return False
            self._link_cluster([node] + worlds, agent)
            return True
        if self.mode == "K45":
            if neg:
                reqs = [{Not(a), *pos, *lits} for a in neg]
            elif self.serial:
                reqs = [{*pos, *lits}]
            else:
                node.succ[agent] = []
                return True
            worlds = self._worlds(reqs, agent, path)
            if worlds is None:
                return False
            self._link_cluster(worlds, agent)
            node.succ[agent] = worlds
            return True
        # K5: the node sees an entry set inside a cluster whose own K-profile
        # is guessed independently
        if not neg and not self.serial:
            node.succ[agent] = []
            return True
        atoms = self.cut_atoms(node.label, agent)
        for choice in itertools.product((True, False), repeat=len(atoms)):
            self.tick()
            p_pos = [k.arg for k, v in zip(atoms, choice) if v]
            p_neg = [k.arg for k, v in zip(atoms, choice) if not v]
            p_lits = [k if v else Not(k) for k, v in zip(atoms, choice)]
            entry = [{Not(a), *pos, *p_pos, *p_lits} for a in neg] or [{*pos, *p_pos, *p_lits}]
            extra = [{Not(a), *p_pos, *p_lits} for a in p_neg]
            A = self._worlds(entry, agent, path)
            if A is None:
                continue
            E = self._worlds(extra, agent, path)
            if E is None:
                continue
            self._link_cluster(A + E, agent)
            node.succ[agent] = A
            return True
        return False

    # -- model extraction -------------------------------------------------

    def extract(self, root: _Node, props: Sequence[str]) -> tuple[KnowledgeStructure, str]:
        order: list[_Node] = []
        index: dict[int, int] = {}
        queue = [root]
        while queue:
            n = queue.pop(0)
            if id(n) in index:
                continue
            index[id(n)] = len(order)
            order.append(n)
            for a in self.agents:
                queue.extend(n.succ.get(a, []))
        names = [f"s{i}" for i in range(len(order))]
        assign = {names[i]: frozenset(p for p in props if Prop(p) in n.label)
                  for i, n in enumerate(order)}
        K = {}
        for a in self.agents:
            rel = {(names[i], names[index[id(m)]]) for i, n in enumerate(order)
                   for m in n.succ.get(a, [])}
            if self.mode == "plain" and self.T:
                rel |= {(s, s) for s in names}
            if self.mode == "plain" and self.four:
                rel = _transitive_closure(rel)
            K[a] = rel
        return KnowledgeStructure(names, tuple(props), assign, self.agents, K=K), names[0]


def _transitive_closure(rel: set) -> set:
    rel = set(rel)
    while True:
        extra = {(s, u) for (s, t) in rel for (t2, u) in rel if t == t2} - rel
        if not extra:
            return rel
        rel |= extra


def _knowledge_input(f: Formula) -> Formula:
    g = desugar(f)
    if classify(g) not in (Language.LK, Language.PROPOSITIONAL):
        raise ValueError(f"not a knowledge-language formula: {render(f)}")
    return g


def decide(f: Formula, system: "str | System", budget: int = DEFAULT_BUDGET) -> DecisionResult:
    """Is *f* valid in every structure of the class corresponding to *system*?

    Invalid verdicts come with a verified countermodel ``(structure,
    state)``.  Exceeding *budget* raises :class:`ResourceLimitExceeded`.
    """
    sys_ = System.parse(system)
    g = _knowledge_input(f)
    agents = agents_of(g) or [1]
    tab = _Tableau(sys_, agents, budget)
    root = tab.sat(frozenset([Not(g)]), frozenset(), ())
    trace = {"system": sys_.name, "steps": tab.steps}
    if root is None:
        return DecisionResult("valid", None, trace)
    M, s = tab.extract(root, props_of(g))
    for a in M.agents:
        if not sys_.admits(M.K[a], M.states):
            raise AssertionError(f"countermodel violates the frame conditions of {sys_.name}")
    if eval_formula(M, s, g):
        raise AssertionError(f"countermodel does not falsify {render(f)}")
    return DecisionResult("invalid", (M, s), trace)


# --------------------------------------------------------------------------
# bounded enumeration oracle (independent of the tableau)

@lru_cache(maxsize=None)
def _allowed_relations(n: int, axioms: frozenset) -> np.ndarray:
    sys_ = System(axioms)
    states = [str(i) for i in range(n)]
    pairs = [(s, t) for s in range(n) for t in range(n)]
    out = []
    for bits in range(1 << (n * n)):
        rel = {(states[s], states[t]) for k, (s, t) in enumerate(pairs) if bits >> k & 1}
        if sys_.admits(rel, states):
            m = np.zeros((n, n), dtype=bool)
            for k, (s, t) in enumerate(pairs):
                m[s, t] = bool(bits >> k & 1)
            out.append(m)
    return np.array(out, dtype=bool).reshape(len(out), n, n)


def _vec_eval(f, rels, vals, memo):
    """Truth of *f* over all frames x valuations x states at once."""
    if f in memo:
        return memo[f]
    if isinstance(f, Prop):
        out = vals[f.name][None, :, :]
    elif isinstance(f, Top):
        out = np.ones((1, 1, 1), dtype=bool)
    elif isinstance(f, Bottom):
        out = np.zeros((1, 1, 1), dtype=bool)
    elif isinstance(f, Not):
        out = ~_vec_eval(f.arg, rels, vals, memo)
    elif isinstance(f, And):
        out = _vec_eval(f.left, rels, vals, memo) & _vec_eval(f.right, rels, vals, memo)
    elif isinstance(f, Know):
        inner = _vec_eval(f.arg, rels, vals, memo)
        R = rels[f.agent].astype(np.int32)
        F, A, n = R.shape[0], next(iter(vals.values())).shape[0] if vals else 1, R.shape[1]
        bad = np.broadcast_to(~inner, (F, A, n)).astype(np.int32) @ R.transpose(0, 2, 1)
        out = bad == 0
    else:
        raise ValueError(f"not a knowledge-language formula: {render(f)}")
    memo[f] = out
    return out


def bounded_countermodel(f: Formula, system: "str | System", max_states: int = 3,
                         cell_limit: int = 5 * 10 ** 7) -> tuple[KnowledgeStructure, str] | None:
    """Search every structure with at most *max_states* states for a state
    falsifying *f*; return the first one found or ``None``.

    Brute-force over all relations allowed by the system and all
    valuations, evaluated with numpy.  Complete up to the size bound only.
    """
    sys_ = System.parse(system)
    g = _knowledge_input(f)
    props = props_of(g)
    agents = agents_of(g) or [1]
    for n in range(1, max_states + 1):
        base = _allowed_relations(n, sys_.axioms)
        F = len(base) ** len(agents)
        A = 2 ** (n * len(props))
        if F * A * n > cell_limit:
            raise ResourceLimitExceeded(f"{F * A * n} cells exceed the oracle limit")
        idx = np.array(list(itertools.product(range(len(base)), repeat=len(agents))))
        rels = {a: base[idx[:, k]] for k, a in enumerate(agents)}
        codes = np.arange(A)
        vals = {p: ((codes[:, None] >> (np.arange(n)[None, :] * len(props) + j)) & 1).astype(bool)
                for j, p in enumerate(props)}
        truth = np.broadcast_to(_vec_eval(g, rels, vals, {}), (F, A, n))
        hits = np.argwhere(~truth)
        if len(hits):
            fi, ai, si = hits[0]
            states = [f"s{i}" for i in range(n)]
            assign = {states[s]: frozenset(p for p in props if vals[p][ai, s]) for s in range(n)}
            K = {a: {(states[s], states[t]) for s in range(n) for t in range(n) if rels[a][fi, s, t]}
                 for a in agents}
            return KnowledgeStructure(states, tuple(props), assign, tuple(agents), K=K), states[si]
    return None


# --------------------------------------------------------------------------
# certainty

CERTAINTY_CLASSES = ("N0", "N1", "N_unif", "N^A")


def _uniform(succ: Sequence[str], states: Sequence[str]) -> dict[str, Fraction]:
    k = len(succ)
    return {t: (Fraction(1, k) if t in succ else Fraction(0)) for t in states}


def realize_certainty_countermodel(M: KnowledgeStructure, cls: str):
    """A probability structure whose support relations are those of *M*.

    Each state gets the uniform distribution over its successors.  When
    every agent's distribution is the same at all states (as for the
    one-agent KD45 and S5 countermodels) a simple structure is returned.
    """
    PR = {}
    for a in M.agents:
        per = {}
        for s in M.states:
            succ = M.successors(a, s)
            if not succ:
                raise ValueError(f"relation of agent {a} is not serial at {s!r}")
            per[s] = _uniform(succ, M.states)
        PR[a] = per
    constant = all(len({tuple(PR[a][s].values()) for s in M.states}) == 1 for a in M.agents)
    if cls in ("N0", "N1") and constant:
        pr = {a: PR[a][M.states[0]] for a in M.agents}
        return SimpleProbabilityStructure(M.states, M.props, M.assign, M.agents, pr=pr)
    return GeneralizedProbabilityStructure(M.states, M.props, M.assign, M.agents, PR=PR)


def decide_certainty(f: Formula, cls: str, system: "str | System | None" = None,
                     budget: int = DEFAULT_BUDGET) -> DecisionResult:
    """Validity of a certainty formula over a class of probability structures.

    ``N0`` (all simple structures) and ``N_unif`` (uniform structures) reduce
    to KD45, ``N1`` (simple, every state positive) to S5 and ``N^A`` to the
    system *system*, which must contain T or D.
    """
    if cls not in CERTAINTY_CLASSES:
        raise ValueError(f"unknown class {cls!r}; expected one of {CERTAINTY_CLASSES}")
    g = desugar(f)
    if classify(g) not in (Language.LC, Language.PROPOSITIONAL):
        raise ValueError(f"not a certainty-language formula: {render(f)}")
    if cls == "N^A":
        if system is None:
            raise ValueError("class N^A needs a system")
        sys_ = System.parse(system)
        if not sys_.axioms & {"T", "D"}:
            raise ValueError(f"N^A needs a system containing T or D, got {sys_.name}")
    else:
        sys_ = System.parse({"N0": "KD45", "N1": "S5", "N_unif": "KD45"}[cls])
    res = decide(translate_C_to_K(g), sys_, budget)
    res.trace["class"] = cls
    if res.valid:
        return res
    M, s = res.countermodel
    N = realize_certainty_countermodel(M, cls)
    if eval_formula(N, s, g):
        raise AssertionError("probability countermodel does not falsify the formula")
    if cls == "N_unif" and not is_uniform(N):
        raise AssertionError("countermodel for the uniform class is not uniform")
    return DecisionResult("invalid", (N, s), res.trace)


@dataclass
class BridgeReport:
    agree: bool
    s5_valid: bool
    kd45_valid: bool


def check_s5_kd45_bridge(f: Formula, agent: int = 1, budget: int = DEFAULT_BUDGET) -> BridgeReport:
    """Compare S5-validity of *f* with KD45-validity of ``K f``."""
    g = _knowledge_input(f)
    s5 = decide(g, "S5", budget).valid
    kd45 = decide(Know(agent, g), "KD45", budget).valid
    return BridgeReport(s5 == kd45, s5, kd45)


@dataclass
class TranslationReport:
    s5_provable: bool
    n0_certain: bool

    @property
    def agree(self) -> bool:
        return self.s5_provable == self.n0_certain


def cert_of_translation(f: Formula, agent: int = 1, budget: int = DEFAULT_BUDGET) -> TranslationReport:
    """S5-provability of *f* against ``N0 |= Cert(f^C)``.

    Provability is read off the S5 decision (sound and complete for the
    equivalence-relation structures).
    """
    g = _knowledge_input(f)
    s5 = decide(g, "S5", budget).valid
    n0 = decide_certainty(cert(translate_K_to_C(g), agent), "N0", budget=budget).valid
    return TranslationReport(s5, n0)
