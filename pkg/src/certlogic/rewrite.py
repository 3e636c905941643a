"""Flattening nested knowledge (or certainty) operators under KD45.

One agent only.  Every ``K`` whose body contains another ``K`` is rewritten
innermost-first: the body is put into conjunctive normal form with
propositional literals before modal ones, ``K`` is distributed over the
conjunction, and modal literals are peeled off each clause from the right.
Each step is an application of a rule from :data:`RULES`, and every rule is
checked to be KD45-valid by the decision procedure.

Positions are paths of child indices: ``0`` for the argument of ``~`` and
``K``, ``0``/``1`` for the sides of a binary connective.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from certlogic.decision import decide
from certlogic.formula import (
    TRUE, FALSE, And, Bottom, Formula, Implies, Know, Language, Not, Or, Prop, Top,
    agents_of, classify, conj, desugar, disj, iff, modal_depth, render,
    translate_C_to_K, translate_K_to_C,
)
from certlogic.proofs import _AGENT, _PHI, _PSI, _instantiate, _unify, is_prop_tautology

__all__ = ["RewriteRule", "RewriteError", "TraceStep", "RULES", "RULES_BY_NAME",
           "apply_rule", "normalize_depth_one", "subterm", "replace_at"]

Position = tuple[int, ...]


class RewriteError(ValueError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    """``left -> right``; ``phi``, ``psi`` and the agent are schematic."""

    name: str
    left: Formula
    right: Formula

    def match(self, f: Formula) -> Formula | None:
        env: dict = {}
        if not _unify(self.left, f, env):
            return None
        subst = {k: v for k, v in env.items() if k != "agent"}
        return _instantiate(self.right, subst, env.get("agent", 1))

    def example(self, agent: int = 1) -> tuple[Formula, Formula]:
        """Both sides with ``a``/``b`` for the schema variables."""
        fresh = {_PHI: Prop("a"), _PSI: Prop("b")}
        return _instantiate(self.left, fresh, agent), _instantiate(self.right, fresh, agent)

    def verify(self) -> bool:
        """KD45-validity of ``left <-> right`` with fresh letters for the
        schema variables (validity is closed under substitution)."""
        return _verified(self)


@lru_cache(maxsize=None)
def _verified(rule: RewriteRule) -> bool:
    return decide(iff(*rule.example()), "KD45").valid


def _K(f: Formula) -> Know:
    return Know(_AGENT, f)


RULES: tuple[RewriteRule, ...] = (
    RewriteRule("K-and", _K(And(_PHI, _PSI)), And(_K(_PHI), _K(_PSI))),
    RewriteRule("KK", _K(_K(_PHI)), _K(_PHI)),
    RewriteRule("K-not-K", _K(Not(_K(_PHI))), Not(_K(_PHI))),
    RewriteRule("K-or-K", _K(Or(_PHI, _K(_PSI))), Or(_K(_PHI), _K(_PSI))),
    RewriteRule("K-or-not-K", _K(Or(_PHI, Not(_K(_PSI)))), Or(_K(_PHI), Not(_K(_PSI)))),
    RewriteRule("K-true", _K(TRUE), TRUE),
    RewriteRule("K-false", _K(FALSE), FALSE),
)
RULES_BY_NAME = {r.name: r for r in RULES}


@dataclass(frozen=True)
class TraceStep:
    rule: str
    position: Position
    before: Formula
    after: Formula

    def __str__(self) -> str:
        pos = ".".join(map(str, self.position)) or "root"
        return f"{self.rule} @ {pos}: {render(self.before)} => {render(self.after)}"


# --------------------------------------------------------------------------
# positions

def _children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Know)):
        return (f.arg,)
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    return ()


def subterm(f: Formula, pos: Position) -> Formula:
    for i in pos:
        kids = _children(f)
        if i >= len(kids):
            raise RewriteError(f"no subformula at position {pos}")
        f = kids[i]
    return f


def replace_at(f: Formula, pos: Position, new: Formula) -> Formula:
    if not pos:
        return new
    i, rest = pos[0], pos[1:]
    if isinstance(f, Not) and i == 0:
        return Not(replace_at(f.arg, rest, new))
    if isinstance(f, Know) and i == 0:
        return Know(f.agent, replace_at(f.arg, rest, new))
    if isinstance(f, (And, Or, Implies)) and i in (0, 1):
        kids = [f.left, f.right]
        kids[i] = replace_at(kids[i], rest, new)
        return type(f)(*kids)
    raise RewriteError(f"no subformula at position {pos}")


def apply_rule(f: Formula, rule: "RewriteRule | str", position: Position = (),
               trace: list | None = None) -> Formula:
    """Rewrite the subformula at *position* by one application of *rule*."""
    if isinstance(rule, str):
        if rule not in RULES_BY_NAME:
            raise RewriteError(f"unknown rule {rule!r}")
        rule = RULES_BY_NAME[rule]
    position = tuple(position)
    target = subterm(f, position)
    out = rule.match(target)
    if out is None:
        raise RewriteError(f"rule {rule.name} does not match {render(target)} at {position}")
    if trace is not None:
        trace.append(TraceStep(rule.name, position, target, out))
    return replace_at(f, position, out)


# --------------------------------------------------------------------------
# normal form

def _nnf(f: Formula, pos: bool = True) -> Formula:
    if isinstance(f, Not):
        return _nnf(f.arg, not pos)
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.left), f.right), pos)
    if isinstance(f, (And, Or)):
        kind = type(f) if pos else (Or if isinstance(f, And) else And)
        return kind(_nnf(f.left, pos), _nnf(f.right, pos))
    if isinstance(f, Top):
        return f if pos else FALSE
    if isinstance(f, Bottom):
        return f if pos else TRUE
    return f if pos else Not(f)


def _clauses(f: Formula) -> list[frozenset]:
    """CNF of an NNF formula as a list of literal sets (``None`` = true)."""
    if isinstance(f, Top):
        return []
    if isinstance(f, Bottom):
        return [frozenset()]
    if isinstance(f, And):
        return _clauses(f.left) + _clauses(f.right)
    if isinstance(f, Or):
        return [a | b for a in _clauses(f.left) for b in _clauses(f.right)]
    return [frozenset([f])]


def _lit_key(lit: Formula) -> tuple:
    atom = lit.arg if isinstance(lit, Not) else lit
    return (isinstance(atom, Know), render(atom), isinstance(lit, Not))


def _cnf(f: Formula) -> Formula:
    clauses = []
    for c in _clauses(_nnf(f)):
        if any(Not(l) in c for l in c):
            continue
        lits = sorted(c, key=_lit_key)
        if lits not in clauses:
            clauses.append(lits)
    if not clauses:
        return TRUE
    return conj([disj(c) if c else FALSE for c in clauses])


def _push(f: Formula, pos: Position, trace: list, budget: list) -> Formula:
    """Normalize the ``K`` at *pos*, whose body has depth at most one."""
    def step():
        budget[0] -= 1
        if budget[0] < 0:
            raise RewriteError("rewrite step bound exceeded")

    k = subterm(f, pos)
    body = _cnf(k.arg)
    if body != k.arg:
        if not is_prop_tautology(iff(k.arg, body)):
            raise AssertionError("clausal form is not equivalent to the body")
        trace.append(TraceStep("K-congruence", pos, k, Know(k.agent, body)))
        f = replace_at(f, pos, Know(k.agent, body))
    todo = [pos]
    while todo:
        step()
        p = todo.pop()
        g = subterm(f, p)
        if not isinstance(g, Know):
            continue
        arg = g.arg
        if isinstance(arg, And):
            f = apply_rule(f, "K-and", p, trace)
            todo += [p + (1,), p + (0,)]
        elif isinstance(arg, Top):
            f = apply_rule(f, "K-true", p, trace)
        elif isinstance(arg, Bottom):
            f = apply_rule(f, "K-false", p, trace)
        elif isinstance(arg, Know):
            f = apply_rule(f, "KK", p, trace)
        elif isinstance(arg, Not) and isinstance(arg.arg, Know):
            f = apply_rule(f, "K-not-K", p, trace)
        elif isinstance(arg, Or) and isinstance(arg.right, Know):
            f = apply_rule(f, "K-or-K", p, trace)
            todo.append(p + (0,))
        elif isinstance(arg, Or) and isinstance(arg.right, Not) and isinstance(arg.right.arg, Know):
            f = apply_rule(f, "K-or-not-K", p, trace)
            todo.append(p + (0,))
    return f


def _normalize(f: Formula, pos: Position, trace: list, budget: list) -> Formula:
    g = subterm(f, pos)
    for i in range(len(_children(g))):
        f = _normalize(f, pos + (i,), trace, budget)
    g = subterm(f, pos)
    if isinstance(g, Know) and modal_depth(g.arg) >= 1:
        f = _push(f, pos, trace, budget)
    return f


def normalize_depth_one(f: Formula, trace: list | None = None,
                        max_steps: int = 10 ** 5) -> Formula:
    """A KD45-equivalent formula without nested modalities.

    Accepts one-agent knowledge or certainty formulas; certainty input is
    handled through the ``K``/``Cert`` translation and returned in
    certainty form.  Rewrite steps are appended to *trace* if given.
    """
    lang = classify(desugar(f))
    if lang not in (Language.LK, Language.LC, Language.PROPOSITIONAL):
        raise ValueError(f"normalization needs a knowledge or certainty formula, got {lang.value}")
    if len(agents_of(desugar(f))) > 1:
        raise ValueError("normalization is implemented for a single agent")
    certainty = lang == Language.LC
    g = translate_C_to_K(desugar(f)) if certainty else f
    steps: list[TraceStep] = []
    out = _normalize(g, (), steps, [max_steps])
    if trace is not None:
        if certainty:
            steps = [TraceStep(s.rule, s.position, translate_K_to_C(s.before), translate_K_to_C(s.after))
                     for s in steps]
        trace.extend(steps)
    return translate_K_to_C(out) if certainty else out
