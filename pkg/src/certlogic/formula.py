"""Formula AST, parser, printer and syntactic utilities.

One AST serves the full probability language (weight formulas), the
knowledge language (``K``) and the certainty fragment, where ``Cert_i(f)``
is the conjunction ``w_i(f) >= 1 & -w_i(f) >= -1``.

Canonical (desugared) formulas use only ``Prop``, ``Top``, ``Bottom``,
``Not``, ``And``, ``Know`` and ``Weight`` with relation ``>=`` and integer
coefficients and bound.  ``Or``, ``Implies``, ``WeightIn`` and weights with
other relations or rational bounds are sugar, removed by :func:`desugar`.

>>> f = parse("~q & Cert(~Cert(p) & Cert(q))")
>>> render(f)
'~q & Cert(~Cert(p) & Cert(q))'
>>> render(desugar(parse("w(p) >= 1/2")))
'2w(p) >= 1'
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

__all__ = [
    "Formula", "Prop", "Top", "Bottom", "Not", "And", "Or", "Implies", "Know",
    "WeightTerm", "Weight", "WeightIn", "TRUE", "FALSE",
    "ParseError", "Language",
    "parse", "render", "desugar", "classify", "modal_depth", "subformulas",
    "cert", "as_cert", "iff", "conj", "disj", "props_of", "agents_of",
    "translate_K_to_C", "translate_C_to_K", "random_formula",
    "parse_rational", "format_rational",
]


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __rshift__(self, other: Formula) -> Formula:
        return Implies(self, other)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Know(Formula):
    agent: int
    arg: Formula


@dataclass(frozen=True)
class WeightTerm:
    coeff: int
    agent: int
    arg: Formula


RELATIONS = (">=", "<=", "=", "<", ">")


@dataclass(frozen=True)
class Weight(Formula):
    """``sum(coeff * w_agent(arg)) rel bound``."""

    terms: tuple[WeightTerm, ...]
    rel: str = ">="
    bound: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a weight formula needs at least one term")
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        if not isinstance(self.bound, Fraction):
            object.__setattr__(self, "bound", Fraction(self.bound))

    @property
    def is_canonical(self) -> bool:
        return self.rel == ">=" and self.bound.denominator == 1


@dataclass(frozen=True)
class WeightIn(Formula):
    """``w_agent(arg) in [lo, hi]``."""

    agent: int
    arg: Formula
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class Language(str, enum.Enum):
    LP = "LP"
    LK = "LK"
    LC = "LC"
    PROPOSITIONAL = "propositional"
    MIXED = "mixed"


# --------------------------------------------------------------------------
# constructors

def cert(arg: Formula, agent: int = 1) -> And:
    """``Cert_agent(arg)``, i.e. ``w(arg) = 1`` in canonical form."""
    return And(
        Weight((WeightTerm(1, agent, arg),), ">=", Fraction(1)),
        Weight((WeightTerm(-1, agent, arg),), ">=", Fraction(-1)),
    )


def as_cert(f: Formula) -> tuple[int, Formula] | None:
    """Return ``(agent, arg)`` if *f* is a canonical Cert pair."""
    if not isinstance(f, And):
        return None
    a, b = f.left, f.right
    if not (isinstance(a, Weight) and isinstance(b, Weight)):
        return None
    if a.rel != ">=" or b.rel != ">=" or len(a.terms) != 1 or len(b.terms) != 1:
        return None
    ta, tb = a.terms[0], b.terms[0]
    if (ta.coeff, a.bound, tb.coeff, b.bound) != (1, 1, -1, -1):
        return None
    if ta.agent != tb.agent or ta.arg != tb.arg:
        return None
    return ta.agent, ta.arg


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def conj(items: Sequence[Formula]) -> Formula:
    items = list(items)
    if not items:
        return TRUE
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(items: Sequence[Formula]) -> Formula:
    items = list(items)
    if not items:
        return FALSE
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


# --------------------------------------------------------------------------
# rationals

_RAT_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text: str | int) -> Fraction:
    """Parse ``"num/den"`` or ``"int"`` exactly; floats are rejected."""
    if isinstance(text, bool):
        raise ValueError(f"malformed rational {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"malformed rational {text!r}")
    m = _RAT_RE.match(text)
    if not m:
        raise ValueError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<op>->|>=|<=|[()\[\],&|~*+\-/<>=])|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
)
_MODAL_RE = re.compile(r"^(K|Cert|w)(?:_(\d+))?$")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            for i, ch in enumerate(m.group()):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "ident") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        tok = self.tok
        if not self.accept(text):
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    def parse(self) -> Formula:
        f = self.formula()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def formula(self) -> Formula:
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.accept("|"):
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def _modal(self, tok: _Tok) -> tuple[str, int] | None:
        if tok.kind != "ident" or self.peek().text != "(":
            return None
        m = _MODAL_RE.match(tok.text)
        if not m:
            return None
        agent = int(m.group(2)) if m.group(2) else 1
        if agent < 1:
            raise self.error("agent index must be positive", tok)
        return m.group(1), agent

    def unary(self) -> Formula:
        tok = self.tok
        if self.accept("~"):
            return Not(self.unary())
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        modal = self._modal(tok)
        if modal and modal[0] in ("K", "Cert"):
            self.i += 1
            self.expect("(")
            arg = self.formula()
            self.expect(")")
            return Know(modal[1], arg) if modal[0] == "K" else cert(arg, modal[1])
        if modal or tok.kind == "int" or tok.text == "-":
            return self.weight()
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "true":
                return TRUE
            if tok.text == "false":
                return FALSE
            return Prop(tok.text)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def _int(self) -> int:
        tok = self.tok
        if tok.kind != "int":
            raise self.error(f"expected integer, found {tok.text!r}")
        self.i += 1
        return int(tok.text)

    def _linear(self) -> tuple[list[WeightTerm], Fraction]:
        """Sum of signed weight terms and rational constants."""
        terms: list[WeightTerm] = []
        const = Fraction(0)
        sign = 1
        if self.accept("-"):
            sign = -1
        elif self.accept("+"):
            pass
        while True:
            tok = self.tok
            if tok.kind == "int":
                n = self._int()
                if self.accept("/"):
                    den_tok = self.tok
                    den = self._int()
                    if den == 0:
                        raise self.error("zero denominator", den_tok)
                    if self._modal(self.tok) or self.tok.text == "*":
                        raise self.error("non-integer coefficient", tok)
                    const += sign * Fraction(n, den)
                else:
                    self.accept("*")
                    modal = self._modal(self.tok)
                    if modal and modal[0] == "w":
                        terms.append(self._wterm(sign * n))
                    elif self.tok.text == "*" or modal:
                        raise self.error("expected weight term")
                    else:
                        const += sign * n
            else:
                modal = self._modal(tok)
                if not modal or modal[0] != "w":
                    raise self.error(f"expected weight term, found {tok.text!r}")
                terms.append(self._wterm(sign))
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                return terms, const

    def _wterm(self, coeff: int) -> WeightTerm:
        _, agent = self._modal(self.tok)
        self.i += 1
        self.expect("(")
        arg = self.formula()
        self.expect(")")
        return WeightTerm(coeff, agent, arg)

    def _rat(self) -> Fraction:
        sign = -1 if self.accept("-") else 1
        n = self._int()
        if self.accept("/"):
            tok = self.tok
            d = self._int()
            if d == 0:
                raise self.error("zero denominator", tok)
            return sign * Fraction(n, d)
        return Fraction(sign * n)

    def weight(self) -> Formula:
        start = self.tok
        terms, lconst = self._linear()
        if self.tok.text == "in":
            if len(terms) != 1 or terms[0].coeff != 1 or lconst:
                raise self.error("'in' needs a single bare weight term")
            self.i += 1
            self.expect("[")
            lo = self._rat()
            self.expect(",")
            hi = self._rat()
            self.expect("]")
            return WeightIn(terms[0].agent, terms[0].arg, lo, hi)
        tok = self.tok
        if tok.kind != "op" or tok.text not in RELATIONS:
            raise self.error(f"unknown relation symbol {tok.text!r}")
        self.i += 1
        rterms, rconst = self._linear()
        terms = terms + [WeightTerm(-t.coeff, t.agent, t.arg) for t in rterms]
        if not terms:
            raise self.error("weight formula without weight terms", start)
        return Weight(tuple(terms), tok.text, rconst - lconst)


def parse(text: str) -> Formula:
    """Parse a formula in the ASCII grammar.

    Weight formulas may carry rational bounds and any of ``>= <= = < >``;
    weight terms on the right-hand side are moved to the left.
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# printer

def _idx(agent: int, multi: bool) -> str:
    return f"_{agent}" if (agent != 1 or multi) else ""


def _render_terms(terms: Sequence[WeightTerm], multi: bool) -> str:
    out = []
    for k, t in enumerate(terms):
        c = t.coeff
        body = f"w{_idx(t.agent, multi)}({_render(t.arg, 0, multi)})"
        if k == 0:
            prefix = "-" if c == -1 else ("" if c == 1 else str(c))
        else:
            prefix = " - " if c < 0 else " + "
            if abs(c) != 1:
                prefix += str(abs(c))
        out.append(prefix + body)
    return "".join(out)


# precedence: 1 implies, 2 or, 3 and, 4 unary
def _render(f: Formula, ctx: int, multi: bool) -> str:
    c = as_cert(f)
    if c is not None:
        return f"Cert{_idx(c[0], multi)}({_render(c[1], 0, multi)})"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Not):
        return "~" + _render(f.arg, 4, multi)
    if isinstance(f, Know):
        return f"K{_idx(f.agent, multi)}({_render(f.arg, 0, multi)})"
    if isinstance(f, Weight):
        return f"{_render_terms(f.terms, multi)} {f.rel} {format_rational(f.bound)}"
    if isinstance(f, WeightIn):
        return (f"w{_idx(f.agent, multi)}({_render(f.arg, 0, multi)}) in "
                f"[{format_rational(f.lo)}, {format_rational(f.hi)}]")
    if isinstance(f, And):
        s = f"{_render(f.left, 3, multi)} & {_render(f.right, 4, multi)}"
        return s if ctx <= 3 else f"({s})"
    if isinstance(f, Or):
        s = f"{_render(f.left, 2, multi)} | {_render(f.right, 3, multi)}"
        return s if ctx <= 2 else f"({s})"
    if isinstance(f, Implies):
        s = f"{_render(f.left, 2, multi)} -> {_render(f.right, 1, multi)}"
        return s if ctx <= 1 else f"({s})"
    raise TypeError(f"not a formula: {f!r}")


def render(f: Formula, multi_agent: bool = False) -> str:
    """Print *f* in the parser's grammar.

    Agent 1 is printed without an index unless *multi_agent* is set.
    """
    return _render(f, 0, multi_agent)


# --------------------------------------------------------------------------
# desugaring

def _clear(terms: Sequence[WeightTerm], bound: Fraction) -> Weight:
    """``sum terms >= bound`` with the bound's denominator cleared."""
    d = bound.denominator
    return Weight(tuple(WeightTerm(t.coeff * d, t.agent, t.arg) for t in terms),
                  ">=", Fraction(bound.numerator))


def _neg_terms(terms: Sequence[WeightTerm]) -> list[WeightTerm]:
    return [WeightTerm(-t.coeff, t.agent, t.arg) for t in terms]


def desugar(f: Formula) -> Formula:
    """Rewrite *f* into canonical form (idempotent)."""
    if isinstance(f, (Prop, Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.arg))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Not(And(Not(desugar(f.left)), Not(desugar(f.right))))
    if isinstance(f, Implies):
        return Not(And(desugar(f.left), Not(desugar(f.right))))
    if isinstance(f, Know):
        return Know(f.agent, desugar(f.arg))
    if isinstance(f, WeightIn):
        t = [WeightTerm(1, f.agent, desugar(f.arg))]
        return And(_clear(t, f.lo), _clear(_neg_terms(t), -f.hi))
    if isinstance(f, Weight):
        terms = [WeightTerm(t.coeff, t.agent, desugar(t.arg)) for t in f.terms]
        b = f.bound
        ge = _clear(terms, b)
        le = _clear(_neg_terms(terms), -b)
        return {">=": ge, "<=": le, "=": And(ge, le), "<": Not(ge), ">": Not(le)}[f.rel]
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# analysis

def _children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    if isinstance(f, (Know, WeightIn)):
        return (f.arg,)
    if isinstance(f, Weight):
        return tuple(t.arg for t in f.terms)
    return ()


def classify(f: Formula) -> Language:
    """Which language *f* (desugared) belongs to."""
    has_k = False
    has_w = False
    only_cert = True
    stack = [f]
    while stack:
        g = stack.pop()
        c = as_cert(g)
        if c is not None:
            has_w = True
            stack.append(c[1])
            continue
        if isinstance(g, Know):
            has_k = True
        elif isinstance(g, (Weight, WeightIn)):
            has_w = True
            only_cert = False
        stack.extend(_children(g))
    if not has_k and not has_w:
        return Language.PROPOSITIONAL
    if not has_k:
        return Language.LC if only_cert else Language.LP
    if not has_w:
        return Language.LK
    return Language.MIXED


def modal_depth(f: Formula) -> int:
    """Maximum nesting of ``K`` and weight operators."""
    if isinstance(f, (Know, Weight, WeightIn)):
        return 1 + max((modal_depth(a) for a in _children(f)), default=0)
    return max((modal_depth(a) for a in _children(f)), default=0)


def subformulas(f: Formula) -> list[Formula]:
    """All subformulas of *f* in pre-order, without duplicates."""
    seen: dict[Formula, None] = {}

    def walk(g: Formula):
        if g in seen:
            return
        seen[g] = None
        for a in _children(g):
            walk(a)

    walk(f)
    return list(seen)


def props_of(f: Formula) -> list[str]:
    return sorted({g.name for g in subformulas(f) if isinstance(g, Prop)})


def agents_of(f: Formula) -> list[int]:
    out = set()
    for g in subformulas(f):
        if isinstance(g, (Know, WeightIn)):
            out.add(g.agent)
        elif isinstance(g, Weight):
            out.update(t.agent for t in g.terms)
    return sorted(out)


# --------------------------------------------------------------------------
# translations between the knowledge and certainty languages

def translate_K_to_C(f: Formula) -> Formula:
    """Replace every ``K_i`` by ``Cert_i``."""
    if isinstance(f, Know):
        return cert(translate_K_to_C(f.arg), f.agent)
    if isinstance(f, (Prop, Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(translate_K_to_C(f.arg))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(translate_K_to_C(f.left), translate_K_to_C(f.right))
    raise ValueError(f"not a knowledge-language formula: {render(f)}")


def translate_C_to_K(f: Formula) -> Formula:
    """Replace every ``Cert_i`` by ``K_i``."""
    c = as_cert(f)
    if c is not None:
        return Know(c[0], translate_C_to_K(c[1]))
    if isinstance(f, (Prop, Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(translate_C_to_K(f.arg))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(translate_C_to_K(f.left), translate_C_to_K(f.right))
    raise ValueError(f"not a certainty-language formula: {render(f)}")


# --------------------------------------------------------------------------
# random formulas for property suites

def random_formula(rng: random.Random, props: Sequence[str] = ("p", "q"),
                   depth: int = 2, size: int = 4, modal: str = "K",
                   agents: Sequence[int] = (1,), sugar: bool = True) -> Formula:
    """A random formula with modal depth <= *depth*.

    *size* bounds the number of connectives; *modal* picks the modality
    (``"K"`` or ``"Cert"``).  With *sugar* off only ``~``, ``&`` and the
    modality are used.
    """
    def atom() -> Formula:
        r = rng.random()
        if r < 0.06:
            return TRUE
        if r < 0.12:
            return FALSE
        return Prop(rng.choice(list(props)))

    def gen(budget: int, d: int) -> Formula:
        if budget <= 0:
            return atom()
        ops = ["not", "and"]
        if sugar:
            ops += ["or", "implies"]
        if d > 0:
            ops += ["modal", "modal"]
        op = rng.choice(ops)
        if op == "not":
            return Not(gen(budget - 1, d))
        if op == "modal":
            arg = gen(budget - 1, d - 1)
            i = rng.choice(list(agents))
            return Know(i, arg) if modal == "K" else cert(arg, i)
        k = rng.randint(0, budget - 1)
        a, b = gen(k, d), gen(budget - 1 - k, d)
        return {"and": And, "or": Or, "implies": Implies}[op](a, b)

    return gen(rng.randint(0, size), depth)


def enumerate_formulas(props: Sequence[str], max_connectives: int,
                       modal: str = "Cert", agent: int = 1,
                       max_depth: int | None = None,
                       constants: bool = False) -> Iterator[Formula]:
    """Every formula over ``~``, ``&`` and one modality, by connective count."""
    by_size: list[list[Formula]] = []
    base: list[Formula] = [Prop(p) for p in props]
    if constants:
        base += [TRUE, FALSE]
    by_size.append(base)
    wrap = (lambda a: cert(a, agent)) if modal == "Cert" else (lambda a: Know(agent, a))
    for n in range(1, max_connectives + 1):
        level = [Not(a) for a in by_size[n - 1]]
        level += [wrap(a) for a in by_size[n - 1]
                  if max_depth is None or modal_depth(a) < max_depth]
        for k in range(n):
            for a in by_size[k]:
                for b in by_size[n - 1 - k]:
                    level.append(And(a, b))
        by_size.append(level)
    for level in by_size:
        yield from level
