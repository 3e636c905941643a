"""``certlogic`` command line.

Exit status: 0 for success or a true/valid verdict, 1 for a false/invalid
verdict, 2 for usage and input errors, 3 when a resource limit is hit.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Sequence

from certlogic import structures as st
from certlogic.certainty import false_belief_states
from certlogic.decision import (
    CERTAINTY_CLASSES, System, check_s5_kd45_bridge, decide, decide_certainty,
)
from certlogic.formula import (
    ParseError, agents_of, classify, desugar, modal_depth, parse, parse_rational,
    render, translate_C_to_K, translate_K_to_C,
)
from certlogic.miller import (
    Interval, battery_from_json, check_miller_theorem, default_battery,
    equivalence_class_constraint, miller_instance, s_good, stronger_miller_instance,
)
from certlogic.proofs import bundled_proofs, check_proof, load_proof
from certlogic.rewrite import normalize_depth_one
from certlogic.semantics import SemanticsError, eval_formula, satisfying_states, valid_in_structure
from certlogic.structures import ResourceLimitExceeded, StructureError

OK, FALSE, USAGE, LIMIT = 0, 1, 2, 3


class _Out:
    def __init__(self, as_json: bool):
        self.json = as_json

    def emit(self, human: str, data) -> None:
        if self.json:
            print(json.dumps(data, indent=2, sort_keys=False))
        else:
            print(human)


def _formula(text: str):
    return parse(text)


def _ordered(N, states) -> list[str]:
    return [s for s in N.states if s in states]


def _multi(f) -> bool:
    return any(a != 1 for a in agents_of(desugar(f)))


# --------------------------------------------------------------------------
# verbs

def cmd_parse(args, out: _Out) -> int:
    f = _formula(args.formula)
    g = desugar(f)
    multi = _multi(f)
    data = {"formula": render(f, multi), "canonical": render(g, multi),
            "language": classify(g).value, "depth": modal_depth(g)}
    out.emit("\n".join(f"{k}: {v}" for k, v in data.items()), data)
    return OK


def cmd_eval(args, out: _Out) -> int:
    N = st.load(args.model)
    value = eval_formula(N, args.state, _formula(args.formula))
    out.emit("true" if value else "false", {"value": value})
    return OK if value else FALSE


def cmd_extension(args, out: _Out) -> int:
    N = st.load(args.model)
    ext = _ordered(N, satisfying_states(N, _formula(args.formula)))
    out.emit(" ".join(ext) if ext else "(empty)", {"states": ext})
    return OK


def cmd_valid(args, out: _Out) -> int:
    N = st.load(args.model)
    ok, witness = valid_in_structure(N, _formula(args.formula))
    out.emit("valid" if ok else f"invalid at {witness}", {"valid": ok, "witness": witness})
    return OK if ok else FALSE


def _verdict(res, out: _Out, extra: dict | None = None) -> int:
    data = {"verdict": res.verdict, **(extra or {})}
    lines = [res.verdict]
    if res.countermodel:
        M, s = res.countermodel
        data["state"] = s
        data["countermodel"] = st.to_dict(M)
        lines += [f"state: {s}", st.dumps(M)]
    out.emit("\n".join(lines), data)
    return OK if res.valid else FALSE


def _save_countermodel(res, path: str | None) -> None:
    if path and res.countermodel:
        st.save(res.countermodel[0], path)


def cmd_decide(args, out: _Out) -> int:
    res = decide(_formula(args.formula), args.system, budget=args.budget)
    _save_countermodel(res, args.out)
    return _verdict(res, out, {"system": System.parse(args.system).name})


def cmd_decide_cert(args, out: _Out) -> int:
    res = decide_certainty(_formula(args.formula), args.cls, args.system, budget=args.budget)
    _save_countermodel(res, args.out)
    return _verdict(res, out, {"class": args.cls})


def cmd_bridge(args, out: _Out) -> int:
    r = check_s5_kd45_bridge(_formula(args.formula), budget=args.budget)
    data = {"agree": r.agree, "s5_valid": r.s5_valid, "kd45_valid": r.kd45_valid}
    human = (f"S5: {'valid' if r.s5_valid else 'invalid'}; "
             f"K-form in KD45: {'valid' if r.kd45_valid else 'invalid'}; "
             f"{'agree' if r.agree else 'DISAGREE'}")
    out.emit(human, data)
    return OK if r.agree else FALSE


def cmd_translate(args, out: _Out) -> int:
    f = desugar(_formula(args.formula))
    g = translate_K_to_C(f) if args.to == "C" else translate_C_to_K(f)
    text = render(g, _multi(g))
    out.emit(text, {"formula": text})
    return OK


def cmd_normalize(args, out: _Out) -> int:
    trace: list = []
    g = normalize_depth_one(_formula(args.formula), trace)
    text = render(g)
    steps = [str(t) for t in trace]
    human = text if not args.trace else "\n".join(steps + [text])
    out.emit(human, {"formula": text, "trace": steps})
    return OK


def _relation_of(N, agent: int):
    if isinstance(N, st.KnowledgeStructure):
        return N.K[agent]
    return st.support_relation(N, agent)


def cmd_frame_props(args, out: _Out) -> int:
    N = st.load(args.model)
    props = st.frame_properties(_relation_of(N, args.agent), N.states)
    data = dict(vars(props))
    out.emit("\n".join(f"{k}: {str(v).lower()}" for k, v in data.items()), data)
    return OK


def cmd_support(args, out: _Out) -> int:
    N = st.load(args.model)
    if isinstance(N, st.KnowledgeStructure):
        raise StructureError("support relations need a probability structure or frame")
    order = {s: i for i, s in enumerate(N.states)}
    pairs = sorted(st.support_relation(N, args.agent), key=lambda e: (order[e[0]], order[e[1]]))
    uniform = st.is_uniform(N, args.agent)
    human = "\n".join(f"{s} -> {t}" for s, t in pairs) + f"\nuniform: {str(uniform).lower()}"
    out.emit(human, {"support": [list(p) for p in pairs], "uniform": uniform})
    return OK


def cmd_fb(args, out: _Out) -> int:
    N = st.load(args.model)
    rep = false_belief_states(N, args.agent)
    data = rep.to_dict(N.states)
    if data["fb"]:
        lines = [f"{s}: {data['witnesses'][s]}" for s in data["fb"]]
    else:
        lines = ["no false beliefs"]
    out.emit("\n".join(lines + [f"measure: {data['measure']}"]), data)
    return OK


def _interval(pair: Sequence[str]) -> Interval:
    return Interval(parse_rational(pair[0]), parse_rational(pair[1]))


def cmd_miller_instance(args, out: _Out) -> int:
    phi = _formula(args.formula)
    I = _interval(args.interval)
    w1, w2 = args.agents
    if args.given:
        atoms = [_formula(t) for t in args.given]
        g = stronger_miller_instance(phi, atoms, I, w1, w2)
        text = render(g, multi_agent=(w1, w2) != (1, 1))
        out.emit(text, {"formula": text})
        return OK
    inst = miller_instance(phi, I, w1, w2)
    multi = (w1, w2) != (1, 1)
    data = {"instance": str(inst), "canonical": render(inst.rendered, multi)}
    out.emit(f"{data['instance']}\ncanonical: {data['canonical']}", data)
    return OK


_PROP_NAMES = ("p", "q", "r", "s", "t", "u")


def cmd_miller_check_frame(args, out: _Out) -> int:
    F = st.load(args.frame)
    if not isinstance(F, st.Frame):
        raise StructureError("check-frame needs a frame file")
    if not 1 <= args.props <= len(_PROP_NAMES):
        raise ValueError(f"--props must be between 1 and {len(_PROP_NAMES)}")
    props = _PROP_NAMES[:args.props]
    if args.battery:
        with open(args.battery, encoding="utf-8") as fh:
            battery = battery_from_json(fh.read())
    else:
        battery = default_battery((args.agent, args.agent))
    rep = check_miller_theorem(F, battery, props, args.agent, jobs=args.jobs)
    data = rep.to_dict()
    lines = [f"uniform: {str(rep.uniform).lower()}",
             f"all instances valid: {str(rep.all_valid).lower()}"]
    if "counterexample" in data:
        c = data["counterexample"]
        lines.append(f"fails at {c['state']} under {c['assignment']}: {c['instance']}")
    if "countermodel" in data:
        c = data["countermodel"]
        lines.append(f"countermodel: {c['assignment']} at {c['state']}: {c['instance']}")
    if "countermodel_error" in data:
        lines.append(f"no countermodel: {data['countermodel_error']}")
    out.emit("\n".join(lines), data)
    return OK if rep.all_valid else FALSE


def cmd_miller_sgood(args, out: _Out) -> int:
    N = st.load(args.model)
    good = _ordered(N, s_good(N, args.expert, args.agent))
    out.emit(" ".join(good) if good else "(empty)", {"s_good": good})
    return OK


def cmd_miller_ecc(args, out: _Out) -> int:
    N = st.load(args.model)
    ok = equivalence_class_constraint(N, args.expert, args.agent)
    out.emit("true" if ok else "false", {"holds": ok})
    return OK if ok else FALSE


def cmd_prove_check(args, out: _Out) -> int:
    if args.bundled:
        proofs = list(bundled_proofs())
    elif args.file:
        proofs = [(args.file, load_proof(args.file))]
    else:
        raise ValueError("give a proof file or --bundled")
    results = []
    for name, p in proofs:
        r = check_proof(p)
        results.append({"proof": name, "ok": r.ok, "line": r.line, "reason": r.reason})
    lines = [f"{r['proof']}: ok" if r["ok"] else f"{r['proof']}: line {r['line']}: {r['reason']}"
             for r in results]
    out.emit("\n".join(lines), results if args.bundled else results[0])
    return OK if all(r["ok"] for r in results) else FALSE


def cmd_enumerate(args, out: _Out) -> int:
    props = _PROP_NAMES[:args.props]
    constraints = System.parse(args.system).constraints if args.system else None
    if args.sample:
        items = list(st.enumerate_knowledge_structures(
            args.states, props, constraints, exact=args.exact, limit=args.limit))
        rng = random.Random(args.seed)
        pick = sorted(rng.sample(range(len(items)), min(args.sample, len(items))))
        dumped = [st.to_dict(items[i]) for i in pick]
        out.emit("\n".join(json.dumps(d) for d in dumped), {"count": len(items), "sample": dumped})
        return OK
    n = sum(1 for _ in st.enumerate_knowledge_structures(
        args.states, props, constraints, exact=args.exact, limit=args.limit))
    out.emit(str(n), {"count": n})
    return OK


# --------------------------------------------------------------------------
# argument parsing

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="structured JSON output")
    p.add_argument("--seed", type=int, default=0, help="seed for any sampling")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch checks")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="certlogic", parents=[common],
                                     description="Knowledge, certainty and probability logics.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def verb(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    def formula(p):
        p.add_argument("-f", "--formula", required=True)

    def model(p):
        p.add_argument("-m", "--model", required=True, help="structure file (JSON)")

    def budget(p):
        p.add_argument("--budget", type=int, default=10 ** 6, help="tableau node budget")
        p.add_argument("--out", help="also write the countermodel to this file")

    p = verb("parse", cmd_parse, "parse and classify a formula")
    formula(p)
    p = verb("eval", cmd_eval, "truth of a formula at a state")
    model(p)
    p.add_argument("-s", "--state", required=True)
    formula(p)
    p = verb("extension", cmd_extension, "states satisfying a formula")
    model(p)
    formula(p)
    p = verb("valid", cmd_valid, "validity in one structure")
    model(p)
    formula(p)
    p = verb("decide", cmd_decide, "validity in a normal system")
    p.add_argument("-sys", "--system", required=True)
    formula(p)
    budget(p)
    p = verb("decide-cert", cmd_decide_cert, "validity of a certainty formula in a class")
    p.add_argument("--class", dest="cls", required=True, choices=CERTAINTY_CLASSES)
    p.add_argument("-sys", "--system", help="system for class N^A")
    formula(p)
    budget(p)
    p = verb("bridge", cmd_bridge, "S5 validity of f against KD45 validity of K f")
    formula(p)
    p.add_argument("--budget", type=int, default=10 ** 6)
    p = verb("translate", cmd_translate, "swap K and Cert")
    formula(p)
    p.add_argument("--to", choices=("C", "K"), required=True)
    p = verb("normalize", cmd_normalize, "remove nested modalities (KD45)")
    formula(p)
    p.add_argument("--trace", action="store_true")
    for name, func, help_ in (("frame-props", cmd_frame_props, "properties of a relation"),
                              ("support", cmd_support, "support relation and uniformity"),
                              ("fb", cmd_fb, "false-belief states of a simple structure")):
        p = verb(name, func, help_)
        model(p)
        p.add_argument("--agent", type=int, default=1)

    p = verb("miller", None, "Miller's principle tools")
    msub = p.add_subparsers(dest="miller_verb", required=True)

    def mverb(name, func, help_):
        q = msub.add_parser(name, parents=[common], help=help_)
        q.set_defaults(func=func)
        return q

    q = mverb("instance", cmd_miller_instance, "build an instance")
    formula(q)
    q.add_argument("--interval", nargs=2, required=True, metavar=("LO", "HI"))
    q.add_argument("--agents", nargs=2, type=int, default=[1, 1], metavar=("W1", "W2"))
    q.add_argument("--given", action="append", help="extra conditioning atom w(chi) in [a, b]")
    q = mverb("check-frame", cmd_miller_check_frame, "check a frame against a battery")
    q.add_argument("-F", "--frame", required=True)
    q.add_argument("--props", type=int, default=1, help="number of propositions")
    q.add_argument("--battery", help="battery file (JSON); default battery otherwise")
    q.add_argument("--agent", type=int, default=1)
    for name, func, help_ in (("sgood", cmd_miller_sgood, "states where the expert is self-certain"),
                              ("ecc", cmd_miller_ecc, "equivalence class constraint")):
        q = mverb(name, func, help_)
        model(q)
        q.add_argument("--expert", type=int, default=1)
        q.add_argument("--agent", type=int, default=2)

    p = verb("prove-check", cmd_prove_check, "check a Hilbert-style proof")
    p.add_argument("file", nargs="?")
    p.add_argument("--bundled", action="store_true", help="check the bundled corpus")
    p = verb("enumerate", cmd_enumerate, "count knowledge structures")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--props", type=int, default=1)
    p.add_argument("-sys", "--system", help="restrict to the frames of a system")
    p.add_argument("--exact", action="store_true", help="exactly this many states")
    p.add_argument("--limit", type=int, default=10 ** 6)
    p.add_argument("--sample", type=int, default=0, help="print this many seeded samples")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code not in (0, None) else OK
    out = _Out(args.json)
    try:
        return args.func(args, out)
    except ResourceLimitExceeded as e:
        print(f"certlogic: resource limit: {e}", file=sys.stderr)
        return LIMIT
    except (ParseError, StructureError, SemanticsError, ValueError, OSError,
            json.JSONDecodeError, KeyError) as e:
        print(f"certlogic: error: {e}", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
