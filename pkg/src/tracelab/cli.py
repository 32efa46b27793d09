"""Command-line front end.

Every command prints one JSON report on stdout and a one-line summary on
stderr.  Exit codes: 0 answered, 1 usage or input error, 2 enumeration guard
exceeded, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bisim import (DEFAULT_GUARD, GuardExceeded, MalformedCertificate, bisim_space_mdp_mc,
                    bisim_space_two_mdps, bisimilar, certificate_from_space, verify_certificate)
from .equivalence import mc_equiv
from .gadgets import (gadget_mutual, gadget_nmf, gadget_pa_universality, gadget_qss,
                      gadget_subset_sum)
from .io import (ParseError, dump_model, load_model, parse_certificate, parse_pa, parse_rational,
                 parse_strategy, serialize_certificate)
from .model import ModelError, disjoint_union, is_mc, relabel_to
from .oracle import oracle_mc_equiv, oracle_refines_mc
from .refinement import refines_mc
from .restricted import emit_etr, refine_mc_mdp_pm, refine_pm_pm, run_solver
from .semantics import FiniteMemoryStrategy, StrategyError, product_sub_dis, sub_dis

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _q(x: Fraction) -> str:
    return str(Fraction(x))


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _model(path: str):
    try:
        return load_model(path)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _guard(args) -> int:
    if args.guard is not None:
        return args.guard
    env = os.environ.get("TRACELAB_GUARD")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"TRACELAB_GUARD must be an integer, got {env!r}") from None
    return DEFAULT_GUARD


def _aligned(a, b):
    if set(a.labels) != set(b.labels):
        raise ModelError([f"label sets differ: {sorted(a.labels)} vs {sorted(b.labels)}"])
    return b if b.labels == a.labels else relabel_to(b, a.labels)


def _picks_map(m, picks) -> dict:
    return {s: i for s, i in zip(m.states, picks)}


# --------------------------------------------------------------------------
# commands; each returns (report, summary)

def cmd_validate(args):
    try:
        m = load_model(args.model)
    except OSError as e:
        raise UsageError(f"cannot read {args.model}: {e.strerror}") from None
    except ModelError as e:
        return {"verdict": "Invalid", "violations": list(e.violations)}, "Invalid"
    except ParseError as e:
        return {"verdict": "Invalid", "violations": [str(e)]}, "Invalid"
    rep = {"verdict": "Valid", "kind": "mc" if is_mc(m) else "mdp",
           "states": m.n_states, "labels": list(m.labels)}
    return rep, f"Valid {rep['kind']} with {m.n_states} states"


def cmd_tr(args):
    m = _model(args.model)
    w = m.word(args.word)
    strategy = None
    if args.strategy:
        strategy = parse_strategy(_read(args.strategy), m)
    elif not is_mc(m):
        raise UsageError("an MDP needs --strategy")
    if isinstance(strategy, FiniteMemoryStrategy):
        mu = product_sub_dis(m, strategy, w)
    else:
        mu = sub_dis(m, strategy, w)
    p = sum(mu, Fraction(0))
    rep = {"verdict": _q(p), "word": m.word_text(w), "probability": _q(p),
           "subdistribution": {s: _q(x) for s, x in zip(m.states, mu) if x}}
    return rep, f"Tr({m.word_text(w) or 'ε'}) = {_q(p)}"


def cmd_equiv(args):
    c1, c2 = _model(args.mc1), _model(args.mc2)
    v = mc_equiv(c1, c2)
    rep = {"verdict": v.result, "insertions": v.insertions, "dimension": v.basis.rank}
    if not v.equivalent:
        rep.update(witness=c1.word_text(v.witness), lhs_prob=_q(v.lhs_prob),
                   rhs_prob=_q(v.rhs_prob))
        return rep, f"Distinguished by {c1.word_text(v.witness)!r}: {_q(v.lhs_prob)} vs {_q(v.rhs_prob)}"
    return rep, "Equivalent"


def cmd_refine_mdp_mc(args):
    d, c = _model(args.mdp), _model(args.mc)
    v = refines_mc(d, c, args.base)
    rep = {"verdict": v.result, "sigma_size": v.sigma_size, "insertions": v.insertions}
    if not v.holds:
        rep.update(lifted_witness=list(v.lifted_witness), lhs_prob=_q(v.lhs_prob),
                   rhs_prob=_q(v.rhs_prob),
                   decoded=[{"strategy": sid, "label": a} for sid, a in v.decoded])
        return rep, f"Fails: lifted word {' '.join(v.lifted_witness)}"
    return rep, "Holds"


def cmd_bisim(args):
    m1, m2 = _model(args.m1), _model(args.m2)
    m2 = _aligned(m1, m2)
    u = disjoint_union(m1, m2)
    if args.mode == "mdp-mc":
        if not is_mc(m2):
            raise UsageError("mode mdp-mc needs an MC as second model")
        space = bisim_space_mdp_mc(m1, m2)
        u = space.union
    else:
        space = bisim_space_two_mdps(u, _guard(args))
    same = bisimilar(space, u.left_initial, u.right_initial)
    rep = {"verdict": "Bisimilar" if same else "NotBisimilar", "mode": args.mode,
           "dimension": space.dim, "stabilized_at": space.stabilized_at, "dims": space.dims}
    if not same and args.mode == "mdp-mdp":
        cert = certificate_from_space(space, u.left_initial, u.right_initial)
        rep["certificate"] = json.loads(serialize_certificate(cert, u.model))
    return rep, rep["verdict"]


def cmd_verify_cert(args):
    m1, m2 = _model(args.m1), _model(args.m2)
    u = disjoint_union(m1, _aligned(m1, m2))
    cert = parse_certificate(_read(args.cert), u.model)
    try:
        v = verify_certificate(u, u.left_initial, u.right_initial, cert)
    except MalformedCertificate as e:
        raise UsageError(f"malformed certificate: {e}") from None
    rep = {"verdict": v.result, "k": cert.k}
    if v.reason:
        rep["reason"] = v.reason
    return rep, v.result + (f": {v.reason}" if v.reason else "")


def cmd_refine_pm(args):
    left, right = _model(args.left), _model(args.right)
    guard = _guard(args)
    if args.mode == "mc-mdp":
        v = refine_mc_mdp_pm(left, right, guard)
        rep = {"verdict": v.result, "checked": v.checked}
        if v.yes:
            rep["witness"] = _picks_map(right, v.witness.picks())
    else:
        v = refine_pm_pm(left, right, guard)
        rep = {"verdict": v.result, "checked": v.checked}
        if not v.yes:
            rep["unanswered"] = _picks_map(left, v.universal.picks())
    return rep, v.result


def cmd_emit_etr(args):
    c, d = _model(args.mc), _model(args.mdp)
    inst = emit_etr(c, d)
    rep = {"verdict": "Emitted", "variables": len(inst.variables),
           "assertions": len(inst.assertions), "logic": "QF_NRA"}
    if args.output:
        Path(args.output).write_text(inst.smtlib, encoding="utf-8")
        rep["output"] = args.output
    else:
        rep["smtlib"] = inst.smtlib
    if args.solver_cmd:
        res = run_solver(inst.smtlib, args.solver_cmd, args.solver_timeout)
        rep["solver"] = {"command": args.solver_cmd, "status": res.status,
                         "returncode": res.returncode}
        return rep, f"solver says {res.status}"
    return rep, f"{len(inst.variables)} variables, {len(inst.assertions)} assertions"


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"expected comma separated integers, got {text!r}") from None


def _matrix(text: str) -> list:
    try:
        return [[parse_rational(x.strip()) for x in row.split(",")] for row in text.split(";")]
    except ParseError as e:
        raise UsageError(str(e)) from None


def cmd_gadget(args):
    try:
        if args.kind == "subset-sum":
            g = gadget_subset_sum(_ints(args.values), args.target)
        elif args.kind == "qss":
            g = gadget_qss(_ints(args.s), _ints(args.t), args.target)
        elif args.kind == "nmf":
            g = gadget_nmf(_matrix(args.matrix), args.rank)
        elif args.kind == "pa-universal":
            g = gadget_pa_universality(parse_pa(_read(args.automaton)))
        else:
            g = gadget_mutual(_model(args.d), _model(args.e))
    except ValueError as e:
        if isinstance(e, (ParseError, ModelError)):
            raise
        raise UsageError(str(e)) from None
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    left, right, meta = out / "left.json", out / "right.json", out / "meta.json"
    dump_model(g.left, str(left))
    dump_model(g.right, str(right))
    meta_obj = {"kind": args.kind, **g.meta(), "left": left.name, "right": right.name}
    meta.write_text(json.dumps(meta_obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    rep = {"verdict": "Written", "kind": args.kind, "files": [str(left), str(right), str(meta)],
           "question": g.question}
    return rep, f"wrote {left}, {right}, {meta}"


def cmd_oracle(args):
    a, b = _model(args.first), _model(args.second)
    if args.depth < 0:
        raise UsageError("--depth must be non-negative")
    if args.which == "refine":
        v = oracle_refines_mc(a, b, args.depth)
    else:
        v = oracle_mc_equiv(a, b, args.depth)
    rep = {"verdict": v.result, "depth": v.depth}
    if v.found:
        rep.update(word=a.word_text(v.word), achieved=_q(v.achieved), required=_q(v.required),
                   mode=v.mode)
        return rep, f"Counterexample {a.word_text(v.word)!r}: {_q(v.achieved)} vs {_q(v.required)}"
    return rep, f"no counterexample up to depth {v.depth}"


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tracelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tracelab {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--guard", type=int, default=None,
                        help="enumeration guard (default: $TRACELAB_GUARD or 10^6)")
    common.add_argument("--decimal", action="store_true",
                        help="add approximate decimal values under 'approximate'")
    common.add_argument("--timings", action="store_true",
                        help="add wall-clock seconds (makes output nondeterministic)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check a model file")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("tr", parents=[common], help="trace probability of a word")
    s.add_argument("model")
    s.add_argument("--word", required=True)
    s.add_argument("--strategy")
    s.set_defaults(func=cmd_tr)

    s = sub.add_parser("equiv", parents=[common], help="trace equivalence of two MCs")
    s.add_argument("mc1")
    s.add_argument("mc2")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("refine-mdp-mc", parents=[common], help="does every strategy of the MDP match the MC")
    s.add_argument("mdp")
    s.add_argument("mc")
    s.add_argument("--base", choices=["first", "last"], default="first")
    s.set_defaults(func=cmd_refine_mdp_mc)

    s = sub.add_parser("bisim", parents=[common], help="distribution bisimilarity")
    s.add_argument("m1")
    s.add_argument("m2")
    s.add_argument("--mode", choices=["mdp-mc", "mdp-mdp"], default="mdp-mc")
    s.set_defaults(func=cmd_bisim)

    s = sub.add_parser("verify-cert", parents=[common], help="check a non-bisimilarity certificate")
    s.add_argument("m1")
    s.add_argument("m2")
    s.add_argument("cert")
    s.set_defaults(func=cmd_verify_cert)

    s = sub.add_parser("refine-pm", parents=[common], help="refinement under pure memoryless strategies")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--mode", choices=["mc-mdp", "mdp-mdp"], default="mc-mdp")
    s.set_defaults(func=cmd_refine_pm)

    s = sub.add_parser("emit-etr", parents=[common], help="SMT-LIB formula for memoryless refinement")
    s.add_argument("mc")
    s.add_argument("mdp")
    s.add_argument("-o", "--output")
    s.add_argument("--solver-cmd")
    s.add_argument("--solver-timeout", type=float, default=None)
    s.set_defaults(func=cmd_emit_etr)

    g = sub.add_parser("gadget", help="write a reduction instance")
    gsub = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    k = gsub.add_parser("subset-sum", parents=[common])
    k.add_argument("--values", required=True, help="e.g. 1,2,3")
    k.add_argument("--target", type=int, required=True)
    k = gsub.add_parser("qss", parents=[common])
    k.add_argument("--s", required=True)
    k.add_argument("--t", required=True)
    k.add_argument("--target", type=int, required=True)
    k = gsub.add_parser("nmf", parents=[common])
    k.add_argument("--matrix", required=True, help="rows split by ';', entries by ','")
    k.add_argument("--rank", type=int, required=True)
    k = gsub.add_parser("pa-universal", parents=[common])
    k.add_argument("automaton")
    k = gsub.add_parser("mutual", parents=[common])
    k.add_argument("d")
    k.add_argument("e")
    for k in gsub.choices.values():
        k.add_argument("-o", "--output", default=".", help="output directory")
        k.set_defaults(func=cmd_gadget)

    o = sub.add_parser("oracle", help="bounded brute-force checks")
    osub = o.add_subparsers(dest="which", required=True, parser_class=_Parser)
    for name in ("refine", "equiv"):
        k = osub.add_parser(name, parents=[common])
        k.add_argument("first")
        k.add_argument("second")
        k.add_argument("--depth", type=int, required=True)
        k.set_defaults(func=cmd_oracle)
    return p


def _approximate(rep: dict) -> dict:
    out = {}
    for key, val in rep.items():
        if isinstance(val, str) and key != "word":
            try:
                out[key] = float(parse_rational(val))
            except (ParseError, ZeroDivisionError):
                pass
    return out


def _emit(rep: dict, summary: str, code: int) -> int:
    sys.stdout.write(json.dumps(rep, indent=2, ensure_ascii=False) + "\n")
    sys.stderr.write(summary + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    command = None
    try:
        args = parser.parse_args(argv)
        command = args.command if args.command not in ("gadget", "oracle") else \
            f"{args.command} {getattr(args, 'kind', None) or args.which}"
        t0 = time.perf_counter()
        rep, summary = args.func(args)
        rep = {"command": command, "exit_code": EXIT_OK, **rep}
        if args.decimal:
            rep["approximate"] = _approximate(rep)
        if args.timings:
            rep["timings"] = {"seconds": round(time.perf_counter() - t0, 6)}
        return _emit(rep, summary, EXIT_OK)
    except GuardExceeded as e:
        rep = {"command": command, "exit_code": EXIT_GUARD, "error": "guard exceeded",
               "required_size": e.required, "limit": e.limit}
        return _emit(rep, f"guard exceeded: {e.required} > {e.limit}", EXIT_GUARD)
    except (UsageError, ParseError, ModelError, StrategyError) as e:
        msg = str(e) if not isinstance(e, ModelError) else "; ".join(e.violations)
        rep = {"command": command, "exit_code": EXIT_USAGE, "error": msg}
        return _emit(rep, f"error: {msg}", EXIT_USAGE)
    except Exception as e:  # anything else is a bug in the checkers
        rep = {"command": command, "exit_code": EXIT_INTERNAL,
               "error": f"internal error: {type(e).__name__}: {e}"}
        return _emit(rep, rep["error"], EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
