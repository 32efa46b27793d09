"""JSON documents for models, strategies, certificates and automata.

Rationals travel as strings (``"3"``, ``"1/4"``); floats are rejected.
Errors carry a JSON path and, where the offending literal is a string, its
line and column in the source text.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
import re
from fractions import Fraction
from typing import Any, Optional

from .model import Mdp, ModelError, Move, is_mc, validate
from .semantics import FiniteMemoryStrategy, LocalStrategy, StrategyError

FORMAT_VERSION = 1
RATIONAL_RE = re.compile(r"-?[0-9]+(/[0-9]*[1-9][0-9]*)?")


class ParseError(ValueError):
    def __init__(self, message: str, path: str = "$", line: Optional[int] = None,
                 col: Optional[int] = None):
        self.path, self.line, self.col = path, line, col
        where = path
        if line is not None:
            where += f" (line {line}, column {col})"
        super().__init__(f"{where}: {message}")


class _Str(str):
    """A string value remembering where it sat in the source."""

    pos: int = -1


def _loads(text: str) -> Any:
    dec = json.JSONDecoder()
    plain = dec.parse_string

    def parse_string(s, end, strict):
        value, end2 = plain(s, end, strict)
        out = _Str(value)
        out.pos = end - 1
        return out, end2

    dec.parse_string = parse_string
    dec.scan_once = json.scanner.py_make_scanner(dec)
    try:
        return dec.decode(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"syntax error: {e.msg}", "$", e.lineno, e.colno) from None


class _Doc:
    def __init__(self, text: str):
        self.text = text

    def locate(self, value: Any) -> tuple:
        pos = getattr(value, "pos", -1)
        if pos < 0:
            return None, None
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, msg: str, path: str, value: Any = None):
        line, col = self.locate(value)
        raise ParseError(msg, path, line, col)

    def rational(self, value: Any, path: str, prob: bool = False) -> Fraction:
        if not isinstance(value, str):
            self.fail(f"expected a rational string, got {type(value).__name__}", path)
        if not RATIONAL_RE.fullmatch(value):
            self.fail(f"malformed rational {str(value)!r}", path, value)
        r = Fraction(str(value))
        if prob and not 0 <= r <= 1:
            self.fail(f"probability {r} outside [0,1]", path, value)
        return r

    def field(self, obj: dict, key: str, kind: type, path: str) -> Any:
        if not isinstance(obj, dict):
            self.fail("expected an object", path)
        if key not in obj:
            self.fail(f"missing field {key!r}", path)
        v = obj[key]
        if kind is int and isinstance(v, bool) or not isinstance(v, kind):
            self.fail(f"field {key!r} must be {kind.__name__}", f"{path}.{key}", v)
        return v

    def names(self, obj: dict, key: str, path: str) -> list:
        vals = self.field(obj, key, list, path)
        for i, v in enumerate(vals):
            if not isinstance(v, str):
                self.fail("expected a string", f"{path}.{key}[{i}]")
        if len(set(vals)) != len(vals):
            self.fail("duplicate names", f"{path}.{key}")
        return [str(v) for v in vals]

    def version(self, obj: dict) -> None:
        v = self.field(obj, "format_version", int, "$")
        if v != FORMAT_VERSION:
            self.fail(f"unsupported format_version {v}", "$.format_version")


def _fmt(r: Fraction) -> str:
    return str(Fraction(r))


# --------------------------------------------------------------------------
# models

def parse_model(text: str) -> Mdp:
    doc = _Doc(text)
    obj = _loads(text)
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    doc.version(obj)
    kind = doc.field(obj, "kind", str, "$")
    if kind not in ("mc", "mdp"):
        doc.fail(f"kind must be 'mc' or 'mdp', got {str(kind)!r}", "$.kind", kind)
    labels = doc.names(obj, "labels", "$")
    states = doc.names(obj, "states", "$")
    s_idx = {s: i for i, s in enumerate(states)}
    l_idx = {a: i for i, a in enumerate(labels)}

    init_obj = doc.field(obj, "initial", dict, "$")
    initial = [Fraction(0)] * len(states)
    for s, p in init_obj.items():
        if s not in s_idx:
            doc.fail(f"unknown state {str(s)!r}", f"$.initial.{s}")
        initial[s_idx[s]] = doc.rational(p, f"$.initial.{s}", prob=True)

    moves_obj = doc.field(obj, "moves", dict, "$")
    moves = [()] * len(states)
    for s, ms in moves_obj.items():
        path = f"$.moves.{s}"
        if s not in s_idx:
            doc.fail(f"unknown state {str(s)!r}", path)
        if not isinstance(ms, list):
            doc.fail("expected a list of moves", path)
        built = []
        for i, mv in enumerate(ms):
            mpath = f"{path}[{i}]"
            if not isinstance(mv, list):
                doc.fail("a move is a list of entries", mpath)
            entries: dict = {}
            for j, e in enumerate(mv):
                epath = f"{mpath}[{j}]"
                lab = doc.field(e, "label", str, epath)
                tgt = doc.field(e, "target", str, epath)
                if lab not in l_idx:
                    doc.fail(f"unknown label {str(lab)!r}", f"{epath}.label", lab)
                if tgt not in s_idx:
                    doc.fail(f"unknown state {str(tgt)!r}", f"{epath}.target", tgt)
                p = doc.rational(e.get("prob"), f"{epath}.prob", prob=True)
                key = (l_idx[lab], s_idx[tgt])
                entries[key] = entries.get(key, Fraction(0)) + p
            built.append(Move(entries))
        moves[s_idx[s]] = tuple(built)

    m = Mdp(tuple(states), tuple(labels), tuple(initial), tuple(moves))
    problems = validate(m)
    if problems:
        raise ModelError(problems)
    if kind == "mc" and not is_mc(m):
        raise ParseError("document declares kind 'mc' but some state has several moves", "$.kind")
    return m


def serialize_model(m: Mdp) -> str:
    """Canonical text: fixed key order, two-space indent, one entry per line.

    States and labels keep the model's order, since move indices and state
    order carry meaning; move entries are sorted by (label, target) index.
    """
    problems = validate(m)
    if problems:
        raise ModelError(problems)
    q = json.dumps
    lines = ["{", f'  "format_version": {FORMAT_VERSION},',
             f'  "kind": {q("mc" if is_mc(m) else "mdp")},',
             f'  "labels": [{", ".join(q(a) for a in m.labels)}],',
             f'  "states": [{", ".join(q(s) for s in m.states)}],']
    init = [f"{q(s)}: {q(_fmt(p))}" for s, p in zip(m.states, m.initial) if p]
    lines.append(f'  "initial": {{{", ".join(init)}}},')
    lines.append('  "moves": {')
    for i, (s, ms) in enumerate(zip(m.states, m.moves)):
        lines.append(f"    {q(s)}: [")
        for j, mv in enumerate(ms):
            ents = ", ".join(
                f'{{"label": {q(m.labels[a])}, "target": {q(m.states[t])}, "prob": {q(_fmt(p))}}}'
                for (a, t), p in mv.entries.items()
            )
            lines.append(f"      [{ents}]" + ("," if j < len(ms) - 1 else ""))
        lines.append("    ]" + ("," if i < m.n_states - 1 else ""))
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_model(path: str) -> Mdp:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def dump_model(m: Mdp, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_model(m))


# --------------------------------------------------------------------------
# strategies

def _dist(doc: _Doc, m: Mdp, q: int, value: Any, path: str) -> tuple:
    if not isinstance(value, list):
        doc.fail("expected a list of move weights", path)
    n = len(m.moves[q])
    if len(value) != n:
        doc.fail(f"{len(value)} weights for {n} moves", path)
    d = tuple(doc.rational(v, f"{path}[{i}]", prob=True) for i, v in enumerate(value))
    if sum(d) != 1:
        doc.fail(f"weights sum to {sum(d)}, not 1", path)
    return d


def _state(doc: _Doc, m: Mdp, name: Any, path: str) -> int:
    if name not in m.state_index:
        doc.fail(f"unknown state {str(name)!r}", path, name)
    return m.state_index[name]


def parse_strategy(text: str, m: Mdp):
    """Read a memoryless or finite-memory strategy for ``m``.

    States with a single move may be omitted; they get that move.
    """
    doc = _Doc(text)
    obj = _loads(text)
    doc.version(obj)
    kind = doc.field(obj, "kind", str, "$")

    def defaulted(q: int, what: str, path: str) -> tuple:
        if len(m.moves[q]) == 1:
            return (Fraction(1),)
        doc.fail(f"no choice for state {m.states[q]!r} ({what})", path)

    if kind == "memoryless":
        ch = doc.field(obj, "choices", dict, "$")
        picks = {}
        for s, d in ch.items():
            q = _state(doc, m, s, f"$.choices.{s}")
            picks[q] = _dist(doc, m, q, d, f"$.choices.{s}")
        return LocalStrategy(tuple(
            picks[q] if q in picks else defaulted(q, "memoryless", "$.choices")
            for q in range(m.n_states)
        ))

    if kind == "finite-memory":
        mem = doc.names(obj, "memory", "$")
        if not mem:
            doc.fail("memory must be nonempty", "$.memory")
        k_idx = {k: i for i, k in enumerate(mem)}
        init = doc.field(obj, "initial", str, "$")
        if init not in k_idx:
            doc.fail(f"unknown memory state {str(init)!r}", "$.initial", init)

        def expand(value: Any, universe: dict, path: str) -> list:
            if value == "*":
                return list(universe.values())
            if value not in universe:
                doc.fail(f"unknown name {str(value)!r}", path, value)
            return [universe[value]]

        update = {}
        for i, e in enumerate(doc.field(obj, "update", list, "$")):
            p = f"$.update[{i}]"
            nxt = doc.field(e, "next", str, p)
            if nxt not in k_idx:
                doc.fail(f"unknown memory state {str(nxt)!r}", f"{p}.next", nxt)
            for k in expand(doc.field(e, "memory", str, p), k_idx, f"{p}.memory"):
                for a in expand(doc.field(e, "label", str, p), m.label_index, f"{p}.label"):
                    for q in expand(doc.field(e, "state", str, p), m.state_index, f"{p}.state"):
                        update.setdefault((k, a, q), k_idx[nxt])
        output = {}
        for i, e in enumerate(doc.field(obj, "output", list, "$")):
            p = f"$.output[{i}]"
            for k in expand(doc.field(e, "memory", str, p), k_idx, f"{p}.memory"):
                for q in expand(doc.field(e, "state", str, p), m.state_index, f"{p}.state"):
                    d = _dist(doc, m, q, e.get("choice"), f"{p}.choice")
                    output.setdefault((k, q), d)
        for k in range(len(mem)):
            for q in range(m.n_states):
                if (k, q) not in output:
                    output[(k, q)] = defaulted(q, f"memory {mem[k]!r}", "$.output")
        try:
            return FiniteMemoryStrategy(tuple(mem), k_idx[init], update, output).check(m)
        except StrategyError as e:
            raise ParseError(str(e)) from None

    doc.fail(f"unknown strategy kind {str(kind)!r}", "$.kind", kind)


def serialize_strategy(m: Mdp, s) -> str:
    if isinstance(s, LocalStrategy):
        obj = {"format_version": FORMAT_VERSION, "kind": "memoryless",
               "choices": {m.states[q]: [_fmt(p) for p in d] for q, d in enumerate(s.choice)}}
    else:
        obj = {
            "format_version": FORMAT_VERSION, "kind": "finite-memory",
            "memory": list(s.memory), "initial": s.memory[s.initial],
            "update": [{"memory": s.memory[k], "label": m.labels[a], "state": m.states[q],
                        "next": s.memory[k2]} for (k, a, q), k2 in sorted(s.update.items())],
            "output": [{"memory": s.memory[k], "state": m.states[q],
                        "choice": [_fmt(p) for p in d]} for (k, q), d in sorted(s.output.items())],
        }
    return json.dumps(obj, indent=2) + "\n"


# --------------------------------------------------------------------------
# certificates (the Certificate type lives in bisim)

def parse_certificate(text: str, union: Mdp):
    from .bisim import Certificate

    doc = _Doc(text)
    obj = _loads(text)
    doc.version(obj)
    k = doc.field(obj, "k", int, "$")
    refs = doc.field(obj, "back_refs", list, "$")
    labs = doc.field(obj, "labels", list, "$")
    strats = doc.field(obj, "strategies", list, "$")
    for i, r in enumerate(refs):
        if not isinstance(r, int) or isinstance(r, bool):
            doc.fail("back reference must be an integer", f"$.back_refs[{i}]")
    labels = []
    for i, a in enumerate(labs):
        if a not in union.label_index:
            doc.fail(f"unknown label {str(a)!r}", f"$.labels[{i}]", a)
        labels.append(union.label_index[a])
    picks = []
    for i, st in enumerate(strats):
        path = f"$.strategies[{i}]"
        if not isinstance(st, dict):
            doc.fail("expected a state -> move index map", path)
        row = [0] * union.n_states
        for s, mi in st.items():
            q = _state(doc, union, s, f"{path}.{s}")
            if not isinstance(mi, int) or isinstance(mi, bool) or not 0 <= mi < len(union.moves[q]):
                doc.fail(f"state {s!r} has no move {mi!r}", f"{path}.{s}")
            row[q] = mi
        picks.append(tuple(row))
    return Certificate(k, tuple(refs), tuple(labels), tuple(picks))


def serialize_certificate(cert, union: Mdp) -> str:
    obj = {
        "format_version": FORMAT_VERSION,
        "kind": "certificate",
        "k": cert.k,
        "back_refs": list(cert.back_refs),
        "labels": [union.labels[a] for a in cert.labels],
        "strategies": [
            {union.states[q]: i for q, i in enumerate(p) if i} for p in cert.strategies
        ],
    }
    return json.dumps(obj, indent=2) + "\n"


# --------------------------------------------------------------------------
# probabilistic automata (gadget input)

def parse_pa(text: str):
    from .gadgets import ProbabilisticAutomaton

    doc = _Doc(text)
    obj = _loads(text)
    doc.version(obj)
    states = doc.names(obj, "states", "$")
    s_idx = {s: i for i, s in enumerate(states)}
    letters = doc.names(obj, "letters", "$")
    init = [Fraction(0)] * len(states)
    for s, p in doc.field(obj, "initial", dict, "$").items():
        init[_pa_state(doc, s_idx, s, f"$.initial.{s}")] = doc.rational(p, f"$.initial.{s}", True)
    finals = [_pa_state(doc, s_idx, s, "$.finals") for s in doc.field(obj, "finals", list, "$")]
    delta = {}
    for s, per in doc.field(obj, "delta", dict, "$").items():
        q = _pa_state(doc, s_idx, s, f"$.delta.{s}")
        for e, dist in per.items():
            if e not in letters:
                doc.fail(f"unknown letter {str(e)!r}", f"$.delta.{s}.{e}", e)
            row = [Fraction(0)] * len(states)
            for t, p in dist.items():
                row[_pa_state(doc, s_idx, t, f"$.delta.{s}.{e}")] = doc.rational(
                    p, f"$.delta.{s}.{e}.{t}", True)
            delta[(q, letters.index(e))] = tuple(row)
    try:
        return ProbabilisticAutomaton(tuple(states), tuple(letters), tuple(init), delta,
                                      frozenset(finals)).check()
    except ValueError as e:
        raise ParseError(str(e)) from None


def _pa_state(doc: _Doc, s_idx: dict, name: Any, path: str) -> int:
    if name not in s_idx:
        doc.fail(f"unknown state {str(name)!r}", path, name)
    return s_idx[name]


def parse_rational(text: str) -> Fraction:
    if not RATIONAL_RE.fullmatch(text):
        raise ParseError(f"malformed rational {text!r}")
    return Fraction(text)
