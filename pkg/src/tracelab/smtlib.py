"""A small SMT-LIB 2 reader, enough to check the scripts this package emits.

It tokenizes, builds s-expressions, and checks a restricted command set
(``set-logic``, ``set-info``, ``set-option``, ``declare-fun``,
``declare-const``, ``assert``, ``check-sat``, ``get-model``, ``exit``) over
real arithmetic terms.  It is a syntax and scoping check, not a solver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_TOKEN = re.compile(r"""
    (?P<ws>\s+|;[^\n]*)
  | (?P<lp>\()
  | (?P<rp>\))
  | (?P<dec>[0-9]+\.[0-9]+)
  | (?P<num>0|[1-9][0-9]*)
  | (?P<str>"(?:[^"]|"")*")
  | (?P<qsym>\|[^|\\]*\|)
  | (?P<kw>:[A-Za-z0-9~!@$%^&*_\-+=<>.?/]+)
  | (?P<sym>[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*)
""", re.VERBOSE)

ARITH = {"+": (1, None), "-": (1, None), "*": (2, None), "/": (2, None)}
COMPARE = {"=", "<=", ">=", "<", ">", "distinct"}
BOOL = {"and": (1, None), "or": (1, None), "not": (1, 1), "=>": (2, None)}


class SmtSyntaxError(ValueError):
    pass


@dataclass
class Script:
    logic: str = ""
    declared: dict = field(default_factory=dict)  # name -> sort
    assertions: list = field(default_factory=list)
    commands: list = field(default_factory=list)


def tokenize(text: str) -> list:
    out, pos = [], 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise SmtSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = mt.lastgroup
        if kind != "ws":
            out.append((kind, mt.group()))
        pos = mt.end()
    return out


def sexprs(tokens: list) -> list:
    stack: list = [[]]
    for kind, tok in tokens:
        if kind == "lp":
            stack.append([])
        elif kind == "rp":
            if len(stack) == 1:
                raise SmtSyntaxError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append((kind, tok))
    if len(stack) != 1:
        raise SmtSyntaxError("unbalanced '('")
    return stack[0]


def _atom(x, kind=None):
    return isinstance(x, tuple) and (kind is None or x[0] == kind)


def _sort_of(term, script: Script) -> str:
    if _atom(term):
        kind, tok = term
        if kind in ("num", "dec"):
            return "Real"
        if kind in ("sym", "qsym"):
            if tok in ("true", "false"):
                return "Bool"
            if tok not in script.declared:
                raise SmtSyntaxError(f"undeclared symbol {tok}")
            return script.declared[tok]
        raise SmtSyntaxError(f"unexpected token {tok}")
    if not term or not _atom(term[0], "sym"):
        raise SmtSyntaxError("application must start with a symbol")
    op, args = term[0][1], term[1:]
    sorts = [_sort_of(a, script) for a in args]
    if op in ARITH:
        lo, _ = ARITH[op]
        if len(args) < lo or any(s != "Real" for s in sorts):
            raise SmtSyntaxError(f"bad arguments to {op}")
        return "Real"
    if op in COMPARE:
        if len(args) < 2 or len(set(sorts)) != 1:
            raise SmtSyntaxError(f"bad arguments to {op}")
        if op != "=" and op != "distinct" and sorts[0] != "Real":
            raise SmtSyntaxError(f"{op} needs real arguments")
        return "Bool"
    if op in BOOL:
        lo, hi = BOOL[op]
        if len(args) < lo or (hi is not None and len(args) > hi) or any(s != "Bool" for s in sorts):
            raise SmtSyntaxError(f"bad arguments to {op}")
        return "Bool"
    raise SmtSyntaxError(f"unknown function {op}")


def parse_script(text: str) -> Script:
    script = Script()
    for cmd in sexprs(tokenize(text)):
        if _atom(cmd) or not cmd or not _atom(cmd[0], "sym"):
            raise SmtSyntaxError("top level items must be commands")
        name, args = cmd[0][1], cmd[1:]
        script.commands.append(name)
        if name == "set-logic":
            if len(args) != 1 or not _atom(args[0], "sym"):
                raise SmtSyntaxError("set-logic takes one symbol")
            script.logic = args[0][1]
        elif name in ("set-info", "set-option"):
            if not args or not _atom(args[0], "kw"):
                raise SmtSyntaxError(f"{name} needs a keyword")
        elif name in ("declare-fun", "declare-const"):
            if name == "declare-fun":
                if len(args) != 3 or args[1] != [] or not _atom(args[2], "sym"):
                    raise SmtSyntaxError("only nullary declare-fun is supported")
                sort = args[2][1]
            else:
                if len(args) != 2 or not _atom(args[1], "sym"):
                    raise SmtSyntaxError("malformed declare-const")
                sort = args[1][1]
            if not _atom(args[0], "sym") and not _atom(args[0], "qsym"):
                raise SmtSyntaxError("declaration needs a symbol")
            if sort not in ("Real", "Bool"):
                raise SmtSyntaxError(f"unsupported sort {sort}")
            if args[0][1] in script.declared:
                raise SmtSyntaxError(f"{args[0][1]} declared twice")
            script.declared[args[0][1]] = sort
        elif name == "assert":
            if len(args) != 1 or _sort_of(args[0], script) != "Bool":
                raise SmtSyntaxError("assert needs one boolean term")
            script.assertions.append(args[0])
        elif name in ("check-sat", "get-model", "exit"):
            if args:
                raise SmtSyntaxError(f"{name} takes no arguments")
        else:
            raise SmtSyntaxError(f"unsupported command {name}")
    return script
