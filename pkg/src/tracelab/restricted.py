"""Refinement under memoryless strategies.

Pure memoryless strategies are finitely many, so ``C ⊑ D`` (one witness
strategy) and ``D ⊑ E`` (a response for every strategy) are decided by
enumeration plus MC equivalence.  Randomized memoryless strategies are
handled only by writing the question as a real-arithmetic formula.
"""

from __future__ import annotations

import shlex
import subprocess
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod
from typing import Optional

from .bisim import DEFAULT_GUARD, GuardExceeded
from .equivalence import mc_equiv
from .model import Mdp, ModelError, disjoint_union, is_mc, relabel_to
from .rational import Basis, solve, transpose
from .semantics import LocalStrategy, induced_mc, step, sub_dis, words

YES = "Yes"
NO = "No"


@dataclass
class PmVerdict:
    result: str
    witness: Optional[LocalStrategy] = None  # Yes: the matching strategy
    universal: Optional[LocalStrategy] = None  # No in ∀∃ mode: the unanswered strategy
    responses: Optional[dict] = None  # ∀∃ mode, Yes: left picks -> right picks
    checked: int = 0

    @property
    def yes(self) -> bool:
        return self.result == YES


def pure_picks(m: Mdp, guard: int = DEFAULT_GUARD) -> list:
    total = prod(len(ms) for ms in m.moves)
    if total > guard:
        raise GuardExceeded(total, guard)
    return list(product(*(range(len(ms)) for ms in m.moves)))


def _signature(m: Mdp, depth: int = 2) -> tuple:
    """Trace probabilities of all short words; equal MCs share it."""
    return tuple(sum(sub_dis(m, None, w)) for w in words(m.n_labels, depth, 1))


def _same_labels(a: Mdp, b: Mdp) -> Mdp:
    if set(a.labels) != set(b.labels):
        raise ModelError([f"label sets differ: {sorted(a.labels)} vs {sorted(b.labels)}"])
    return b if b.labels == a.labels else relabel_to(b, a.labels)


def refine_mc_mdp_pm(c: Mdp, d: Mdp, guard: int = DEFAULT_GUARD) -> PmVerdict:
    """Is there a pure memoryless ``α`` with ``Tr_c = Tr_{d(α)}``?

    Candidates whose short-word trace probabilities already differ from
    ``c``'s are discarded before the full equivalence check.
    """
    if not is_mc(c):
        raise ModelError(["first argument is not an MC"])
    d = _same_labels(c, d)
    target = _signature(c)
    n = 0
    for picks in pure_picks(d, guard):
        n += 1
        alpha = LocalStrategy.pure(d, picks)
        mc = induced_mc(d, alpha)
        if _signature(mc) != target:
            continue
        if mc_equiv(c, mc).equivalent:
            return PmVerdict(YES, witness=alpha, checked=n)
    return PmVerdict(NO, checked=n)


def refine_pm_pm(d: Mdp, e: Mdp, guard: int = DEFAULT_GUARD) -> PmVerdict:
    """For every pure memoryless strategy of ``d``, one of ``e`` matching it."""
    e = _same_labels(d, e)
    left = pure_picks(d, guard)
    right = pure_picks(e, guard)
    pool: dict = {}
    for picks in right:
        mc = induced_mc(e, LocalStrategy.pure(e, picks))
        pool.setdefault(_signature(mc), []).append((picks, mc))
    responses = {}
    n = 0
    for picks in left:
        n += 1
        mc = induced_mc(d, LocalStrategy.pure(d, picks))
        answer = next((rp for rp, rmc in pool.get(_signature(mc), ())
                       if mc_equiv(mc, rmc).equivalent), None)
        if answer is None:
            return PmVerdict(NO, universal=LocalStrategy.pure(d, picks), checked=n)
        responses[picks] = answer
    return PmVerdict(YES, responses=responses, checked=n)


# --------------------------------------------------------------------------
# formula emission

Poly = dict  # monomial (sorted tuple of variable names) -> Fraction


def _padd(p: Poly, mono: tuple, c: Fraction) -> None:
    if c:
        mono = tuple(sorted(mono))
        v = p.get(mono, Fraction(0)) + c
        if v:
            p[mono] = v
        else:
            p.pop(mono, None)


def eval_poly(p: Poly, assignment: dict) -> Fraction:
    total = Fraction(0)
    for mono, c in p.items():
        term = c
        for v in mono:
            term *= assignment[v]
        total += term
    return total


@dataclass
class Assertion:
    """A conjunction of ``poly rel 0`` atoms with rel in {=, <=, >=}."""

    atoms: list
    note: str = ""

    def holds(self, assignment: dict) -> bool:
        for p, rel in self.atoms:
            v = eval_poly(p, assignment)
            if not {"=": v == 0, "<=": v <= 0, ">=": v >= 0}[rel]:
                return False
        return True


@dataclass
class EtrInstance:
    variables: list
    assertions: list
    n_left: int  # states of the MC, first block of the union
    n_right: int
    n_labels: int
    x_vars: dict = field(default_factory=dict)  # (q, m) -> name, q indexes the MDP
    f_vars: dict = field(default_factory=dict)  # (i, j) -> name
    m_vars: dict = field(default_factory=dict)  # (a, i, j) -> name
    smtlib: str = ""

    @property
    def n_states(self) -> int:
        return self.n_left + self.n_right


def expected_counts(c: Mdp, d: Mdp) -> tuple:
    """(variables, assertions) for the emitted formula, in closed form."""
    n = c.n_states + d.n_states
    moves = sum(len(ms) for ms in d.moves)
    n_vars = moves + n * n + c.n_labels * n * n
    n_asserts = d.n_states + moves + 2 * n + c.n_labels * n * n
    return n_vars, n_asserts


def emit_etr(c: Mdp, d: Mdp) -> EtrInstance:
    """Existential real-arithmetic formula for ``C ⊑ D`` under memoryless strategies.

    Unknowns: the strategy weights ``x``, a square matrix ``F`` and one
    matrix ``M(a)`` per label.  The union lists ``c``'s states first.
    """
    if not is_mc(c):
        raise ModelError(["first argument is not an MC"])
    if set(c.labels) != set(d.labels):
        raise ModelError([f"label sets differ: {sorted(c.labels)} vs {sorted(d.labels)}"])
    d = _same_labels(c, d)
    n1, n2, L = c.n_states, d.n_states, c.n_labels
    n = n1 + n2
    inst = EtrInstance([], [], n1, n2, L)
    for q, ms in enumerate(d.moves):
        for i in range(len(ms)):
            inst.x_vars[(q, i)] = f"x_{q}_{i}"
    for i in range(n):
        for j in range(n):
            inst.f_vars[(i, j)] = f"f_{i}_{j}"
    for a in range(L):
        for i in range(n):
            for j in range(n):
                inst.m_vars[(a, i, j)] = f"m_{a}_{i}_{j}"
    inst.variables = list(inst.x_vars.values()) + list(inst.f_vars.values()) + list(inst.m_vars.values())

    A = inst.assertions
    for q, ms in enumerate(d.moves):
        p: Poly = {}
        for i in range(len(ms)):
            _padd(p, (inst.x_vars[(q, i)],), Fraction(1))
        _padd(p, (), Fraction(-1))
        A.append(Assertion([(p, "=")], f"weights of {d.states[q]} sum to 1"))
    for (q, i), x in inst.x_vars.items():
        A.append(Assertion([({(x,): Fraction(-1)}, "<="), ({(x,): Fraction(1), (): Fraction(-1)}, "<=")],
                           f"{x} in [0,1]"))
    first = tuple(c.initial) + tuple(-p for p in d.initial)
    for j in range(n):
        p = {}
        _padd(p, (inst.f_vars[(0, j)],), Fraction(1))
        _padd(p, (), -first[j])
        A.append(Assertion([(p, "=")], f"first row of F, column {j}"))
    for i in range(n):
        p = {}
        for j in range(n):
            _padd(p, (inst.f_vars[(i, j)],), Fraction(1))
        A.append(Assertion([(p, "=")], f"row {i} of F sums to 0"))

    # block[k][j] as a polynomial in x (constant on the MC block)
    for a in range(L):
        block = [[{} for _ in range(n)] for _ in range(n)]
        for k in range(n1):
            for (b, t), pr in c.moves[k][0].entries.items():
                if b == a:
                    _padd(block[k][t], (), pr)
        for q, ms in enumerate(d.moves):
            for i, mv in enumerate(ms):
                for (b, t), pr in mv.entries.items():
                    if b == a:
                        _padd(block[n1 + q][n1 + t], (inst.x_vars[(q, i)],), pr)
        for i in range(n):
            for j in range(n):
                p: Poly = {}
                for k in range(n):
                    for mono, cf in block[k][j].items():
                        _padd(p, mono + (inst.f_vars[(i, k)],), cf)
                    _padd(p, (inst.m_vars[(a, i, k)], inst.f_vars[(k, j)]), Fraction(-1))
                A.append(Assertion([(p, "=")], f"label {c.labels[a]}, entry ({i},{j})"))
    inst.smtlib = to_smtlib(inst)
    return inst


def _num(c: Fraction) -> str:
    mag = abs(c)
    s = str(mag.numerator) if mag.denominator == 1 else f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {s})" if c < 0 else s


def _poly_text(p: Poly) -> str:
    terms = []
    for mono, c in sorted(p.items()):
        if not mono:
            terms.append(_num(c))
        elif c == 1:
            terms.append(mono[0] if len(mono) == 1 else f"(* {' '.join(mono)})")
        else:
            terms.append(f"(* {_num(c)} {' '.join(mono)})")
    if not terms:
        return "0"
    return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"


def to_smtlib(inst: EtrInstance) -> str:
    lines = ["(set-logic QF_NRA)"]
    lines += [f"(declare-fun {v} () Real)" for v in inst.variables]
    for a in inst.assertions:
        atoms = [f"({rel} {_poly_text(p)} 0)" for p, rel in a.atoms]
        body = atoms[0] if len(atoms) == 1 else f"(and {' '.join(atoms)})"
        lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


class MissingVariable(KeyError):
    pass


def check_assignment(inst: EtrInstance, assignment: dict) -> bool:
    missing = [v for v in inst.variables if v not in assignment]
    if missing:
        raise MissingVariable(f"no value for {missing[0]}" + (f" and {len(missing) - 1} more" if len(missing) > 1 else ""))
    vals = {k: Fraction(v) for k, v in assignment.items()}
    return all(a.holds(vals) for a in inst.assertions)


def failing_assertions(inst: EtrInstance, assignment: dict) -> list:
    vals = {k: Fraction(v) for k, v in assignment.items()}
    return [a.note for a in inst.assertions if not a.holds(vals)]


def known_solution(c: Mdp, d: Mdp, alpha: LocalStrategy) -> Optional[dict]:
    """An exact satisfying assignment when ``c`` and ``d(α)`` are equivalent.

    ``F`` stacks a basis of the row vectors ``(μ₀, −μ₀′)·Δ(w)`` (first row
    the empty word), padded with zero rows; each ``M(a)`` solves
    ``M(a)·F = F·Δ(a)`` row by row.  Returns None if the MCs differ.
    """
    d = _same_labels(c, d)
    dm = induced_mc(d, alpha)
    if not mc_equiv(c, dm).equivalent:
        return None
    u = disjoint_union(c, dm)
    m = u.model
    n = m.n_states
    uniq = LocalStrategy.unique(m)
    start = tuple(a - b for a, b in zip(u.left_initial, u.right_initial))
    basis = Basis(n)
    basis.insert(start)
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for a in range(m.n_labels):
            w = step(m, v, uniq, a)
            if basis.insert(w):
                queue.append(w)
    rows = list(basis.generators) + [tuple([Fraction(0)] * n)] * (n - basis.rank)
    F = tuple(rows)
    Ft = transpose(F)
    out = {}
    for (q, i), name in _x_names(d).items():
        out[name] = alpha.choice[q][i]
    for i in range(n):
        for j in range(n):
            out[f"f_{i}_{j}"] = F[i][j]
    for a in range(m.n_labels):
        for i in range(n):
            target = step(m, F[i], uniq, a)
            y = solve(Ft, target)
            if y is None:
                raise AssertionError("row of F·Δ(a) outside the row space of F")
            for k in range(n):
                out[f"m_{a}_{i}_{k}"] = y[k]
    return out


def _x_names(d: Mdp) -> dict:
    return {(q, i): f"x_{q}_{i}" for q, ms in enumerate(d.moves) for i in range(len(ms))}


@dataclass
class SolverResult:
    status: str
    stdout: str
    stderr: str
    returncode: int


def run_solver(script: str, command: str, timeout: Optional[float] = None) -> SolverResult:
    """Pipe ``script`` to an external solver; the first output line is the status."""
    proc = subprocess.run(shlex.split(command), input=script, capture_output=True, text=True,
                          timeout=timeout)
    first = proc.stdout.strip().splitlines()[0].strip() if proc.stdout.strip() else ""
    status = first if first in ("sat", "unsat", "unknown") else "unknown"
    return SolverResult(status, proc.stdout, proc.stderr, proc.returncode)
