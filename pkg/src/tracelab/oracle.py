"""Bounded brute-force checkers used to cross-validate the deciders.

Extremal trace probabilities come from per-word backward induction over
the raw move tables.  Because every strategy is a sequence of stepwise local
choices and the step maps are linear with nonnegative coefficients, the
maximum over strategies splits into a maximum per state and step.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

from .model import Mdp, ModelError, relabel_to
from .rational import Basis, dot, ones

NO_COUNTEREXAMPLE = "NoCounterexampleUpTo"
COUNTEREXAMPLE = "Counterexample"


@dataclass
class OracleVerdict:
    result: str
    depth: int
    word: Optional[tuple] = None
    achieved: Optional[Fraction] = None
    required: Optional[Fraction] = None
    mode: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.result == COUNTEREXAMPLE


def _move_value(mv, a: int, v: list) -> Fraction:
    return sum((p * v[t] for (b, t), p in mv.entries.items() if b == a), Fraction(0))


def _values(m: Mdp, w: tuple, pick) -> tuple:
    """Backward value vectors ``v_u`` for every suffix ``u`` of ``w``."""
    v = [Fraction(1)] * m.n_states
    vals = [v]
    picks = []
    for a in reversed(w):
        row, arg = [], []
        for ms in m.moves:
            scores = [_move_value(mv, a, v) for mv in ms]
            best = pick(scores)
            row.append(scores[best])
            arg.append(best)
        v = row
        vals.append(v)
        picks.append(arg)
    vals.reverse()
    picks.reverse()
    return vals, picks


def _argmax(xs):
    return max(range(len(xs)), key=lambda i: (xs[i], -i))


def _argmin(xs):
    return min(range(len(xs)), key=lambda i: (xs[i], i))


def _check_word(m: Mdp, w) -> tuple:
    w = tuple(w)
    if any(not isinstance(a, int) or not 0 <= a < m.n_labels for a in w):
        raise ModelError(["word uses a label outside the model"])
    return w


def max_trace_prob(m: Mdp, w) -> Fraction:
    w = _check_word(m, w)
    vals, _ = _values(m, w, _argmax)
    return sum((p * x for p, x in zip(m.initial, vals[0])), Fraction(0))


def min_trace_prob(m: Mdp, w) -> Fraction:
    w = _check_word(m, w)
    vals, _ = _values(m, w, _argmin)
    return sum((p * x for p, x in zip(m.initial, vals[0])), Fraction(0))


def argmax_table(m: Mdp, w):
    """Trace-based table attaining :func:`max_trace_prob` on ``w``."""
    from .semantics import TraceBasedTable

    w = _check_word(m, w)
    _, picks = _values(m, w, _argmax)
    table = TraceBasedTable(len(w))
    for i, arg in enumerate(picks):
        for q, best in enumerate(arg):
            table.entries[(w[:i], q)] = tuple(
                Fraction(int(j == best)) for j in range(len(m.moves[q])))
    return table


def _words(n_labels: int, depth: int):
    for k in range(depth + 1):
        yield from product(range(n_labels), repeat=k)


def _aligned(m: Mdp, c: Mdp) -> Mdp:
    if set(m.labels) != set(c.labels):
        raise ModelError(["label sets differ"])
    return c if c.labels == m.labels else relabel_to(c, m.labels)


def oracle_refines_mc(m: Mdp, c: Mdp, depth: int) -> OracleVerdict:
    """Search words of length ``<= depth`` where some strategy of ``m``
    misses ``Tr_c``.  Words are tried shortest-first; extensions of words
    that are impossible on both sides are skipped."""
    if any(len(ms) != 1 for ms in c.moves):
        raise ModelError(["second argument is not an MC"])
    c = _aligned(m, c)
    dead: set = set()
    for w in _words(m.n_labels, depth):
        if w and w[:-1] in dead:
            dead.add(w)
            continue
        req = max_trace_prob(c, w)
        hi = max_trace_prob(m, w)
        if hi != req:
            return OracleVerdict(COUNTEREXAMPLE, depth, w, hi, req, "max")
        lo = min_trace_prob(m, w)
        if lo != req:
            return OracleVerdict(COUNTEREXAMPLE, depth, w, lo, req, "min")
        if hi == 0:
            dead.add(w)
    return OracleVerdict(NO_COUNTEREXAMPLE, depth)


def oracle_mc_equiv(c1: Mdp, c2: Mdp, depth: int) -> OracleVerdict:
    for c, which in ((c1, "first"), (c2, "second")):
        if any(len(ms) != 1 for ms in c.moves):
            raise ModelError([f"{which} argument is not an MC"])
    c2 = _aligned(c1, c2)
    dead: set = set()
    for w in _words(c1.n_labels, depth):
        if w and w[:-1] in dead:
            dead.add(w)
            continue
        x, y = max_trace_prob(c1, w), max_trace_prob(c2, w)
        if x != y:
            return OracleVerdict(COUNTEREXAMPLE, depth, w, x, y, "max")
        if x == 0:
            dead.add(w)
    return OracleVerdict(NO_COUNTEREXAMPLE, depth)


# --------------------------------------------------------------------------
# exhaustive certificate search

def pure_strategies(m: Mdp) -> list:
    """Pure local strategies, one per distinct choice of move contents."""
    per_state = []
    for ms in m.moves:
        seen, keep = set(), []
        for i, mv in enumerate(ms):
            key = tuple(mv.entries.items())
            if key not in seen:
                seen.add(key)
                keep.append(i)
        per_state.append(keep)
    return [tuple(p) for p in product(*per_state)]


def _col_step(m: Mdp, picks: tuple, a: int, u: tuple) -> tuple:
    return tuple(_move_value(m.moves[q][picks[q]], a, u) for q in range(m.n_states))


def search_certificates(m: Mdp, mu_d, mu_e, k_max: Optional[int] = None):
    """Depth-first search for a chain certificate of non-bisimilarity.

    Returns a ``bisim.Certificate`` or None.  Dependent chain vectors are
    skipped: if one separated the distributions, an earlier vector would
    already have.
    """
    from .bisim import Certificate, basis_matrix, is_extremal
    from .semantics import LocalStrategy

    k_max = m.n_states if k_max is None else min(k_max, m.n_states)
    cands = pure_strategies(m)
    seen: set = set()
    ext_cache: dict = {}

    def extremal_for(span: Basis, bs: list) -> list:
        key = span.key()
        if key not in ext_cache:
            B = basis_matrix(bs, m.n_states)
            ext_cache[key] = [p for p in cands
                              if is_extremal(m, B, LocalStrategy.pure(m, p)) is not None]
        return ext_cache[key]

    def dfs(bs, refs, labs, strats):
        last = bs[-1]
        if dot(mu_d, last) != dot(mu_e, last):
            return Certificate(len(bs), tuple(refs), tuple(labs), tuple(strats))
        if len(bs) >= k_max:
            return None
        key = frozenset(bs)
        if key in seen:
            return None
        seen.add(key)
        span = Basis(m.n_states)
        for b in bs:
            span.insert(b)
        children = {}
        for p in extremal_for(span, bs):
            for a in range(m.n_labels):
                for i, b in enumerate(bs):
                    v = _col_step(m, p, a, b)
                    if v not in children and not span.contains(v):
                        children[v] = (i, a, p)
        for v, (i, a, p) in children.items():
            found = dfs(bs + [v], refs + [i], labs + [a], strats + [p])
            if found is not None:
                return found
        return None

    return dfs([ones(m.n_states)], [], [], [])
