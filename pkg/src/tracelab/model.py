"""Labelled Markov decision processes with exact rational probabilities.

An MC is not a separate type: it is an :class:`Mdp` in which every state has
exactly one move (see :func:`is_mc`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from .rational import ONE, ZERO, RatVector

Word = tuple  # tuple[int, ...] of label indices


class ModelError(ValueError):
    """Raised when a model fails validation; ``violations`` lists every issue."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid model")


@dataclass(frozen=True)
class Move:
    """A distribution over (label index, successor index) pairs.

    Zero entries are dropped, so the keys are exactly the support.
    """

    entries: Mapping[tuple[int, int], Fraction]

    def __post_init__(self) -> None:
        clean = {}
        for key, p in self.entries.items():
            p = Fraction(p)
            if p:
                clean[key] = clean.get(key, ZERO) + p
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def prob(self, label: int, target: int) -> Fraction:
        return self.entries.get((label, target), ZERO)

    def mass(self) -> Fraction:
        return sum(self.entries.values(), ZERO)

    def support(self) -> set:
        return set(self.entries)

    def by_label(self, label: int) -> list:
        return [(q, p) for (a, q), p in self.entries.items() if a == label]


@dataclass(frozen=True)
class Mdp:
    states: tuple
    labels: tuple
    initial: RatVector
    moves: tuple  # moves[q] = tuple of Move

    @classmethod
    def build(
        cls,
        states: Sequence[str],
        labels: Sequence[str],
        initial: Mapping[str, object],
        moves: Mapping[str, Sequence[Sequence[tuple]]],
        check: bool = True,
    ) -> "Mdp":
        """Construct a model from names.

        ``moves[state]`` is a list of moves, each a list of
        ``(label, target, prob)`` triples; repeated (label, target) pairs
        inside one move are summed.
        """
        s_idx = {s: i for i, s in enumerate(states)}
        l_idx = {a: i for i, a in enumerate(labels)}
        bad = [s for s in initial if s not in s_idx] + [s for s in moves if s not in s_idx]
        if bad:
            raise ModelError([f"unknown state {s!r}" for s in bad])
        init = tuple(Fraction(initial.get(s, 0)) for s in states)
        all_moves = []
        for s in states:
            ms = []
            for mv in moves.get(s, ()):
                entries: dict = {}
                for a, t, p in mv:
                    if a not in l_idx:
                        raise ModelError([f"state {s!r}: unknown label {a!r}"])
                    if t not in s_idx:
                        raise ModelError([f"state {s!r}: unknown target {t!r}"])
                    key = (l_idx[a], s_idx[t])
                    entries[key] = entries.get(key, ZERO) + Fraction(p)
                ms.append(Move(entries))
            all_moves.append(tuple(ms))
        m = cls(tuple(states), tuple(labels), init, tuple(all_moves))
        if check:
            m.check()
        return m

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def check(self) -> "Mdp":
        problems = validate(self)
        if problems:
            raise ModelError(problems)
        return self

    @cached_property
    def state_index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def label_index(self) -> dict:
        return {a: i for i, a in enumerate(self.labels)}

    @cached_property
    def rows(self) -> tuple:
        """``rows[q][m][a]`` = tuple of (target, prob) for move ``m`` at ``q``."""
        out = []
        for ms in self.moves:
            per_move = []
            for mv in ms:
                by = [[] for _ in self.labels]
                for (a, t), p in mv.entries.items():
                    by[a].append((t, p))
                per_move.append(tuple(tuple(x) for x in by))
            out.append(tuple(per_move))
        return tuple(out)

    def move_counts(self) -> tuple:
        return tuple(len(ms) for ms in self.moves)

    def word(self, text: str | Sequence[str]) -> Word:
        """Parse a word given as a label sequence or a string.

        Strings are split on commas/whitespace when present, otherwise into
        single characters (which requires single-character label names).
        """
        if isinstance(text, str):
            if any(ch in text for ch in ", "):
                parts = [p for p in text.replace(",", " ").split() if p]
            else:
                parts = list(text)
        else:
            parts = list(text)
        try:
            return tuple(self.label_index[p] for p in parts)
        except KeyError as e:
            raise ModelError([f"unknown label {e.args[0]!r}"]) from None

    def word_text(self, w: Word) -> str:
        names = [self.labels[a] for a in w]
        if all(len(n) == 1 for n in names):
            return "".join(names)
        return ",".join(names)


def validate(m: Mdp) -> list:
    """Every violated model invariant, as human-readable strings."""
    out = []
    n, k = len(m.states), len(m.labels)
    if n == 0:
        out.append("model has no states")
    if k == 0:
        out.append("model has no labels")
    if len(set(m.states)) != n:
        out.append("state names are not distinct")
    if len(set(m.labels)) != k:
        out.append("label names are not distinct")
    if len(m.initial) != n:
        out.append("initial vector length differs from state count")
    else:
        for s, p in zip(m.states, m.initial):
            if p < 0 or p > 1:
                out.append(f"initial[{s}] = {p} outside [0,1]")
        if sum(m.initial, ZERO) != ONE:
            out.append(f"initial not a distribution (mass {sum(m.initial, ZERO)})")
    if len(m.moves) != n:
        out.append("moves table length differs from state count")
        return out
    for q, ms in enumerate(m.moves):
        name = m.states[q] if q < n else q
        if not ms:
            out.append(f"state {name}: no moves")
        for i, mv in enumerate(ms):
            for (a, t), p in mv.entries.items():
                if not (0 <= a < k) or not (0 <= t < n):
                    out.append(f"state {name} move {i}: entry ({a},{t}) out of range")
                if p < 0 or p > 1:
                    out.append(f"state {name} move {i}: probability {p} outside [0,1]")
            if mv.mass() != ONE:
                out.append(f"state {name} move {i}: move mass {mv.mass()} != 1")
    return out


def is_mc(m: Mdp) -> bool:
    return all(len(ms) == 1 for ms in m.moves)


def post_set(m: Mdp, q: int) -> set:
    if not 0 <= q < m.n_states:
        raise IndexError(f"no state {q}")
    out = set()
    for mv in m.moves[q]:
        out |= mv.support()
    return out


# subdistributions are plain row vectors over the state indices

def norm(mu: Sequence[Fraction]) -> Fraction:
    return sum(mu, ZERO)


def support(mu: Sequence[Fraction]) -> set:
    return {i for i, p in enumerate(mu) if p > 0}


def dirac(n: int, s: int) -> RatVector:
    return tuple(ONE if i == s else ZERO for i in range(n))


def uniform(n: int, subset: Iterable[int]) -> RatVector:
    subset = set(subset)
    if not subset:
        raise ValueError("uniform distribution over an empty set")
    w = Fraction(1, len(subset))
    return tuple(w if i in subset else ZERO for i in range(n))


def is_subdist(mu: Sequence[Fraction]) -> bool:
    return all(0 <= p <= 1 for p in mu) and norm(mu) <= 1


@dataclass(frozen=True)
class Union:
    """Disjoint union of two models sharing one label set."""

    model: Mdp
    left_map: tuple  # left state index -> union index
    right_map: tuple
    left_initial: RatVector
    right_initial: RatVector

    @property
    def n_left(self) -> int:
        return len(self.left_map)


def disjoint_union(d: Mdp, e: Mdp, prefixes: tuple = ("1:", "2:")) -> Union:
    """Place ``d`` and ``e`` side by side over ``Q_d ⊎ Q_e``.

    State names get the given prefixes.  Labels of ``e`` are re-indexed to
    ``d``'s order; the label sets must coincide.  The union's own initial
    distribution is ``d``'s.
    """
    if set(d.labels) != set(e.labels):
        raise ModelError([f"label sets differ: {sorted(d.labels)} vs {sorted(e.labels)}"])
    relabel = [d.label_index[a] for a in e.labels]
    nd = d.n_states
    states = tuple(prefixes[0] + s for s in d.states) + tuple(prefixes[1] + s for s in e.states)
    moves = list(d.moves)
    for ms in e.moves:
        moves.append(tuple(
            Move({(relabel[a], t + nd): p for (a, t), p in mv.entries.items()}) for mv in ms
        ))
    left_init = tuple(d.initial) + (ZERO,) * e.n_states
    right_init = (ZERO,) * nd + tuple(e.initial)
    u = Mdp(states, d.labels, left_init, tuple(moves))
    return Union(u, tuple(range(nd)), tuple(range(nd, nd + e.n_states)), left_init, right_init)


def with_initial(m: Mdp, initial: Sequence[Fraction]) -> Mdp:
    return Mdp(m.states, m.labels, tuple(Fraction(p) for p in initial), m.moves)


def relabel_to(m: Mdp, labels: Sequence[str]) -> Mdp:
    """Same model with its label list reordered to ``labels`` (same set)."""
    if set(labels) != set(m.labels) or len(labels) != len(m.labels):
        raise ModelError(["label sets differ"])
    idx = {a: i for i, a in enumerate(labels)}
    perm = [idx[a] for a in m.labels]
    moves = tuple(
        tuple(Move({(perm[a], t): p for (a, t), p in mv.entries.items()}) for mv in ms)
        for ms in m.moves
    )
    return Mdp(m.states, tuple(labels), m.initial, moves)


def find_state(m: Mdp, name: str) -> Optional[int]:
    return m.state_index.get(name)
