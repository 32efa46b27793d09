"""Trace semantics: transition matrices, subdistributions, strategies.

Words are tuples of label indices.  Subdistributions are row vectors indexed
by state.  Three strategy representations are executable here:

* :class:`LocalStrategy` (one distribution over moves per state; used
  stepwise, or for every step as a memoryless strategy),
* :class:`FiniteMemoryStrategy`,
* :class:`TraceBasedTable` (depth-bounded, keyed on the emitted word).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Mapping, Optional, Sequence, Union as TUnion

from .model import Move, Mdp, ModelError, Word
from .rational import ONE, ZERO, RatMatrix, RatVector


class StrategyError(ValueError):
    pass


def _check_dist(dist: Sequence[Fraction], n_moves: int, where: str) -> tuple:
    dist = tuple(Fraction(p) for p in dist)
    if len(dist) != n_moves:
        raise StrategyError(f"{where}: {len(dist)} weights for {n_moves} moves")
    if any(p < 0 or p > 1 for p in dist):
        raise StrategyError(f"{where}: weight outside [0,1]")
    if sum(dist, ZERO) != ONE:
        raise StrategyError(f"{where}: weights sum to {sum(dist, ZERO)}, not 1")
    return dist


def _dirac(n: int, i: int) -> tuple:
    return tuple(ONE if j == i else ZERO for j in range(n))


def _uniform(n: int) -> tuple:
    return (Fraction(1, n),) * n


@dataclass(frozen=True)
class LocalStrategy:
    """``choice[q]`` is a distribution over ``moves[q]`` (by move index)."""

    choice: tuple

    @classmethod
    def of(cls, m: Mdp, choice: Sequence[Sequence[Fraction]]) -> "LocalStrategy":
        if len(choice) != m.n_states:
            raise StrategyError(f"{len(choice)} entries for {m.n_states} states")
        return cls(tuple(
            _check_dist(d, len(m.moves[q]), f"state {m.states[q]}") for q, d in enumerate(choice)
        ))

    @classmethod
    def pure(cls, m: Mdp, picks: Sequence[int]) -> "LocalStrategy":
        if len(picks) != m.n_states:
            raise StrategyError(f"{len(picks)} picks for {m.n_states} states")
        for q, i in enumerate(picks):
            if not 0 <= i < len(m.moves[q]):
                raise StrategyError(f"state {m.states[q]}: no move {i}")
        return cls(tuple(_dirac(len(ms), i) for ms, i in zip(m.moves, picks)))

    @classmethod
    def uniform(cls, m: Mdp) -> "LocalStrategy":
        return cls(tuple(_uniform(len(ms)) for ms in m.moves))

    @classmethod
    def unique(cls, m: Mdp) -> "LocalStrategy":
        return cls.pure(m, [0] * m.n_states)

    def is_pure(self) -> bool:
        return all(sum(1 for p in d if p) == 1 for d in self.choice)

    def picks(self) -> tuple:
        """Chosen move per state; only defined for pure strategies."""
        if not self.is_pure():
            raise StrategyError("strategy is not pure")
        return tuple(next(i for i, p in enumerate(d) if p) for d in self.choice)

    def mix(self, other: "LocalStrategy", w: Fraction) -> "LocalStrategy":
        """``w * self + (1 - w) * other``."""
        return LocalStrategy(tuple(
            tuple(w * x + (1 - w) * y for x, y in zip(d1, d2))
            for d1, d2 in zip(self.choice, other.choice)
        ))


MemorylessStrategy = LocalStrategy


@dataclass(frozen=True)
class FiniteMemoryStrategy:
    """A Mealy-style controller.

    At state ``q`` with memory ``k`` the move is drawn from
    ``output[(k, q)]``; after emitting ``a`` and entering ``q2`` the memory
    becomes ``update[(k, a, q2)]``.  Missing update entries keep the memory.
    """

    memory: tuple
    initial: int
    update: Mapping[tuple, int]
    output: Mapping[tuple, tuple]

    def next_memory(self, k: int, a: int, q2: int) -> int:
        return self.update.get((k, a, q2), k)

    def check(self, m: Mdp) -> "FiniteMemoryStrategy":
        if not 0 <= self.initial < len(self.memory):
            raise StrategyError("initial memory out of range")
        for k in range(len(self.memory)):
            for q in range(m.n_states):
                if (k, q) not in self.output:
                    raise StrategyError(f"no output for memory {self.memory[k]} at {m.states[q]}")
                _check_dist(self.output[(k, q)], len(m.moves[q]),
                            f"memory {self.memory[k]} state {m.states[q]}")
        for (k, a, q2), k2 in self.update.items():
            if not (0 <= k2 < len(self.memory)):
                raise StrategyError(f"update target {k2} out of range")
        return self

    @classmethod
    def from_local(cls, alpha: LocalStrategy) -> "FiniteMemoryStrategy":
        return cls(("m0",), 0, {}, {(0, q): d for q, d in enumerate(alpha.choice)})


@dataclass
class TraceBasedTable:
    """Depth-bounded trace-based strategy.

    ``entries[(w, q)]`` is used after emitting ``w`` while in ``q``; missing
    entries mean the uniform distribution over ``moves(q)``.
    """

    depth: int
    entries: dict = field(default_factory=dict)

    def choice(self, m: Mdp, w: Word, q: int) -> tuple:
        d = self.entries.get((w, q))
        return d if d is not None else _uniform(len(m.moves[q]))

    def local(self, m: Mdp, w: Word) -> LocalStrategy:
        return LocalStrategy(tuple(self.choice(m, w, q) for q in range(m.n_states)))


Strategy = TUnion[None, LocalStrategy, TraceBasedTable]


def _local_at(m: Mdp, sigma: Strategy, w: Word) -> LocalStrategy:
    if sigma is None:
        if any(len(ms) != 1 for ms in m.moves):
            raise StrategyError("model has choices; a strategy is required")
        return LocalStrategy.unique(m)
    if isinstance(sigma, LocalStrategy):
        return sigma
    return sigma.local(m, w)


def _label(m: Mdp, a: int) -> int:
    if not isinstance(a, int) or not 0 <= a < m.n_labels:
        raise ModelError([f"label {a!r} not in model"])
    return a


def transition_matrix(m: Mdp, alpha: LocalStrategy, a: int) -> RatMatrix:
    """``Δ_α(a)[q][q2] = Σ_m α(q)(m) · m(a, q2)``."""
    _label(m, a)
    n = m.n_states
    out = []
    for q in range(n):
        row = [ZERO] * n
        for i, per_label in enumerate(m.rows[q]):
            w = alpha.choice[q][i]
            if w:
                for t, p in per_label[a]:
                    row[t] += w * p
        out.append(tuple(row))
    return tuple(out)


def step(m: Mdp, mu: Sequence[Fraction], alpha: LocalStrategy, a: int) -> RatVector:
    """Sparse ``μ · Δ_α(a)``."""
    out = [ZERO] * m.n_states
    for q, x in enumerate(mu):
        if not x:
            continue
        for i, per_label in enumerate(m.rows[q]):
            w = alpha.choice[q][i]
            if w:
                for t, p in per_label[a]:
                    out[t] += x * w * p
    return tuple(out)


def succ(mu: Sequence[Fraction], m: Mdp, alpha: LocalStrategy, a: int) -> RatVector:
    _label(m, a)
    if len(mu) != m.n_states:
        raise ModelError(["subdistribution length differs from state count"])
    return step(m, mu, alpha, a)


def sub_dis(m: Mdp, sigma: Strategy, w: Word) -> RatVector:
    """Left-to-right product ``μ₀ · Δ_{σ[ε]}(a₁) · Δ_{σ[a₁]}(a₂) ⋯``."""
    if isinstance(sigma, TraceBasedTable) and len(w) > sigma.depth:
        raise StrategyError(f"word of length {len(w)} exceeds table depth {sigma.depth}")
    mu = m.initial
    for i, a in enumerate(w):
        _label(m, a)
        mu = step(m, mu, _local_at(m, sigma, tuple(w[:i])), a)
    return mu


def trace_prob(m: Mdp, sigma: Strategy, w: Word) -> Fraction:
    return sum(sub_dis(m, sigma, w), ZERO)


def sub_dis_paths(m: Mdp, sigma: Strategy, w: Word) -> RatVector:
    """Path-sum definition of subDis; independent of :func:`step`."""
    n = m.n_states
    out = [ZERO] * n

    def walk(i: int, q: int, pr: Fraction) -> None:
        if i == len(w):
            out[q] += pr
            return
        dist = _local_at(m, sigma, tuple(w[:i])).choice[q]
        a = w[i]
        for mi, mv in enumerate(m.moves[q]):
            if not dist[mi]:
                continue
            for (b, t), p in mv.entries.items():
                if b == a:
                    walk(i + 1, t, pr * dist[mi] * p)

    for q, p0 in enumerate(m.initial):
        if p0:
            walk(0, q, p0)
    return tuple(out)


def words(n_labels: int, max_len: int, min_len: int = 0) -> Iterator[Word]:
    """All words of length ``min_len..max_len``, shortest first."""
    for k in range(min_len, max_len + 1):
        yield from product(range(n_labels), repeat=k)


def product_chain(m: Mdp, s: FiniteMemoryStrategy, w: Word) -> dict:
    """Joint mass over (memory, state) after emitting ``w`` under ``s``."""
    nu = {(s.initial, q): p for q, p in enumerate(m.initial) if p}
    for a in w:
        nu = _product_step(m, s, nu, a)
    return nu


def _product_step(m: Mdp, s: FiniteMemoryStrategy, nu: dict, a: int) -> dict:
    out: dict = {}
    for (k, q), x in nu.items():
        dist = s.output[(k, q)]
        for i, per_label in enumerate(m.rows[q]):
            if not dist[i]:
                continue
            for t, p in per_label[a]:
                key = (s.next_memory(k, a, t), t)
                out[key] = out.get(key, ZERO) + x * dist[i] * p
    return {k: v for k, v in out.items() if v}


def product_sub_dis(m: Mdp, s: FiniteMemoryStrategy, w: Word) -> RatVector:
    out = [ZERO] * m.n_states
    for (_, q), x in product_chain(m, s, w).items():
        out[q] += x
    return tuple(out)


def flatten(m: Mdp, s: FiniteMemoryStrategy, depth: int) -> TraceBasedTable:
    """Trace-based table with the same trace function as ``s`` up to ``depth``.

    ``β(w, q)`` averages ``s``'s output over the memory states it can be in
    at ``(w, q)``, weighted by their probability; unreachable pairs are left
    out (uniform by default).
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    table = TraceBasedTable(depth)
    frontier = {(): {(s.initial, q): p for q, p in enumerate(m.initial) if p}}
    for _ in range(depth):
        nxt = {}
        for w, nu in frontier.items():
            mass: dict = {}
            mix: dict = {}
            for (k, q), x in nu.items():
                mass[q] = mass.get(q, ZERO) + x
                acc = mix.setdefault(q, [ZERO] * len(m.moves[q]))
                for i, p in enumerate(s.output[(k, q)]):
                    acc[i] += x * p
            for q, acc in mix.items():
                table.entries[(w, q)] = tuple(x / mass[q] for x in acc)
            for a in range(m.n_labels):
                nu2 = _product_step(m, s, nu, a)
                if nu2:
                    nxt[w + (a,)] = nu2
        frontier = nxt
    return table


def table_from_local_sequence(m: Mdp, alphas: Sequence[LocalStrategy]) -> TraceBasedTable:
    """Table playing ``alphas[i]`` at step ``i`` regardless of the word."""
    table = TraceBasedTable(len(alphas))
    frontier = {(): m.initial}
    for i, alpha in enumerate(alphas):
        nxt = {}
        for w, mu in frontier.items():
            for q, x in enumerate(mu):
                if x:
                    table.entries[(w, q)] = alpha.choice[q]
            for a in range(m.n_labels):
                mu2 = step(m, mu, alpha, a)
                if any(mu2):
                    nxt[w + (a,)] = mu2
        frontier = nxt
    return table


def induced_mc(m: Mdp, alpha: LocalStrategy) -> Mdp:
    """The MC ``m(α)``: one move per state mixing ``m``'s moves by ``α``."""
    moves = []
    for q, ms in enumerate(m.moves):
        entries: dict = {}
        for w, mv in zip(alpha.choice[q], ms):
            if w:
                for key, p in mv.entries.items():
                    entries[key] = entries.get(key, ZERO) + w * p
        moves.append((Move(entries),))
    return Mdp(m.states, m.labels, m.initial, tuple(moves))


def last_label_strategy(m: Mdp, state: str, by_label: Mapping[str, int]) -> FiniteMemoryStrategy:
    """Memory = last emitted label among ``by_label``'s keys.

    At ``state`` the move ``by_label[last]`` is played; elsewhere move 0.
    """
    names = tuple(by_label)
    mem_of = {m.label_index[a]: i for i, a in enumerate(names)}
    q_star = m.state_index[state]
    update = {}
    for k in range(len(names)):
        for a, k2 in mem_of.items():
            for q in range(m.n_states):
                update[(k, a, q)] = k2
    output = {}
    for k, a in enumerate(names):
        for q in range(m.n_states):
            pick = by_label[a] if q == q_star else 0
            output[(k, q)] = _dirac(len(m.moves[q]), pick)
    return FiniteMemoryStrategy(names, 0, update, output).check(m)


def mc_trace_prob(m: Mdp, w: Word) -> Fraction:
    return trace_prob(m, None, w)


def optional_strategy(m: Mdp, s: Optional[object]) -> Strategy:
    """Normalize a user-supplied strategy for :func:`sub_dis`."""
    if s is None or isinstance(s, (LocalStrategy, TraceBasedTable)):
        return s
    raise StrategyError("finite-memory strategies must be flattened first")


def back_step(m: Mdp, alpha: LocalStrategy, a: int, u: Sequence[Fraction]) -> RatVector:
    """Sparse column product ``Δ_α(a) · u``."""
    out = []
    for q in range(m.n_states):
        acc = ZERO
        for i, per_label in enumerate(m.rows[q]):
            w = alpha.choice[q][i]
            if w:
                s = ZERO
                for t, p in per_label[a]:
                    if u[t]:
                        s += p * u[t]
                acc += w * s
        out.append(acc)
    return tuple(out)
