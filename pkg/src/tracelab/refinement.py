"""Polynomial-time check of ``D ⊑ C`` for an MDP ``D`` and an MC ``C``.

The local strategies of ``D`` span the same transition matrices as a small
family ``Σ``: one pure base strategy and every single-state deviation from
it.  Folding ``Σ`` into the alphabet (label ``b(α,a)`` with matrix
``Δ_α(a) / |Σ|``) turns both sides into MCs over a shared transition
structure, and refinement becomes plain trace equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .equivalence import mc_equiv
from .model import Mdp, ModelError, Move, Union, disjoint_union, is_mc
from .semantics import LocalStrategy

HOLDS = "Holds"
FAILS = "Fails"


@dataclass(frozen=True)
class StrategyBasis:
    base: tuple  # picked move index per state
    perturbations: tuple  # (q, m) pairs in state-then-move order

    def __len__(self) -> int:
        return 1 + len(self.perturbations)

    def ids(self) -> list:
        return ["base"] + [f"q{q}:m{i}" for q, i in self.perturbations]

    def picks(self) -> list:
        """Pure choices of every member, base first."""
        out = [self.base]
        for q, i in self.perturbations:
            p = list(self.base)
            p[q] = i
            out.append(tuple(p))
        return out

    def strategies(self, m: Mdp) -> list:
        return [LocalStrategy.pure(m, p) for p in self.picks()]


def strategy_basis(m: Mdp, base: str = "first") -> StrategyBasis:
    """``base`` picks the first (default) or last move of every state."""
    if base not in ("first", "last"):
        raise ValueError("base must be 'first' or 'last'")
    picks = tuple(0 if base == "first" else len(ms) - 1 for ms in m.moves)
    pert = tuple((q, i) for q, ms in enumerate(m.moves) for i in range(len(ms)))
    return StrategyBasis(picks, pert)


def _extend(sb: StrategyBasis, n_extra: int) -> StrategyBasis:
    """Same family on a union whose extra states each have one move."""
    return StrategyBasis(sb.base + (0,) * n_extra, sb.perturbations)


@dataclass
class LiftedPair:
    d_prime: Mdp
    c_prime: Mdp
    label_map: dict  # (strategy id, original label) -> lifted label name
    sigma: StrategyBasis
    union: Union

    def decode(self, word: tuple) -> list:
        inv = {v: k for k, v in self.label_map.items()}
        return [inv[self.d_prime.labels[b]] for b in word]


def lifted_label(sid: str, a: str) -> str:
    return f"b({sid},{a})"


def lift(mdp: Mdp, mc: Mdp, base: str = "first") -> LiftedPair:
    if not is_mc(mc):
        raise ModelError(["second argument is not an MC"])
    u = disjoint_union(mdp, mc)
    sigma = _extend(strategy_basis(mdp, base), mc.n_states)
    w = Fraction(1, len(sigma))
    ids = sigma.ids()
    labels, label_map = [], {}
    for sid in ids:
        for a in u.model.labels:
            name = lifted_label(sid, a)
            labels.append(name)
            label_map[(sid, a)] = name
    n_l = u.model.n_labels
    moves = []
    for q in range(u.model.n_states):
        entries: dict = {}
        for k, picks in enumerate(sigma.picks()):
            for (a, t), p in u.model.moves[q][picks[q]].entries.items():
                key = (k * n_l + a, t)
                entries[key] = entries.get(key, Fraction(0)) + w * p
        moves.append((Move(entries),))
    moves = tuple(moves)
    d_prime = Mdp(u.model.states, tuple(labels), u.left_initial, moves)
    c_prime = Mdp(u.model.states, tuple(labels), u.right_initial, moves)
    return LiftedPair(d_prime, c_prime, label_map, sigma, u)


@dataclass
class RefinementVerdict:
    result: str
    lifted_witness: Optional[tuple] = None  # lifted label names
    decoded: Optional[list] = None  # (strategy id, label) pairs
    lhs_prob: Optional[Fraction] = None
    rhs_prob: Optional[Fraction] = None
    sigma_size: int = 0
    insertions: int = 0
    lifted: Optional[LiftedPair] = field(default=None, repr=False)

    @property
    def holds(self) -> bool:
        return self.result == HOLDS


def refines_mc(mdp: Mdp, mc: Mdp, base: str = "first") -> RefinementVerdict:
    pair = lift(mdp, mc, base)
    v = mc_equiv(pair.d_prime, pair.c_prime)
    if v.equivalent:
        return RefinementVerdict(HOLDS, sigma_size=len(pair.sigma), insertions=v.insertions,
                                 lifted=pair)
    names = tuple(pair.d_prime.labels[b] for b in v.witness)
    return RefinementVerdict(FAILS, names, pair.decode(v.witness), v.lhs_prob, v.rhs_prob,
                             len(pair.sigma), v.insertions, pair)
