"""Trace equivalence of two MCs by backward closure from the all-ones vector."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .model import Mdp, ModelError, Union, disjoint_union, is_mc
from .rational import Basis, dot, ones, sub
from .semantics import LocalStrategy, back_step

EQUIVALENT = "Equivalent"
DISTINGUISHED = "Distinguished"


@dataclass
class EquivVerdict:
    result: str
    witness: Optional[tuple] = None
    lhs_prob: Optional[Fraction] = None
    rhs_prob: Optional[Fraction] = None
    insertions: int = 0
    basis: Optional[Basis] = field(default=None, repr=False)
    union: Optional[Union] = field(default=None, repr=False)

    @property
    def equivalent(self) -> bool:
        return self.result == EQUIVALENT


def closure(m: Mdp, alpha: LocalStrategy) -> Basis:
    """Smallest space containing 𝟏 and closed under every ``Δ_α(a)``.

    Each generator is tagged with the word ``w`` such that it equals
    ``Δ(w)·𝟏``; BFS makes tags shortest-first.
    """
    basis = Basis(m.n_states)
    one = ones(m.n_states)
    basis.insert(one, ())
    queue = deque([(one, ())])
    while queue:
        u, w = queue.popleft()
        for a in range(m.n_labels):
            v = back_step(m, alpha, a, u)
            if basis.insert(v, (a,) + w):
                queue.append((v, (a,) + w))
    return basis


def _require_mc(m: Mdp, which: str) -> None:
    if not is_mc(m):
        raise ModelError([f"{which} argument is not an MC"])


def mc_equiv(c1: Mdp, c2: Mdp) -> EquivVerdict:
    _require_mc(c1, "first")
    _require_mc(c2, "second")
    u = disjoint_union(c1, c2)
    basis = closure(u.model, LocalStrategy.unique(u.model))
    diff = sub(u.left_initial, u.right_initial)
    n_ins = basis.rank
    for g, w in zip(basis.generators, basis.tags):
        if dot(diff, g):
            return EquivVerdict(DISTINGUISHED, w, dot(u.left_initial, g),
                                dot(u.right_initial, g), n_ins, basis, u)
    return EquivVerdict(EQUIVALENT, None, None, None, n_ins, basis, u)
