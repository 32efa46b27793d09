"""Seeded random models shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from tracelab.model import Mdp
from tracelab.semantics import LocalStrategy

LABELS = "abcd"


def random_dist(rng: random.Random, k: int, denom: int = 4) -> list:
    """``k`` nonnegative rationals with denominator ``denom`` summing to 1."""
    cuts = sorted(rng.randint(0, denom) for _ in range(k - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
    return [Fraction(p, denom) for p in parts]


def random_move(rng, states, labels, width=3, denom=4) -> list:
    keys = list({(rng.choice(labels), rng.choice(states)) for _ in range(width)})
    probs = random_dist(rng, len(keys), denom)
    if not any(probs):
        probs[0] = Fraction(1)
    return [(a, t, p) for (a, t), p in zip(keys, probs) if p]


def random_mdp(rng, n_states, n_labels, max_moves=3, mc=False, prefix="s", denom=4) -> Mdp:
    states = [f"{prefix}{i}" for i in range(n_states)]
    labels = list(LABELS[:n_labels])
    init = dict(zip(states, random_dist(rng, n_states, denom)))
    if not any(init.values()):
        init[states[0]] = Fraction(1)
    moves = {}
    for s in states:
        k = 1 if mc else rng.randint(1, max_moves)
        moves[s] = [random_move(rng, states, labels, rng.randint(1, 3), denom) for _ in range(k)]
    return Mdp.build(states, labels, {s: p for s, p in init.items() if p}, moves)


def doubled(rng, mc: Mdp, max_moves=3) -> Mdp:
    """An MDP refining ``mc``: two copies of ``mc``, each move free to jump
    into either copy (so every strategy has the same trace function)."""
    names = [f"{s}/{c}" for c in (0, 1) for s in mc.states]
    n = mc.n_states
    init = {}
    for q, p in enumerate(mc.initial):
        if p:
            half = Fraction(rng.randint(0, 2), 2)
            for c, share in ((0, half), (1, 1 - half)):
                if share:
                    init[names[c * n + q]] = p * share
    moves = {}
    for c in (0, 1):
        for q in range(n):
            mv = mc.moves[q][0]
            ms = []
            for _ in range(rng.randint(1, max_moves)):
                side = [rng.randint(0, 1) for _ in mv.entries]
                ms.append([(mc.labels[a], names[s * n + t], p)
                           for ((a, t), p), s in zip(mv.entries.items(), side)])
            moves[names[c * n + q]] = ms
    return Mdp.build(names, mc.labels, init, moves)


def random_pure(rng, m: Mdp) -> LocalStrategy:
    return LocalStrategy.pure(m, [rng.randrange(len(ms)) for ms in m.moves])


def random_local(rng, m: Mdp) -> LocalStrategy:
    return LocalStrategy.of(m, [random_dist(rng, len(ms), 6) for ms in m.moves])


def refinement_instances(seed: int, count: int) -> list:
    """(mdp, mc) pairs with |Q| <= 4, |L| <= 3, <= 3 moves per state.

    A third are built to refine; the rest are unconstrained random pairs.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n_labels = rng.choice((1, 2, 2, 3, 3))
        kind = len(out) % 3
        if kind == 0:
            mc = random_mdp(rng, rng.randint(1, 2), n_labels, mc=True, prefix="c")
            out.append((doubled(rng, mc), mc))
        else:
            mdp = random_mdp(rng, rng.randint(1, 4), n_labels, prefix="d")
            mc = random_mdp(rng, rng.randint(1, 4), n_labels, mc=True, prefix="c")
            out.append((mdp, mc))
    return out
