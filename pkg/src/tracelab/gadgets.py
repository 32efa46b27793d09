"""Model pairs that encode classic hard problems as refinement questions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

from .model import Mdp, ModelError
from .semantics import LocalStrategy


@dataclass
class GadgetOutput:
    left: Mdp
    right: Mdp
    question: str
    expected_semantics: dict
    params: dict = field(default_factory=dict)

    def meta(self) -> dict:
        return {
            "question": self.question,
            "expected_semantics": self.expected_semantics,
            "params": self.params,
        }


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _model(states, labels, initial: dict, moves: dict) -> Mdp:
    """Like ``Mdp.build`` but ``moves[state]`` holds ``{(label, target): p}`` maps."""
    return Mdp.build(states, labels, initial, {
        s: [[(a, t, p) for (a, t), p in mv.items()] for mv in ms] for s, ms in moves.items()
    })


# --------------------------------------------------------------------------
# probabilistic automata

@dataclass(frozen=True)
class ProbabilisticAutomaton:
    states: tuple
    letters: tuple
    initial: tuple
    delta: dict  # (state index, letter index) -> row over states
    finals: frozenset

    def check(self) -> "ProbabilisticAutomaton":
        n = len(self.states)
        if len(self.initial) != n or sum(self.initial) != 1 or any(p < 0 for p in self.initial):
            raise ValueError("initial is not a distribution over the states")
        for q in range(n):
            for e in range(len(self.letters)):
                row = self.delta.get((q, e))
                if row is None:
                    raise ValueError(f"no transition for ({self.states[q]}, {self.letters[e]})")
                if len(row) != n or sum(row) != 1 or any(p < 0 for p in row):
                    raise ValueError(f"delta({self.states[q]}, {self.letters[e]}) is not a distribution")
        if any(not 0 <= f < n for f in self.finals):
            raise ValueError("final state out of range")
        return self

    def letter_indices(self, w) -> tuple:
        idx = {a: i for i, a in enumerate(self.letters)}
        try:
            return tuple(idx[a] for a in w)
        except KeyError as e:
            raise ValueError(f"foreign letter {e.args[0]!r}") from None


def pa_dis(A: ProbabilisticAutomaton, w) -> tuple:
    """Distribution over ``A``'s states after reading ``w``."""
    mu = tuple(A.initial)
    n = len(A.states)
    for e in A.letter_indices(w):
        nxt = [Fraction(0)] * n
        for q, x in enumerate(mu):
            if x:
                for t, p in enumerate(A.delta[(q, e)]):
                    nxt[t] += x * p
        mu = tuple(nxt)
    return mu


def pa_accept(A: ProbabilisticAutomaton, w) -> Fraction:
    mu = pa_dis(A, w)
    return sum((mu[q] for q in A.finals), Fraction(0))


def quarter_text() -> str:
    return resources.files("tracelab").joinpath("data/quarter.json").read_text(encoding="utf-8")


def twomove_text() -> str:
    return resources.files("tracelab").joinpath("data/twomove.json").read_text(encoding="utf-8")


def quarter_model() -> Mdp:
    from .io import parse_model

    return parse_model(quarter_text())


def twomove_model() -> Mdp:
    from .io import parse_model

    return parse_model(twomove_text())


def gadget_pa_universality(A: ProbabilisticAutomaton) -> GadgetOutput:
    """``A`` accepts every word with probability >= 1/2 iff left ⊑ right."""
    A.check()
    if set(A.letters) != {"a", "b"}:
        raise ValueError("the automaton must read exactly the letters a and b")
    extra = {"q_c", "q_d"} & set(A.states)
    if extra:
        raise ValueError(f"state names {sorted(extra)} are reserved")
    quarter, half = Fraction(1, 4), Fraction(1, 2)
    states = list(A.states) + ["q_c", "q_d"]
    moves = {}
    for q, name in enumerate(A.states):
        sim: dict = {}
        for e, letter in enumerate(A.letters):
            for t, p in enumerate(A.delta[(q, e)]):
                if p:
                    sim[(letter, A.states[t])] = quarter * p
        if q in A.finals:
            moves[name] = [{**sim, ("c", "q_c"): half}, {**sim, ("d", "q_d"): half}]
        else:
            moves[name] = [{**sim, ("d", "q_d"): half}]
    moves["q_c"] = [{("c", "q_c"): Fraction(1)}]
    moves["q_d"] = [{("d", "q_d"): Fraction(1)}]
    init = {s: p for s, p in zip(A.states, A.initial) if p}
    right = _model(states, ["a", "b", "c", "d"], init, moves)
    return GadgetOutput(
        quarter_model(), right,
        "the automaton is universal iff left ⊑ right",
        {"relation": "left refines right", "holds_iff": "Pr_A(w) >= 1/2 for every word w over {a,b}",
         "decidable": False},
        {"automaton_states": list(A.states), "finals": sorted(A.states[f] for f in A.finals)},
    )


# --------------------------------------------------------------------------
# subset sum

def _check_values(vals: Sequence[int], what: str) -> list:
    vals = list(vals)
    if not vals:
        raise ValueError(f"{what} must be nonempty")
    if any(not isinstance(v, int) or isinstance(v, bool) or v <= 0 for v in vals):
        raise ValueError(f"{what} must hold positive integers")
    return vals


def _subset_gadget(prefix: str, n: int) -> tuple:
    """States and moves of the choice gadget: ``prefix1..prefixn`` pick b or c."""
    b, c = f"{prefix}_b", f"{prefix}_c"
    names = [f"{prefix}{i + 1}" for i in range(n)]
    moves = {s: [{("a", b): Fraction(1)}, {("a", c): Fraction(1)}] for s in names}
    moves[b] = [{("b", b): Fraction(1)}]
    moves[c] = [{("c", c): Fraction(1)}]
    return names, [b, c], moves


def gadget_subset_sum(s: Sequence[int], N: int) -> GadgetOutput:
    """Some sub-multiset of ``s`` sums to ``N`` iff left ⊑ right (pure memoryless).

    Playing move 0 (towards b) at state ``s<i>`` puts ``s[i]`` in the subset.
    """
    s = _check_values(s, "s")
    if not isinstance(N, int) or N < 0:
        raise ValueError("N must be a non-negative integer")
    P = sum(s)
    if N > P:
        raise ValueError(f"N = {N} exceeds the total {P}")
    r = Fraction(N, P)
    left_moves = {"q0": [{("a", "qb"): r, ("a", "qc"): 1 - r}],
                  "qb": [{("b", "qb"): Fraction(1)}], "qc": [{("c", "qc"): Fraction(1)}]}
    left = _model(["q0", "qb", "qc"], ["a", "b", "c"], {"q0": 1}, left_moves)
    names, sinks, moves = _subset_gadget("s", len(s))
    right = _model(names + sinks, ["a", "b", "c"],
                   {nm: Fraction(v, P) for nm, v in zip(names, s)}, moves)
    return GadgetOutput(
        left, right,
        "some subset of s sums to N iff left ⊑ right when right plays pure memoryless strategies",
        {"relation": "left refines right (pure memoryless)", "holds_iff": "exists S ⊆ s with sum(S) = N",
         "subset_encoding": "s<i> in S iff move 0 (a to s_b) is played at s<i>"},
        {"s": s, "N": N, "P": P},
    )


def qss_parameters(s: Sequence[int], t: Sequence[int], N: int) -> dict:
    P, R = sum(s), sum(t)
    x = Fraction(1, P + R + N + 1)
    if R >= N:
        y1, y2 = x * (R - N), Fraction(0)
    else:
        y1, y2 = Fraction(0), x * (N - R)
    return {"P": P, "R": R, "x": x, "y1": y1, "y2": y2}


def gadget_qss(s: Sequence[int], t: Sequence[int], N: int) -> GadgetOutput:
    """One round of quantified subset sum as ``E_univ ⊑ E_exist`` (pure memoryless).

    The universal subset is the set of ``s<i>`` playing move 1 (towards c);
    the existential subset is the set of ``t<j>`` playing move 0 (towards b).
    """
    s = _check_values(s, "s")
    t = _check_values(t, "t")
    if not isinstance(N, int) or N < 0:
        raise ValueError("N must be a non-negative integer")
    prm = qss_parameters(s, t, N)
    x, y1, y2, P, R = prm["x"], prm["y1"], prm["y2"], prm["P"], prm["R"]
    half = Fraction(1, 2)

    def side(prefix, vals, total, y):
        names, sinks, moves = _subset_gadget(prefix, len(vals))
        r, yy = f"{prefix}_r", f"{prefix}_y"
        moves[r] = [{("a", sinks[0]): Fraction(1)}]
        moves[yy] = [{("a", sinks[1]): Fraction(1)}]
        init = {nm: half * x * v for nm, v in zip(names, vals)}
        init[yy] = half * y
        init[r] = 1 - half * (x * total + y)
        return _model(names + sinks + [r, yy], ["a", "b", "c"], init, moves)

    left = side("s", s, P, y1)
    right = side("t", t, R, y2)
    return GadgetOutput(
        left, right,
        "the existential player wins the one-round game iff left ⊑ right, "
        "both sides playing pure memoryless strategies",
        {"relation": "left refines right (pure memoryless, for all left exists right)",
         "holds_iff": "for all S ⊆ s exists T ⊆ t with sum(S) + sum(T) = N",
         "subset_encoding": "S = s<i> playing move 1 (a to s_c); T = t<j> playing move 0 (a to t_b)"},
        {"s": s, "t": t, "N": N, "P": P, "R": R,
         "x": str(x), "y1": str(y1), "y2": str(y2)},
    )


def qss_game(s: Sequence[int], t: Sequence[int], N: int) -> tuple:
    """Direct game evaluation: (existential wins, a losing S or None)."""
    from itertools import product

    t_sums = {sum(v for v, bit in zip(t, bits) if bit) for bits in product((0, 1), repeat=len(t))}
    for bits in product((0, 1), repeat=len(s)):
        S = [v for v, bit in zip(s, bits) if bit]
        if N - sum(S) not in t_sums:
            return False, S
    return True, None


# --------------------------------------------------------------------------
# nonnegative matrix factorisation

def _stochastic(M, what: str) -> list:
    rows = [[_frac(x) for x in row] for row in M]
    if not rows or not rows[0]:
        raise ValueError(f"{what} must be nonempty")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{what} is ragged")
        if any(x < 0 for x in row) or sum(row) != 1:
            raise ValueError(f"row {i} of {what} is not a distribution")
    return rows


def gadget_nmf(M, r: int) -> GadgetOutput:
    """``M`` (row-stochastic) has nonnegative rank <= r iff left ⊑ right (memoryless)."""
    M = _stochastic(M, "M")
    if not isinstance(r, int) or r < 1:
        raise ValueError("r must be a positive integer")
    n, m = len(M), len(M[0])
    a = [f"a{i + 1}" for i in range(n)]
    b = [f"b{j + 1}" for j in range(m)]
    labels = a + b + ["c"]
    qs = [f"q{i + 1}" for i in range(n)]
    lmoves = {"q_in": [{(a[i], qs[i]): Fraction(1, n) for i in range(n)}],
              "q_fi": [{("c", "q_fi"): Fraction(1)}]}
    for i in range(n):
        lmoves[qs[i]] = [{(b[j], "q_fi"): M[i][j] for j in range(m) if M[i][j]}]
    left = _model(["q_in"] + qs + ["q_fi"], labels, {"q_in": 1}, lmoves)
    ps = [f"p{i + 1}" for i in range(n)]
    ls = [f"l{k + 1}" for k in range(r)]
    rmoves = {"p_fi": [{("c", "p_fi"): Fraction(1)}]}
    for i in range(n):
        rmoves[ps[i]] = [{(a[i], ls[k]): Fraction(1)} for k in range(r)]
    for k in range(r):
        rmoves[ls[k]] = [{(b[j], "p_fi"): Fraction(1)} for j in range(m)]
    right = _model(ps + ls + ["p_fi"], labels, {p: Fraction(1, n) for p in ps}, rmoves)
    return GadgetOutput(
        left, right,
        "M = A·W for nonnegative A (n×r) and W (r×m) iff left ⊑ right when right plays memoryless strategies",
        {"relation": "left refines right (memoryless, randomized)",
         "holds_iff": "nonnegative rank of M is at most r",
         "strategy_encoding": "A[i][k] = weight of move k at p<i>; W[k][j] = weight of move j at l<k>"},
        {"M": [[str(x) for x in row] for row in M], "n": n, "m": m, "r": r},
    )


def nmf_strategy(right: Mdp, A, W) -> LocalStrategy:
    """Memoryless strategy of the NMF gadget's right model built from stochastic factors."""
    A = _stochastic(A, "A")
    W = _stochastic(W, "W")
    choice = []
    for q, name in enumerate(right.states):
        if name.startswith("p") and name != "p_fi":
            choice.append(tuple(A[int(name[1:]) - 1]))
        elif name.startswith("l"):
            choice.append(tuple(W[int(name[1:]) - 1]))
        else:
            choice.append((Fraction(1),))
    return LocalStrategy.of(right, choice)


# --------------------------------------------------------------------------
# mutual refinement

def gadget_mutual(d: Mdp, e: Mdp, fresh: str = "#") -> GadgetOutput:
    """``D ⊑ E`` iff ``E₂ ⊑ D+E`` and ``D+E ⊑ E₂`` (left = D+E, right = E₂).

    Both start by emitting ``fresh``; ``D+E`` then picks which copy to run.
    """
    if set(d.labels) != set(e.labels):
        raise ModelError(["label sets differ"])
    if fresh in d.labels:
        raise ModelError([f"label {fresh!r} already in use"])
    labels = list(d.labels) + [fresh]
    dn = [f"D:{s}" for s in d.states]
    en = [f"E:{s}" for s in e.states]

    def copy(m: Mdp, names: list) -> dict:
        out = {}
        for q, ms in enumerate(m.moves):
            out[names[q]] = [{(m.labels[a], names[t]): p for (a, t), p in mv.entries.items()}
                             for mv in ms]
        return out

    moves = {"p0": [{(fresh, dn[q]): p for q, p in enumerate(d.initial) if p},
                    {(fresh, en[q]): p for q, p in enumerate(e.initial) if p}]}
    moves.update(copy(d, dn))
    moves.update(copy(e, en))
    d_plus_e = _model(["p0"] + dn + en, labels, {"p0": 1}, moves)
    moves2 = {"q0": [{(fresh, en[q]): p for q, p in enumerate(e.initial) if p}]}
    moves2.update(copy(e, en))
    e2 = _model(["q0"] + en, labels, {"q0": 1}, moves2)
    return GadgetOutput(
        d_plus_e, e2,
        "D ⊑ E iff (right ⊑ left and left ⊑ right)",
        {"relation": "mutual refinement", "holds_iff": "D refines E",
         "always": "right ⊑ left", "decidable": False},
        {"fresh_label": fresh, "left_states": 1 + d.n_states + e.n_states,
         "right_states": 1 + e.n_states},
    )
