import random
from fractions import Fraction as F

import pytest

from _gen import random_mdp, refinement_instances
from tracelab.equivalence import closure, mc_equiv
from tracelab.gadgets import quarter_model, twomove_model
from tracelab.model import Mdp, ModelError
from tracelab.oracle import oracle_mc_equiv
from tracelab.refinement import lift, refines_mc, strategy_basis
from tracelab.semantics import LocalStrategy, trace_prob, transition_matrix


def quarter_variant():
    return Mdp.build(["p0", "pc", "pd"], ["a", "b", "c", "d"], {"p0": 1}, {
        "p0": [[("a", "p0", F(1, 4)), ("b", "p0", F(1, 4)), ("c", "pc", F(1, 8)), ("d", "pd", F(3, 8))]],
        "pc": [[("c", "pc", 1)]], "pd": [[("d", "pd", 1)]]})


def iid_ab(n):
    states = [f"s{i}" for i in range(n)]
    moves = {s: [[("a", states[(i + 1) % n], F(1, 2)), ("b", states[(i + 1) % n], F(1, 2))]]
             for i, s in enumerate(states)}
    return Mdp.build(states, ["a", "b"], {states[0]: 1}, moves)


def test_mc_equiv_examples():
    f1 = quarter_model()
    assert mc_equiv(f1, f1).equivalent
    v = mc_equiv(f1, quarter_variant())
    assert not v.equivalent and v.witness == (2,)
    assert (v.lhs_prob, v.rhs_prob) == (F(1, 4), F(1, 8))
    o = oracle_mc_equiv(f1, quarter_variant(), 1)
    assert o.found and o.word == (2,) and (o.achieved, o.required) == (F(1, 4), F(1, 8))
    assert mc_equiv(iid_ab(1), iid_ab(2)).equivalent
    assert not oracle_mc_equiv(iid_ab(1), iid_ab(2), 6).found


def test_mc_equiv_rejects_mdp():
    with pytest.raises(ModelError):
        mc_equiv(twomove_model(), quarter_model())


def test_mc_equiv_against_oracle_and_recomputation():
    rng = random.Random(31)
    for _ in range(80):
        c1 = random_mdp(rng, rng.randint(1, 3), 2, mc=True, prefix="x")
        c2 = random_mdp(rng, rng.randint(1, 3), 2, mc=True, prefix="y")
        v = mc_equiv(c1, c2)
        assert v.insertions <= c1.n_states + c2.n_states
        depth = c1.n_states + c2.n_states
        if v.equivalent:
            assert not oracle_mc_equiv(c1, c2, depth).found
        else:
            assert trace_prob(c1, None, v.witness) != trace_prob(c2, None, v.witness)
            assert oracle_mc_equiv(c1, c2, depth).found
        perm = list(reversed(range(c2.n_states)))
        shuffled = Mdp.build([c2.states[i] for i in perm], c2.labels,
                             {s: p for s, p in zip(c2.states, c2.initial) if p},
                             {c2.states[q]: [[(c2.labels[a], c2.states[t], p)
                                              for (a, t), p in mv.entries.items()] for mv in ms]
                              for q, ms in enumerate(c2.moves)})
        assert mc_equiv(c1, shuffled).result == v.result


def test_closure_contains_ones():
    f1 = quarter_model()
    b = closure(f1, LocalStrategy.unique(f1))
    assert b.contains((1, 1, 1)) and b.tags[0] == ()


def test_strategy_basis_sizes():
    assert len(strategy_basis(twomove_model()).ids()) == 4
    f1 = quarter_model()
    sb = strategy_basis(f1)
    assert len(sb.ids()) == 1 + f1.n_states
    assert len({s for s in sb.picks()}) == 1
    one = Mdp.build(["s"], ["a"], {"s": 1}, {"s": [[("a", "s", 1)]] * 2 + [[("a", "s", 1)]]})
    assert len(strategy_basis(one).ids()) == 4


def test_lift_structure():
    f2, f1 = twomove_model(), quarter_model()
    pair = lift(f2, f1)
    sigma = len(pair.sigma)
    assert sigma == 4 and pair.d_prime.n_labels == sigma * f2.n_labels
    b = pair.d_prime.labels.index("b(base,c)")
    base = transition_matrix(f2, LocalStrategy.pure(f2, (0, 0)), 2)
    lifted = transition_matrix(pair.d_prime, LocalStrategy.unique(pair.d_prime), b)
    assert lifted[0][1] == F(1, 16) == base[0][1] / sigma
    total = [sum(transition_matrix(pair.d_prime, LocalStrategy.unique(pair.d_prime), a)[q][t]
                 for a in range(pair.d_prime.n_labels) for t in range(pair.d_prime.n_states))
             for q in range(pair.d_prime.n_states)]
    assert all(x == 1 for x in total)


def test_refines_mc_examples():
    f1, f2 = quarter_model(), twomove_model()
    v = refines_mc(f2, f1)
    assert not v.holds and v.lhs_prob != v.rhs_prob
    assert refines_mc(f1, f1).holds
    dup = Mdp.build(f1.states, f1.labels, {"p0": 1}, {
        s: [[(f1.labels[a], f1.states[t], p) for (a, t), p in ms[0].entries.items()]] * 2
        for s, ms in zip(f1.states, f1.moves)})
    assert refines_mc(dup, f1).holds


def test_base_choice_does_not_change_verdict():
    for d, c in refinement_instances(77, 60):
        assert refines_mc(d, c, "first").result == refines_mc(d, c, "last").result
