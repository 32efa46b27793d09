import random
from fractions import Fraction as F

import pytest

from _gen import random_dist, random_local, random_mdp, random_pure
from tracelab.gadgets import quarter_model, twomove_model
from tracelab.model import Mdp, norm
from tracelab.semantics import (FiniteMemoryStrategy, LocalStrategy, StrategyError,
                                TraceBasedTable, flatten, induced_mc, last_label_strategy,
                                product_sub_dis, step, sub_dis, sub_dis_paths, succ,
                                table_from_local_sequence, trace_prob, transition_matrix, words)

ONE = F(1)


def test_quarter_transition_matrix_and_succ():
    f1 = quarter_model()
    u = LocalStrategy.unique(f1)
    m = transition_matrix(f1, u, 0)
    assert m[0][0] == F(1, 4) and sum(sum(r) for r in m) == F(1, 4)
    assert succ((ONE, 0, 0), f1, u, 2) == (0, F(1, 4), 0)
    assert succ((0, 0, 0), f1, u, 2) == (0, 0, 0)


def test_transition_matrix_of_mixed_moves():
    m = Mdp.build(["s", "t1", "t2"], ["a"], {"s": 1},
                  {"s": [[("a", "t1", 1)], [("a", "t2", 1)]], "t1": [[("a", "t1", 1)]],
                   "t2": [[("a", "t2", 1)]]})
    pure = transition_matrix(m, LocalStrategy.pure(m, (1, 0, 0)), 0)
    assert pure[0] == (0, 0, 1)
    mixed = transition_matrix(m, LocalStrategy.uniform(m), 0)
    assert mixed[0] == (0, F(1, 2), F(1, 2))


def test_quarter_examples():
    f1 = quarter_model()
    ab = f1.word("ab")
    assert sub_dis(f1, None, ab) == (F(1, 16), 0, 0)
    assert trace_prob(f1, None, ab) == F(1, 16)
    assert trace_prob(f1, None, f1.word("abc")) == F(1, 64)
    assert sub_dis(f1, None, ()) == f1.initial
    assert not any(sub_dis(f1, None, f1.word("ca")))


def test_mdp_needs_a_strategy():
    with pytest.raises(StrategyError):
        sub_dis(twomove_model(), None, (0,))


def test_matrix_and_path_sub_dis_agree():
    rng = random.Random(12)
    for _ in range(40):
        m = random_mdp(rng, rng.randint(1, 4), rng.randint(1, 3))
        alpha = random_local(rng, m)
        for w in words(m.n_labels, 3):
            assert sub_dis(m, alpha, w) == sub_dis_paths(m, alpha, w)


def test_prefix_consistency():
    rng = random.Random(2)
    for _ in range(30):
        m = random_mdp(rng, 3, 2)
        alpha = random_local(rng, m)
        assert trace_prob(m, alpha, ()) == 1
        for w in words(m.n_labels, 3):
            t = trace_prob(m, alpha, w)
            if t:
                assert sum(trace_prob(m, alpha, w + (a,)) for a in range(m.n_labels)) == t


def test_mass_conservation():
    rng = random.Random(5)
    for _ in range(200):
        m = random_mdp(rng, rng.randint(1, 4), rng.randint(1, 3))
        mu = tuple(p / 2 for p in random_dist(rng, m.n_states, 5))
        alpha = random_local(rng, m)
        assert sum(norm(step(m, mu, alpha, a)) for a in range(m.n_labels)) == norm(mu)


def test_induced_mc():
    f2 = twomove_model()
    mc = induced_mc(f2, LocalStrategy.pure(f2, (0, 0)))
    assert mc.moves[1][0].entries == {(2, 1): ONE}
    mixed = induced_mc(f2, LocalStrategy.of(f2, [(ONE,), (F(1, 2), F(1, 2))]))
    assert mixed.moves[1][0].entries == {(2, 1): F(1, 2), (3, 1): F(1, 2)}
    f1 = quarter_model()
    assert induced_mc(f1, LocalStrategy.unique(f1)) == f1


def test_flatten_memoryless_is_constant():
    rng = random.Random(8)
    m = random_mdp(rng, 3, 2)
    alpha = random_local(rng, m)
    table = flatten(m, FiniteMemoryStrategy.from_local(alpha), 3)
    assert table.entries
    for (w, q), d in table.entries.items():
        assert d == alpha.choice[q]


def test_flatten_last_label_on_twomove():
    f2 = twomove_model()
    s = last_label_strategy(f2, "q1", {"c": 0, "d": 1})
    table = flatten(f2, s, 4)
    for (w, q), d in table.entries.items():
        if q == 1 and w:
            assert d == ((ONE, 0) if w[-1] == 2 else (0, ONE))


def _random_memory_strategy(rng, m, k):
    update = {(i, a, q): rng.randrange(k) for i in range(k) for a in range(m.n_labels)
              for q in range(m.n_states)}
    output = {(i, q): tuple(random_dist(rng, len(m.moves[q]), 5)) for i in range(k)
              for q in range(m.n_states)}
    return FiniteMemoryStrategy(tuple(f"k{i}" for i in range(k)), 0, update, output).check(m)


def test_flatten_matches_product_chain():
    rng = random.Random(21)
    for _ in range(10):
        m = random_mdp(rng, 3, 2)
        s = _random_memory_strategy(rng, m, 3)
        table = flatten(m, s, 5)
        for w in words(m.n_labels, 5):
            assert sub_dis(m, table, w) == product_sub_dis(m, s, w)


def test_table_from_local_sequence():
    rng = random.Random(6)
    for _ in range(10):
        m = random_mdp(rng, 3, 2)
        alphas = [random_pure(rng, m) if i % 2 else random_local(rng, m) for i in range(4)]
        table = table_from_local_sequence(m, alphas)
        for w in words(m.n_labels, 4, 4):
            mu = m.initial
            for i, a in enumerate(w):
                mu = step(m, mu, alphas[i], a)
                assert sub_dis(m, table, w[:i + 1]) == mu


def test_table_depth_is_enforced():
    f2 = twomove_model()
    with pytest.raises(StrategyError):
        sub_dis(f2, TraceBasedTable(1), (0, 0))
