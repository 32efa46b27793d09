import random
from fractions import Fraction as F

from _gen import doubled, random_mdp
from tracelab.gadgets import quarter_model, twomove_model
from tracelab.model import Mdp
from tracelab.oracle import (argmax_table, max_trace_prob, min_trace_prob, oracle_mc_equiv,
                             oracle_refines_mc)
from tracelab.semantics import sub_dis, trace_prob, words


def test_mc_max_equals_min_equals_tr():
    rng = random.Random(1)
    for _ in range(50):
        c = random_mdp(rng, 3, 2, mc=True)
        w = tuple(rng.randrange(2) for _ in range(rng.randint(0, 4)))
        t = trace_prob(c, None, w)
        assert max_trace_prob(c, w) == min_trace_prob(c, w) == t


def test_twomove_extremes():
    f2 = twomove_model()
    dc = f2.word("dc")
    assert max_trace_prob(f2, dc) == F(1, 4)
    assert min_trace_prob(f2, dc) == 0
    assert max_trace_prob(f2, ()) == 1


def test_oracle_refines_examples():
    f1, f2 = quarter_model(), twomove_model()
    v = oracle_refines_mc(f2, f1, 2)
    assert v.found and len(v.word) == 2 and v.achieved != v.required
    assert v.mode in ("max", "min")
    assert not oracle_refines_mc(f1, f1, 4).found
    dup = Mdp.build(f1.states, f1.labels, {"p0": 1}, {
        s: [[(f1.labels[a], f1.states[t], p) for (a, t), p in ms[0].entries.items()]] * 2
        for s, ms in zip(f1.states, f1.moves)})
    assert not oracle_refines_mc(dup, f1, 5).found


def test_bounds_and_argmax_tables():
    rng = random.Random(4)
    for _ in range(30):
        m = random_mdp(rng, 3, 2)
        for w in words(2, 3):
            hi, lo = max_trace_prob(m, w), min_trace_prob(m, w)
            assert 0 <= lo <= hi <= 1
            table = argmax_table(m, w)
            assert sum(sub_dis(m, table, w)) == hi


def test_refutation_is_monotone_in_depth():
    rng = random.Random(8)
    for _ in range(30):
        d = random_mdp(rng, 2, 2)
        c = random_mdp(rng, 2, 2, mc=True)
        for k in range(4):
            if oracle_refines_mc(d, c, k).found:
                assert oracle_refines_mc(d, c, k + 1).found


def test_doubled_models_never_refuted():
    rng = random.Random(5)
    for _ in range(10):
        c = random_mdp(rng, 2, 2, mc=True)
        assert not oracle_refines_mc(doubled(rng, c), c, 4).found
        assert not oracle_mc_equiv(c, c, 4).found
