import random
from fractions import Fraction as F
from itertools import product

import pytest

from _gen import random_dist, random_local, random_mdp
from tracelab.bisim import (Certificate, GuardExceeded, MalformedCertificate, basis_matrix,
                            bisim_space_mdp_mc, bisim_space_two_mdps, bisimilar,
                            certificate_from_space, eqmoves, extremal_strategies, is_extremal,
                            move_profile, point, verify_certificate, _direction_lp)
from tracelab.equivalence import mc_equiv
from tracelab.gadgets import quarter_model, twomove_model
from tracelab.model import Mdp, dirac, disjoint_union
from tracelab.oracle import search_certificates
from tracelab.rational import dot, ones
from tracelab.semantics import LocalStrategy

ONE_COL = lambda n: basis_matrix([ones(n)], n)


def test_point_examples():
    f1 = quarter_model()
    u = LocalStrategy.unique(f1)
    assert point(f1, ONE_COL(3), f1.initial, u) == (F(1, 4),) * 4
    assert point(f1, ONE_COL(3), (0, 0, 0), u) == (0,) * 4


def test_point_is_linear_in_strategy():
    rng = random.Random(3)
    for _ in range(20):
        m = random_mdp(rng, 3, 2)
        B = basis_matrix([ones(3), tuple(F(rng.randint(-2, 2)) for _ in range(3))], 3)
        a1, a2 = random_local(rng, m), random_local(rng, m)
        mix = a1.mix(a2, F(1, 2))
        lhs = point(m, B, m.initial, mix)
        rhs = tuple((x + y) / 2 for x, y in zip(point(m, B, m.initial, a1), point(m, B, m.initial, a2)))
        assert lhs == rhs


def test_eqmoves():
    f2 = twomove_model()
    B = ONE_COL(2)
    assert eqmoves(f2, B, LocalStrategy.pure(f2, (0, 0)), 1) == {0}
    dup = Mdp.build(["s"], ["a"], {"s": 1}, {"s": [[("a", "s", 1)], [("a", "s", 1)]]})
    assert eqmoves(dup, ONE_COL(1), LocalStrategy.pure(dup, (0,)), 0) == {0, 1}
    assert eqmoves(f2, basis_matrix([(0, 0)], 2), LocalStrategy.pure(f2, (0, 0)), 1) == {0, 1}


def test_is_extremal_examples():
    f1 = quarter_model()
    assert is_extremal(f1, ONE_COL(3), LocalStrategy.unique(f1)) is not None
    f2 = twomove_model()
    for pick in (0, 1):
        alpha = LocalStrategy.pure(f2, (0, pick))
        v = is_extremal(f2, ONE_COL(2), alpha)
        assert v is not None
        mine, other = move_profile(f2, ONE_COL(2), 1, pick), move_profile(f2, ONE_COL(2), 1, 1 - pick)
        assert dot(mine, v) > dot(other, v)
    assert len(extremal_strategies(f2, ONE_COL(2))) == 2
    assert len(extremal_strategies(f1, ONE_COL(3))) == 1


def test_dominated_middle_move_is_not_extremal():
    seg = Mdp.build(["s"], ["a", "b"], {"s": 1}, {"s": [
        [("a", "s", 1)], [("a", "s", F(1, 2)), ("b", "s", F(1, 2))], [("b", "s", 1)]]})
    B = ONE_COL(1)
    assert is_extremal(seg, B, LocalStrategy.pure(seg, (1,))) is None
    assert is_extremal(seg, B, LocalStrategy.pure(seg, (0,))) is not None
    assert [a.picks() for a in extremal_strategies(seg, B)] == [(0,), (2,)]


def test_guard():
    states = [f"s{i}" for i in range(4)]
    moves = {s: [[("a", t, 1)] for t in states] for s in states}
    m = Mdp.build(states, ["a"], {"s0": 1}, moves)
    B = basis_matrix([ones(4), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)], 4)
    with pytest.raises(GuardExceeded) as e:
        extremal_strategies(m, B, guard=10)
    assert e.value.required == 256 and e.value.limit == 10


def test_two_mdp_space_fixtures():
    u = disjoint_union(twomove_model(), quarter_model())
    sp = bisim_space_two_mdps(u)
    assert 2 <= sp.dim <= 5 and sp.stabilized_at <= u.model.n_states - 1
    assert sp.dims == sorted(sp.dims) and len(set(sp.dims)) == len(sp.dims)
    assert not bisimilar(sp, u.left_initial, u.right_initial)
    cert = certificate_from_space(sp, u.left_initial, u.right_initial)
    assert verify_certificate(u, u.left_initial, u.right_initial, cert).accepted

    one = Mdp.build(["s"], ["a"], {"s": 1}, {"s": [[("a", "s", 1)], [("a", "s", 1)]]})
    assert bisim_space_two_mdps(one).dim == 1

    f1 = quarter_model()
    uu = disjoint_union(f1, f1)
    assert bisim_space_two_mdps(uu).basis.key() == mc_equiv(f1, f1).basis.key()


def test_mdp_mc_space():
    f2, f1 = twomove_model(), quarter_model()
    sp = bisim_space_mdp_mc(f2, f1)
    u = sp.union
    assert sp.basis.contains(ones(u.model.n_states))
    assert not bisimilar(sp, u.left_initial, u.right_initial)
    rng = random.Random(2)
    for _ in range(15):
        a = random_mdp(rng, 2, 2, mc=True, prefix="x")
        b = random_mdp(rng, 2, 2, mc=True, prefix="y")
        s1 = bisim_space_mdp_mc(a, b)
        s2 = bisim_space_two_mdps(disjoint_union(a, b))
        assert s1.basis.key() == s2.basis.key()


def test_bisimilar_basic_cases():
    f1 = quarter_model()
    u = disjoint_union(f1, f1)
    sp = bisim_space_two_mdps(u)
    mu = u.left_initial
    assert bisimilar(sp, mu, mu)
    assert not bisimilar(sp, mu, tuple(x / 2 for x in mu))
    assert not bisimilar(sp, dirac(6, 1), dirac(6, 2))


def test_certificate_edge_cases():
    f1 = quarter_model()
    u = disjoint_union(f1, f1)
    n = u.model.n_states
    half = tuple(x / 2 for x in u.left_initial)
    assert verify_certificate(u, u.left_initial, half, Certificate(1, (), (), ())).accepted
    rng = random.Random(1)
    for _ in range(10):
        k = rng.randint(1, 3)
        cert = Certificate(k, tuple(rng.randrange(j) for j in range(1, k)),
                           tuple(rng.randrange(4) for _ in range(k - 1)), ((0,) * n,) * (k - 1))
        assert not verify_certificate(u, u.left_initial, u.left_initial, cert).accepted
    with pytest.raises(MalformedCertificate):
        verify_certificate(u, u.left_initial, half, Certificate(2, (1,), (0,), ((0,) * n,)))


def test_certificate_search_on_fixture():
    u = disjoint_union(twomove_model(), quarter_model())
    cert = search_certificates(u.model, u.left_initial, u.right_initial, 3)
    assert cert is not None and cert.k <= 3
    assert verify_certificate(u, u.left_initial, u.right_initial, cert).accepted


def _vertices(points):
    distinct = sorted(set(points))
    dim = len(distinct[0])
    return {p for p in distinct
            if len(distinct) == 1 or _direction_lp([(p, o) for o in distinct if o != p], dim) is not None}


def test_extremal_points_decide_polytope_equality():
    rng = random.Random(17)
    seen = {True: 0, False: 0}
    for _ in range(25):
        m = random_mdp(rng, 2, 2, max_moves=2)
        B = basis_matrix([ones(2), (1, 0)], 2)
        mus = [tuple(random_dist(rng, 2, 2)) for _ in range(2)]
        if rng.random() < 0.4:
            mus[1] = mus[0]
        pures = [LocalStrategy.pure(m, p) for p in product(*(range(len(ms)) for ms in m.moves))]
        polys = [_vertices([point(m, B, mu, a) for a in pures]) for mu in mus]
        same_poly = polys[0] == polys[1]
        ext = extremal_strategies(m, B)
        same_points = all(point(m, B, mus[0], a) == point(m, B, mus[1], a) for a in ext)
        assert same_poly == same_points
        seen[same_poly] += 1
    assert seen[True] and seen[False]


def test_widening_the_basis_can_break_extremality():
    # s: (a,s), (a,t) and their half/half mix; t absorbs.  Picking the mix is
    # extremal under 1 (all three moves tie) but under [1 | e_s] the mix lies
    # strictly between the other two profiles.
    m = Mdp.build(["s", "t"], ["a"], {"s": 1}, {
        "s": [[("a", "s", 1)], [("a", "t", 1)], [("a", "s", F(1, 2)), ("a", "t", F(1, 2))]],
        "t": [[("a", "t", 1)]]})
    mix = LocalStrategy.pure(m, (2, 0))
    narrow = basis_matrix([(F(1), F(1))], 2)
    wide = basis_matrix([(F(1), F(1)), (F(1), F(0))], 2)
    assert is_extremal(m, narrow, mix) is not None
    assert is_extremal(m, wide, mix) is None


def test_certificates_from_random_spaces_verify():
    rng = random.Random(31)
    checked = 0
    for _ in range(40):
        d = random_mdp(rng, rng.randint(1, 2), 2, prefix="d")
        e = random_mdp(rng, rng.randint(1, 2), 2, prefix="e")
        u = disjoint_union(d, e)
        sp = bisim_space_two_mdps(u)
        if bisimilar(sp, u.left_initial, u.right_initial):
            assert certificate_from_space(sp, u.left_initial, u.right_initial) is None
            continue
        cert = certificate_from_space(sp, u.left_initial, u.right_initial)
        assert verify_certificate(u, u.left_initial, u.right_initial, cert).accepted
        checked += 1
    assert checked
