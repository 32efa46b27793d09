import random
from fractions import Fraction as F

import pytest

from _gen import random_mdp, random_pure
from tracelab.bisim import GuardExceeded
from tracelab.equivalence import mc_equiv
from tracelab.gadgets import quarter_model, twomove_model, gadget_subset_sum
from tracelab.model import Mdp, ModelError
from tracelab.restricted import (MissingVariable, check_assignment, emit_etr, expected_counts,
                                 known_solution, refine_mc_mdp_pm, refine_pm_pm, run_solver)
from tracelab.semantics import LocalStrategy, induced_mc
from tracelab.smtlib import parse_script


def quarter_doubled():
    f1 = quarter_model()
    return Mdp.build(f1.states, f1.labels, {"p0": 1}, {
        s: [[(f1.labels[a], f1.states[t], p) for (a, t), p in ms[0].entries.items()]] * 2
        for s, ms in zip(f1.states, f1.moves)})


def test_subset_sum_examples():
    g = gadget_subset_sum([1, 2, 3], 4)
    v = refine_mc_mdp_pm(g.left, g.right)
    assert v.yes
    assert mc_equiv(g.left, induced_mc(g.right, v.witness)).equivalent
    chosen = {g.right.states[q] for q, i in enumerate(v.witness.picks()) if i == 0 and q < 3}
    assert chosen == {"s1", "s3"}
    g = gadget_subset_sum([2, 4], 3)
    assert not refine_mc_mdp_pm(g.left, g.right).yes


def test_induced_mc_is_always_matched():
    rng = random.Random(3)
    for _ in range(15):
        d = random_mdp(rng, 3, 2)
        alpha = random_pure(rng, d)
        v = refine_mc_mdp_pm(induced_mc(d, alpha), d)
        assert v.yes and mc_equiv(induced_mc(d, alpha), induced_mc(d, v.witness)).equivalent


def test_pm_pm_identity():
    rng = random.Random(4)
    for _ in range(10):
        d = random_mdp(rng, 3, 2)
        assert refine_pm_pm(d, d).yes


def test_guard_applies():
    with pytest.raises(GuardExceeded):
        refine_pm_pm(twomove_model(), twomove_model(), guard=1)


def test_etr_counts_for_quarter():
    f1 = quarter_model()
    d = quarter_doubled()
    inst = emit_etr(f1, d)
    assert len(inst.variables) == 6 + 36 + 4 * 36 == 186
    assert (len(inst.variables), len(inst.assertions)) == expected_counts(f1, d)
    script = parse_script(inst.smtlib)
    assert script.logic == "QF_NRA"
    assert list(script.declared) == inst.variables
    assert len(script.assertions) == len(inst.assertions)
    assert inst.smtlib.rstrip().endswith("(check-sat)")


def test_etr_known_solution_and_perturbation():
    f1, d = quarter_model(), quarter_doubled()
    inst = emit_etr(f1, d)
    sol = known_solution(f1, d, LocalStrategy.pure(d, (1, 0, 1)))
    assert check_assignment(inst, sol)
    bent = dict(sol)
    bent["x_0_0"] += F(1, 1000)
    assert not check_assignment(inst, bent)
    assert not check_assignment(inst, {v: 0 for v in inst.variables})
    with pytest.raises(MissingVariable):
        check_assignment(inst, {})


def test_etr_degree_at_most_two():
    inst = emit_etr(quarter_model(), twomove_model())
    for a in inst.assertions:
        for poly, _ in a.atoms:
            assert all(len(mono) <= 2 for mono in poly)


def test_etr_label_mismatch():
    other = Mdp.build(["s"], ["x"], {"s": 1}, {"s": [[("x", "s", 1)]]})
    with pytest.raises(ModelError):
        emit_etr(quarter_model(), other)


def test_known_solution_randomized_witness():
    rng = random.Random(9)
    done = 0
    while done < 5:
        d = random_mdp(rng, 3, 2)
        alpha = LocalStrategy.of(d, [tuple(F(1, len(ms)) for _ in ms) for ms in d.moves])
        c = induced_mc(d, alpha)
        inst = emit_etr(c, d)
        assert check_assignment(inst, known_solution(c, d, alpha))
        done += 1


def test_run_solver_reports_first_line(tmp_path):
    fake = tmp_path / "solver.sh"
    fake.write_text("#!/bin/sh\ncat >/dev/null\necho unsat\n")
    fake.chmod(0o755)
    res = run_solver("(check-sat)\n", str(fake))
    assert res.status == "unsat" and res.returncode == 0
