import itertools

import numpy as np
import pytest

from maltsev_kan import algebra as A
from maltsev_kan.algebra import eval_term
from maltsev_kan.detect import maltsev_witness
from maltsev_kan.errors import BudgetExceeded, DimensionOutOfRange
from maltsev_kan.horn import Horn, LiftProblem, check_matching, lift_horn, verify_lift
from maltsev_kan.oracle import (brute_fill, brute_lift, default_budget, kan12_circle,
                                kan12_circle_solutions, lift_horns_over, random_lift_problem,
                                verify_fibration)
from maltsev_kan.simplicial import (circle_free_mod, constant, identity, multiply_hom,
                                    nerve_abelian, reduction_hom, to_terminal)

from oracles import circle_face_solutions


def enc(m, *g):
    return sum(x * m ** t for t, x in enumerate(g))


def test_brute_fill_examples(nerve4_2, circle2_2):
    assert brute_fill(nerve4_2, Horn.of(2, 1, {0: 3, 2: 1})) == [enc(4, 1, 3)]
    assert brute_fill(constant(A.cyclic_group(2), 2), Horn.of(2, 1, {0: 1, 2: 1})) == [1]
    assert brute_fill(circle2_2, Horn.of(2, 0, {1: enc(2, 1, 0), 2: enc(2, 0, 1)})) == [enc(2, 1, 1, 1)]
    with pytest.raises(DimensionOutOfRange):
        brute_fill(nerve4_2, Horn.of(3, 0, {1: 0, 2: 0, 3: 0}))


def test_brute_lift_examples(reduction4_2, doubling2_2):
    assert brute_lift(LiftProblem(reduction4_2, Horn.of(2, 1, {0: 3, 2: 1}), enc(2, 1, 1))) == [13]
    assert brute_lift(LiftProblem(doubling2_2, Horn.of(1, 0, {1: 0}), 1)) == []
    X = nerve_abelian(3, 2)
    f = identity(X)
    for w in range(X.size(2)):
        sols = brute_lift(LiftProblem(f, Horn.from_simplex(X, 2, 1, w), w))
        assert w in sols and sols == sorted(sols)


def test_horn_enumeration_matches_product():
    f = reduction_hom(2, 2, 3)
    X, Y = f.source, f.target
    for n in (2, 3):
        for k in range(n + 1):
            for y in range(Y.size(n)):
                got = [h.faces for h in lift_horns_over(f, n, k, y)]
                want = []
                idx = [i for i in range(n + 1) if i != k]
                for combo in itertools.product(range(X.size(n - 1)), repeat=n):
                    h = Horn(n, k, tuple(zip(idx, combo)))
                    if check_matching(X, h).ok and all(Y.d(n, i)[y] == f.maps[n - 1][x] for i, x in h.faces):
                        want.append(h.faces)
                assert got == want


def test_verify_fibration_reduction():
    rep = verify_fibration(reduction_hom(4, 2, 3), 3, trace=True)
    assert rep.ok and rep.failures == [] and rep.checked_horns > 0
    assert rep.lifts_checked == rep.checked_horns and rep.traced_steps > 0


def test_verify_fibration_doubling():
    rep = verify_fibration(multiply_hom(2, 4, 2), 1)
    assert rep.failures and all(n == 1 for n, *_ in rep.failures)
    assert rep.lifts_checked == 0          # not surjective: no constructive cross-check


def test_verify_fibration_point():
    rep = verify_fibration(identity(constant(A.trivial(A.GROUP_SIG), 3)), 3)
    assert rep.failures == [] and rep.checked_horns >= 1


def test_constant_semilattice_is_kan():
    # a constant object is Kan whatever the theory; the checker must agree
    S = constant(A.semilattice(), 2)
    rep = verify_fibration(to_terminal(S), 2)
    assert rep.ok and rep.lifts_checked == 0


def test_negative_soundness():
    f = multiply_hom(2, 4, 2)
    X, Y = f.source, f.target
    for n in (1, 2):
        for k in range(n + 1):
            for y in range(Y.size(n)):
                for combo in itertools.product(range(X.size(n - 1)), repeat=n):
                    idx = [i for i in range(n + 1) if i != k]
                    prob = LiftProblem(f, Horn(n, k, tuple(zip(idx, combo))), y)
                    if not brute_lift(prob):
                        assert not any(verify_lift(prob, x) for x in range(X.size(n)))


def test_budget():
    with pytest.raises(BudgetExceeded):
        verify_fibration(reduction_hom(4, 2, 3), 3, budget=1000)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("MALTSEV_KAN_BUDGET", "1234")
    assert default_budget() == 1234
    monkeypatch.delenv("MALTSEV_KAN_BUDGET")
    assert default_budget() == 10 ** 8


def test_report_independent_of_workers():
    f = reduction_hom(4, 2, 3)
    a = verify_fibration(f, 3).to_json(include_elapsed=False)
    b = verify_fibration(f, 3, workers=4).to_json(include_elapsed=False)
    assert a == b
    g = multiply_hom(2, 4, 3)
    assert (verify_fibration(g, 2, workers=3).to_json(include_elapsed=False)
            == verify_fibration(g, 2).to_json(include_elapsed=False))


def test_random_circle_identity_problems(circle3_3):
    f = identity(circle3_3)
    rng = np.random.default_rng(11)
    for _ in range(300):
        prob = random_lift_problem(f, rng)
        assert lift_horn(prob).x in brute_lift(prob)


# ---------------------------------------------------------------- circle (1,2)-horn

def _to_coords(x, m):
    return tuple((x // m ** t) % m for t in range(3))


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_kan12_matches_linear_oracle(m):
    sols = kan12_circle_solutions(m)
    assert [_to_coords(x, m) for x in sols] == circle_face_solutions(m)
    assert kan12_circle(m) == sols[0]


def test_kan12_anchors():
    assert kan12_circle_solutions(2) == [enc(2, 1, 1, 1)]
    assert enc(3, 1, 1, 2) in kan12_circle_solutions(3)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_kan12_from_maltsev_term(m):
    # x = t(s1 s0 *, s0 sigma, s1 sigma) for any Maltsev term t of Z/m
    X = circle_free_mod(m, 2)
    lev = X.levels[2]
    gens = [enc(m, 1, 0, 0), enc(m, 0, 0, 1), enc(m, 0, 1, 0)]
    for t in (A.GROUP_MALTSEV, maltsev_witness(A.cyclic_group(m))):
        assert eval_term(lev, t, gens) in kan12_circle_solutions(m)


def test_kan12_rejects_small_m():
    with pytest.raises(ValueError):
        kan12_circle(1)
