import numpy as np
import pytest
from hypothesis import given, strategies as st

from maltsev_kan import algebra as A
from maltsev_kan.algebra import check_maltsev_axioms
from maltsev_kan.errors import ShapeError
from maltsev_kan.simplicial import (CircleElement, SimplicialHom, TruncatedSimplicialAlgebra,
                                    circle_basis, circle_free_mod, compose, constant, identity,
                                    is_levelwise_surjective, multiply_hom, nerve_abelian,
                                    reduction_hom, terminal, validate, validate_hom)

from oracles import naive_simplicial_ok


def test_validate_examples():
    assert validate(constant(A.zmod_add(2), 3)).ok
    assert validate(nerve_abelian(2, 3)).ok
    assert validate(constant(A.zmod_sub(3), 4)).ok
    assert validate(constant(A.semilattice(), 2)).ok


def test_corrupted_face_is_flagged(nerve2_3):
    d0 = nerve2_3.d(2, 0).astype(np.int64)
    d0[3] ^= 1
    rep = validate(nerve2_3.replace_map("d", 2, 0, d0))
    assert not rep.ok and rep.violations
    assert rep.violations == sorted(rep.violations)


def test_shape_errors(nerve2_3):
    with pytest.raises(ShapeError):
        nerve2_3.replace_map("d", 2, 0, nerve2_3.d(2, 0)[:-1])
    with pytest.raises(ShapeError):
        TruncatedSimplicialAlgebra([A.cyclic_group(2)], [], [])
    with pytest.raises(ShapeError):
        TruncatedSimplicialAlgebra([A.cyclic_group(2)] * 2, [[np.arange(2)]], [[np.arange(2)]])


def test_constant_and_terminal():
    T = terminal(A.GROUP_SIG, 2)
    assert [T.size(n) for n in range(3)] == [1, 1, 1]
    assert validate(T).ok


def test_nerve_examples(nerve4_2):
    assert [nerve_abelian(2, 1).size(n) for n in range(2)] == [1, 2]
    assert nerve4_2.d(2, 1)[13] == 0          # (1,3) -> 1+3 mod 4
    assert nerve4_2.s(1, 0)[1] == 4           # 1 -> (0,1)
    assert nerve4_2.d(2, 0)[4] == 1           # d_0 s_0 = id spot check
    assert nerve4_2.d(2, 0)[13] == 3 and nerve4_2.d(2, 2)[13] == 1


def test_circle_examples(circle2_2):
    assert [circle2_2.size(n) for n in range(3)] == [2, 4, 8]
    sigma, s0star = 2, 1                       # level 1 basis (s0 *, sigma)
    assert circle2_2.d(1, 0)[sigma] == 1 and circle2_2.d(1, 1)[sigma] == 1
    assert circle2_2.s(0, 0)[1] == s0star


def test_circle_basis_counts():
    for n in range(5):
        basis = circle_basis(n)
        assert len(basis) == n + 1
    degenerate = {e.degeneracy(0) for e in circle_basis(0)}
    nondeg = [e for e in circle_basis(1) if e not in degenerate]
    assert nondeg == [CircleElement(1, 1)]
    # dimension 2 basis order is (s1 s0 *, s1 sigma, s0 sigma)
    sigma = CircleElement(1, 1)
    assert circle_basis(2) == [CircleElement(0, 0).degeneracy(0).degeneracy(1),
                               sigma.degeneracy(1), sigma.degeneracy(0)]


@pytest.mark.parametrize("m", [2, 3, 4, 5])
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_fixtures_validate(m, N):
    if m <= 4:
        assert validate(nerve_abelian(m, N)).ok
    assert validate(circle_free_mod(m, N)).ok


@pytest.mark.parametrize("X", [nerve_abelian(3, 3), circle_free_mod(3, 3)], ids=["nerve", "circle"])
def test_levels_carry_maltsev_terms(X):
    for lev in X.levels:
        assert lev.maltsev_term is not None and check_maltsev_axioms(lev, lev.maltsev_term).holds


def test_surjectivity_examples():
    assert is_levelwise_surjective(reduction_hom(4, 2, 3))
    assert not is_levelwise_surjective(multiply_hom(2, 4, 3))
    assert is_levelwise_surjective(identity(nerve_abelian(3, 2)))


def test_homs_validate_and_compose():
    f = reduction_hom(8, 4, 2)
    g = reduction_hom(4, 2, 2)
    h = multiply_hom(2, 4, 2)
    for u in (f, g, h, compose(g, f), compose(h, g), compose(g, compose(h, g))):
        assert validate_hom(u).ok


def test_broken_hom_flagged():
    f = reduction_hom(4, 2, 2)
    maps = [m.astype(np.int64) for m in f.maps]
    maps[2][5] ^= 1
    rep = validate_hom(SimplicialHom(f.source, f.target, maps))
    assert not rep.ok
    assert any(v.law == "f d_i = d_i f" and v.n == 2 for v in rep.violations)


def test_workers_do_not_change_report(nerve2_3):
    d0 = nerve2_3.d(3, 1).astype(np.int64)
    d0[5] ^= 1
    Y = nerve2_3.replace_map("d", 3, 1, d0)
    assert validate(Y, workers=4) == validate(Y)


_SMALL = [constant(A.zmod_add(2), 3), constant(A.semilattice(), 2), nerve_abelian(2, 3),
          nerve_abelian(3, 2), circle_free_mod(2, 2), circle_free_mod(3, 2), circle_free_mod(2, 3)]


@given(st.integers(0, len(_SMALL) - 1), st.data())
def test_validator_matches_naive_checker(which, data):
    X = _SMALL[which]
    kind = data.draw(st.sampled_from("ds"))
    if kind == "d":
        n = data.draw(st.integers(1, X.N))
        arr, tgt = X.d(n, i := data.draw(st.integers(0, n))), X.size(n - 1)
    else:
        n = data.draw(st.integers(0, X.N - 1))
        arr, tgt = X.s(n, i := data.draw(st.integers(0, n))), X.size(n + 1)
    arr = arr.astype(np.int64)
    e = data.draw(st.integers(0, len(arr) - 1))
    arr[e] = data.draw(st.integers(0, tgt - 1))
    Y = X.replace_map(kind, n, i, arr)
    assert validate(Y).ok == naive_simplicial_ok(Y)


def test_equivalent_mutant_exists():
    # on the 1-truncated Z/2 circle, s_0 * may be moved to sigma without
    # breaking any law: the validator is right to accept it
    X = circle_free_mod(2, 1)
    Y = X.replace_map("s", 0, 0, np.array([0, 2]))
    assert validate(Y).ok and naive_simplicial_ok(Y)
