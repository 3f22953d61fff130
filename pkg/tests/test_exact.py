from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import coset_count, in_integer_span
from trophom.exact import (
    INFINITE,
    GaussianRational,
    IntMatrix,
    integer_kernel,
    invariant_factors,
    lattice_index,
    rank,
    rref,
    smith_normal_form,
    solve_square,
)


def _is_diagonal_chain(D: IntMatrix) -> bool:
    rows = D.to_rows()
    diag = []
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if i != j and x != 0:
                return False
        if i < D.cols:
            diag.append(row[i])
    nz = [d for d in diag if d != 0]
    if any(d < 0 for d in nz) or diag[:len(nz)] != nz:
        return False
    return all(b % a == 0 for a, b in zip(nz, nz[1:]))


def test_snf_small_example():
    A = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    U, D, V = smith_normal_form(A)
    assert U @ IntMatrix.from_rows(A) @ V == D
    assert [D[i, i] for i in range(3)] == [2, 6, 12]
    assert abs(U.det()) == 1 and abs(V.det()) == 1


def test_snf_rectangular_and_zero():
    U, D, V = smith_normal_form([[0, 0], [0, 0], [0, 0]])
    assert D.to_rows() == [[0, 0], [0, 0], [0, 0]]
    assert invariant_factors([[2, 0, 0], [0, 3, 0]]) == [1, 6]


def test_kernel_is_saturated():
    K = integer_kernel([[2, 4, 6]])
    assert K.cols == 2
    for col in K.columns():
        assert 2 * col[0] + 4 * col[1] + 6 * col[2] == 0
    # (-2, 1, 0) and (-3, 0, 1) must lie in the span, which requires saturation.
    assert in_integer_span([-2, 1, 0], K.columns())
    assert in_integer_span([-3, 0, 1], K.columns())


def test_lattice_index_examples():
    assert lattice_index([[2, 0], [0, 3]]) == 6
    assert lattice_index([[1, 1], [1, -1]]) == 2
    assert lattice_index([[1, 2, 3], [2, 4, 6]]) is INFINITE
    assert lattice_index([[1, 0, 1], [0, 2, 2]]) == 2
    assert lattice_index(IntMatrix.zeros(0, 0)) == 1


def test_rref_rank_solve():
    R, piv = rref([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]])
    assert piv == [0] and R == [[1, 2]]
    assert rank([[1, 2, 3], [4, 5, 6], [7, 8, 9]]) == 2
    assert solve_square([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    assert solve_square([[1, 2], [2, 4]], [1, 2]) is None


def test_gaussian_rational_field():
    i = GaussianRational(0, 1)
    assert i * i == -1
    z = GaussianRational(Fraction(1, 2), 3)
    assert z * (1 / z) == 1
    assert rank([[GaussianRational(1, 1), 2], [GaussianRational(2, 0), GaussianRational(2, -2)]]) == 1


small = st.integers(-6, 6)


@st.composite
def int_matrices(draw, max_rows=3, max_cols=4):
    m = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    return [draw(st.lists(small, min_size=n, max_size=n)) for _ in range(m)]


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_snf_properties(A):
    U, D, V = smith_normal_form(A)
    assert U @ IntMatrix.from_rows(A) @ V == D
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    assert _is_diagonal_chain(D)


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_kernel_properties(A):
    K = integer_kernel(A)
    assert K.cols == len(A[0]) - rank(A)
    for col in K.columns():
        assert all(sum(a * x for a, x in zip(row, col)) == 0 for row in A)
    # Saturation: the kernel columns extend to part of a unimodular basis.
    if K.cols:
        assert invariant_factors(K) == [1] * K.cols


@settings(max_examples=120, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=4))))
def test_lattice_index_matches_coset_count(data):
    n, gens = data
    rows = [[g[i] for g in gens] for i in range(n)]
    expected = coset_count(gens, n)
    got = lattice_index(rows)
    if expected is None:
        assert got is INFINITE
    else:
        assert got == expected


def test_lattice_index_nonsquare_generators():
    gens = [[2, 0], [0, 2], [1, 1]]
    rows = [[g[i] for g in gens] for i in range(2)]
    assert lattice_index(rows) == coset_count(gens, 2) == 2
    with pytest.raises(ValueError):
        IntMatrix(2, 2, (1, 2, 3))
