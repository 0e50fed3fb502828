from hypothesis import given
from hypothesis import strategies as st

import pytest
from flint import fmpq

from proxlp import numerics as nx
from proxlp.errors import InconsistentProjection, RankDeficient

from conftest import int_matrices, rationals

q = fmpq


def test_normalize_already_normal():
    r = nx.gaussian_normalize([[1, 1, 1]])
    assert r.basis == (0,)
    assert nx.table(r.N) == [[1, 1, 1]]


def test_normalize_scales_row():
    r = nx.gaussian_normalize([[2, 4]])
    assert r.basis == (0,)
    assert nx.table(r.N) == [[1, 2]]


def test_normalize_identity_block_kept():
    A = [[1, 0, 1], [0, 1, 1]]
    r = nx.gaussian_normalize(A)
    assert r.basis == (0, 1)
    assert nx.table(r.N) == A


def test_normalize_rank_deficient():
    with pytest.raises(RankDeficient):
        nx.gaussian_normalize([[1, 2], [2, 4]])


def test_normalize_drops_zero_rows():
    r = nx.gaussian_normalize([[0, 0, 0], [1, 2, 3]])
    assert r.kept_rows == (1,)
    assert nx.table(r.N) == [[1, 2, 3]]


def test_float_entries_convert_exactly():
    assert nx.q(0.1) == fmpq(3602879701896397, 36028797018963968)
    with pytest.raises(ValueError):
        nx.q(float("nan"))


@pytest.mark.parametrize("A,b,want", [
    ([[1], [1]], [1, 3], [2]),
    ([[1, 0], [0, 1]], [5, 7], [5, 7]),
    ([[1, 1]], [4], [2, 2]),
])
def test_least_squares_examples(A, b, want):
    assert list(nx.least_squares(A, b)) == [q(w) for w in want]


def test_solve_min_norm_inconsistent():
    with pytest.raises(InconsistentProjection):
        nx.solve_min_norm([[1, 1], [1, 1]], [0, 1])


@pytest.mark.parametrize("M,v,want", [
    ([[1, 1, 1]], [1, 1, -1], [q(1, 3)] * 3),
    ([[1, 1]], [-1, 0], [q(-1, 2)] * 2),
    ([[1, 1, 1]], [2, 2, 2], [2, 2, 2]),
])
def test_project_orthogonal_examples(M, v, want):
    assert list(nx.project_orthogonal(M, v)) == [q(w) for w in want]


@given(int_matrices(), st.data())
def test_kernel_is_preserved(A, data):
    try:
        r = nx.gaussian_normalize(A)
    except RankDeficient:
        return
    n = len(A[0])
    x = [data.draw(rationals()) for _ in range(n)]
    x = nx.project_kernel(A, x)
    assert nx.is_zero(nx.mat_vec(nx.mat(A), x))
    assert nx.is_zero(nx.mat_vec(r.N, x))
    # and conversely on the kernel of N
    y = nx.project_kernel(r.N, x + nx.ones(n))
    assert nx.is_zero(nx.mat_vec(nx.mat(A), y))


@given(int_matrices(), st.data())
def test_projection_idempotent_and_orthogonal(A, data):
    n = len(A[0])
    v = nx.vec([data.draw(rationals()) for _ in range(n)])
    p = nx.project_orthogonal(A, v)
    assert list(nx.project_orthogonal(A, p)) == list(p)
    for row in A:
        assert nx.dot(nx.vec(row), v - p) == 0


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_least_squares_normal_equations(m, n, data):
    A = [[data.draw(st.integers(-3, 3)) for _ in range(n)] for _ in range(m)]
    b = nx.vec([data.draw(rationals()) for _ in range(m)])
    x = nx.least_squares(A, b)
    r = nx.mat_vec(nx.mat(A), x) - b
    assert nx.is_zero(nx.mat_tvec(nx.mat(A), r))
