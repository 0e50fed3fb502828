import random

import pytest
from flint import fmpq
from hypothesis import given, settings
from hypothesis import strategies as st

from proxlp import numerics as nx
from proxlp import verify as V
from proxlp.optimization import (_outer, certificate_backtrack, f_primal_lines, inner_loop,
                                 optimize, solve_optimization)
from proxlp.outcomes import FarkasDual, FarkasPrimal, Lifting, Optimal, PerturbedOptimum, Trace
from proxlp.subspace import Subspace

from conftest import int_matrices

q = fmpq
HALF = [q(1, 2), q(1, 2)]


def optimal_pair(W, d, c, x, s):
    return (W.contains(x - nx.vec(d)) and W.dual().contains(s - nx.vec(c))
            and nx.is_nonneg(x) and nx.is_nonneg(s) and nx.dot(x, s) == 0)


def test_inner_loop_min_first_coordinate():
    W = Subspace.kernel([[1, 1]])
    r = inner_loop(W, HALF, [1, 0], 2)
    assert isinstance(r, PerturbedOptimum)
    assert all(f_primal_lines(W, HALF, [1, 0], 2, r).values())
    assert nx.dot(r.x, r.s) == 0


def test_inner_loop_d_in_W():
    W = Subspace.kernel([[1, -1]])
    r = inner_loop(W, [1, 1], [1, 2], 2)
    assert isinstance(r, PerturbedOptimum)
    assert nx.is_zero(r.x) and nx.is_nonneg(r.s)


def test_inner_loop_certifies_small_M():
    A = [[1, -10, -1, 0], [0, 1, 0, 2]]
    r = inner_loop(Subspace.kernel(A), [11, 12, 9, 2], [-1, -3, 2, -3], 2)
    assert isinstance(r, Lifting)
    assert r.cert.ratio > 2 and V.check_certificate(r)[0]


def test_inner_loop_needs_nonnegative_d():
    with pytest.raises(ValueError):
        inner_loop(Subspace.kernel([[1, 1]]), [-1, 2], [1, 0], 2)


def test_solve_min_first_coordinate():
    W = Subspace.kernel([[1, 1]])
    r = solve_optimization(W, HALF, [1, 0], 2)
    assert isinstance(r, Optimal)
    assert list(r.x) == [0, 1] and list(r.s) == [1, 0]


def test_zero_objective():
    W = Subspace.kernel([[1, 1, -1]])
    d = nx.vec([1, 2, 0])
    r = solve_optimization(W, d, [0, 0, 0], 2)
    assert isinstance(r, Optimal)
    assert nx.is_zero(r.s) and W.contains(r.x - d) and nx.is_nonneg(r.x)


def test_random_three_by_six_matches_oracle(rng):
    done = 0
    while done < 10:
        A = [[rng.randint(-3, 3) for _ in range(6)] for _ in range(3)]
        x0 = [rng.randint(0, 3) for _ in range(6)]
        b = [sum(a * x for a, x in zip(r, x0)) for r in A]
        c = [rng.randint(-3, 3) for _ in range(6)]
        gt = V.rational_simplex(A, b, c)
        if gt.status != "optimal":
            continue
        done += 1
        W = Subspace.kernel(A)
        M = max(2, nx.q(V.brute_kappa(A)))
        r = optimize(W, nx.vec(x0), c, M)
        assert isinstance(r, Optimal)
        assert nx.dot(nx.vec(c), r.x) == nx.q(gt.opt)


def test_backtrack_with_empty_history():
    W = Subspace.kernel([[1, 10, 0], [0, 1, 3]])
    cert = certificate_backtrack(W, [], 2)
    assert cert is not None and V.check_certificate(cert)[0]


def test_backtrack_after_small_M_run():
    A = [[1, -10, -1]]
    W = Subspace.kernel(A)
    out = _outer(W, nx.vec([12, 1, 2]), nx.vec([31, 1, -1]), 2, Trace())
    hist = getattr(out, "history", [])
    cert = certificate_backtrack(W, hist, 2)
    assert cert is not None and cert.ratio > 2
    assert V.check_certificate(cert)[0]


def test_optimize_reports_unbounded():
    W = Subspace.kernel([[1, -1]])
    c = nx.vec([-1, 0])
    r = optimize(W, [1, 1], c, 2)
    assert isinstance(r, FarkasDual)
    assert V.check_certificate(r, {"A": [[1, -1]], "c": c})[0]


def test_optimize_reports_infeasible():
    r = optimize(Subspace.kernel([[1, 1]]), [-1, 0], [1, 0], 2)
    assert isinstance(r, FarkasPrimal)


def test_optimize_with_loops_and_coloops():
    # coordinate 3 is a loop, coordinate 2 a coloop
    A = [[1, 1, 0, 0], [0, 0, 1, 0]]
    W = Subspace.kernel(A)
    d = nx.vec([1, 0, 2, 5])
    c = nx.vec([2, 1, -4, 3])
    r = optimize(W, d, c, 2)
    assert isinstance(r, Optimal) and optimal_pair(W, d, c, r.x, r.s)
    gt = V.rational_simplex(A, [1, 2], c)
    assert nx.dot(c, r.x) == nx.q(gt.opt)


@st.composite
def lp_cases(draw):
    A = draw(int_matrices(max_m=3, max_n=7))
    W = Subspace.kernel(A)
    d = nx.vec([draw(st.integers(0, 3)) for _ in range(W.n)])
    c = nx.vec([draw(st.integers(-3, 3)) for _ in range(W.n)])
    return A, W, d, c


@settings(max_examples=40)
@given(lp_cases())
def test_honest_runs_are_exact(case):
    A, W, d, c = case
    M = max(2, nx.q(V.brute_kappa(A)))
    tr = Trace()
    r = optimize(W, d, c, M, trace=tr)
    gt = V.rational_simplex(A, list(nx.mat_vec(nx.mat(A), d)), c)
    assert tr.outer_iterations <= W.rank
    assert not tr.events  # no fallback or backtracking when M is honest
    if isinstance(r, Optimal):
        assert optimal_pair(W, d, c, r.x, r.s)
        assert nx.dot(c, r.x) == nx.q(gt.opt)
    else:
        assert isinstance(r, FarkasDual) and gt.status == "unbounded"


@settings(max_examples=30)
@given(lp_cases())
def test_perturbed_optimum_budget(case):
    A, W, d, c = case
    M = max(2, nx.q(V.brute_kappa(A)))
    r = inner_loop(W, d, c, M)
    if isinstance(r, PerturbedOptimum):
        n = W.n
        assert nx.norm1(r.d_tilde - d) <= nx.norminf(r.x) / (4 * n * n * M * M)
        assert all(f_primal_lines(W, d, c, M, r).values())
    else:
        assert isinstance(r, FarkasDual) and W.contains(r.x) and nx.dot(c, r.x) < 0
