import random

import pytest
from flint import fmpq
from hypothesis import given, settings
from hypothesis import strategies as st

from proxlp import numerics as nx
from proxlp import verify as V
from proxlp.feasibility import feas_lp_lines, solve_feasibility, verify_feas_lp
from proxlp.instances import tu_network
from proxlp.numerics import DEFAULT_TOL
from proxlp.outcomes import FarkasPrimal, Feasible, Lifting, Trace
from proxlp.subspace import Subspace

from conftest import int_matrices

q = fmpq


def test_nonnegative_input_returned():
    out = solve_feasibility(Subspace.kernel([[1, 2, 3]]), [1, 0, 4], 2)
    assert isinstance(out, Feasible) and list(out.x) == [1, 0, 4]


def test_two_coordinate_farkas():
    W = Subspace.kernel([[1, 1]])
    out = solve_feasibility(W, [-1, 0], 2)
    assert isinstance(out, FarkasPrimal)
    s = out.s
    assert s[0] == s[1] and s[0] > 0


def test_directed_cycle_feasible():
    # 4-cycle 0→1→2→3→0, last node's row dropped
    A = [[1, 0, 0, -1], [-1, 1, 0, 0], [0, -1, 1, 0]]
    W = Subspace.kernel(A)
    flow = nx.vec([2, 1, 3, 0])
    d = flow + nx.vec([-4, -4, -4, -4])  # same circulation class, now negative
    assert W.contains(d - flow)
    tr = Trace()
    out = solve_feasibility(W, d, 2, trace=tr)
    assert isinstance(out, Feasible)
    assert all(feas_lp_lines(W, d, 2, out.x, exact=True).values())
    assert tr.max_feas_depth <= W.rank


def test_verify_feas_lp_lines():
    W = Subspace.kernel([[1, 1]])
    assert verify_feas_lp(W, [1, 0], 2, [1, 0])
    tiny = nx.q(2 * DEFAULT_TOL.residual_tol)
    assert not verify_feas_lp(W, [1, 0], 2, nx.vec([1 + tiny, -tiny]))
    d = nx.vec([-1, 2])
    bound = 16 * 4 * 2 * 1  # 16 M² n ‖d⁻‖₁
    far = d + nx.vec([2 * bound + 1, -(2 * bound + 1)])
    assert W.contains(far - d)
    assert not verify_feas_lp(W, d, 2, far)


def test_loops_are_split_off():
    W = Subspace.kernel([[1, 1, 0]])  # coordinate 2 is a loop
    out = solve_feasibility(W, [2, -1, -5], 2)
    assert isinstance(out, Feasible)
    assert out.x[2] == 0 and nx.is_nonneg(out.x) and W.contains(out.x - nx.vec([2, -1, -5]))


def test_rejects_small_M():
    with pytest.raises(ValueError):
        solve_feasibility(Subspace.kernel([[1, 1]]), [1, 1], 1)


def test_network_instances_never_certify(rng):
    for _ in range(10):
        inst = tu_network(5, 8, rng)
        W = inst.subspace()
        out = solve_feasibility(W, inst.d, 2)
        assert isinstance(out, Feasible)


@st.composite
def feasibility_cases(draw):
    A = draw(int_matrices(max_m=3, max_n=7))
    W = Subspace.kernel(A)
    d = nx.vec([draw(st.integers(-3, 3)) for _ in range(W.n)])
    return A, W, d


@settings(max_examples=40)
@given(feasibility_cases())
def test_outcome_matches_exact_oracle(case):
    A, W, d = case
    M = max(2, nx.q(V.brute_kappa(A)))
    tr = Trace()
    out = solve_feasibility(W, d, M, trace=tr)
    gt = V.rational_simplex(A, list(nx.mat_vec(nx.mat(A), d)), [0] * W.n)
    assert not isinstance(out, Lifting)
    assert tr.max_feas_depth <= W.rank
    if isinstance(out, Feasible):
        assert gt.status == "optimal"
        assert all(feas_lp_lines(W, d, M, out.x, exact=True).values())
    else:
        assert gt.status == "infeasible"
        assert V.check_certificate(out, {"A": A, "d": d})[0]


@settings(max_examples=25)
@given(feasibility_cases())
def test_small_M_outputs_stay_sound(case):
    A, W, d = case
    out = solve_feasibility(W, d, 2)
    if isinstance(out, Lifting):
        assert V.check_certificate(out)[0]
    elif isinstance(out, FarkasPrimal):
        assert V.check_certificate(out, {"A": A, "d": d})[0]
    else:
        assert W.contains(out.x - d) and nx.is_nonneg(out.x)
