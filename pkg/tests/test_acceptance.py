"""Acceptance criteria at their stated counts and tolerances.

Each test prints one ``CRITERION k: PASS|FAIL`` line; the lines are echoed
again in the terminal summary.
"""
import random
from fractions import Fraction

import pytest

from proxlp import approx
from proxlp import numerics as nx
from proxlp import optimization, subspace
from proxlp import verify as V
from proxlp.circuits import hoffman_point
from proxlp.cli import RunFlags, run
from proxlp.errors import InconsistentProjection
from proxlp.extended import build_extended
from proxlp.feasibility import solve_feasibility, verify_feas_lp
from proxlp.instances import high_kappa, tu_network
from proxlp.optimization import optimize
from proxlp.outcomes import FarkasPrimal, Feasible, Lifting, Optimal, PerturbedOptimum, Trace
from proxlp.subspace import LiftingCertificate, Subspace

SUMMARY: list[str] = []

# every LiftingCertificate and PerturbedOptimum produced while this module runs
EMITTED: list = []
ACCEPTED: list = []


def report(k, ok, detail):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    SUMMARY.append(line)
    assert ok, line


@pytest.fixture(scope="module", autouse=True)
def audit():
    mp = pytest.MonkeyPatch()
    make = subspace._certificate

    def recording_certificate(*a, **kw):
        cert = make(*a, **kw)
        EMITTED.append(cert)
        return cert

    inner = optimization.inner_loop

    def recording_inner(W, d, c, M, **kw):
        r = inner(W, d, c, M, **kw)
        if isinstance(r, PerturbedOptimum):
            ACCEPTED.append((W.n, nx.vec(d), nx.q(M), r))
        return r

    mp.setattr(subspace, "_certificate", recording_certificate)
    mp.setattr(optimization, "inner_loop", recording_inner)
    yield
    mp.undo()


def F(x):
    return Fraction(int(x.p), int(x.q)) if hasattr(x, "p") else Fraction(x)


def corpus(seed, count, *, want):
    """Integer instances, m ∈ [1,6], n ∈ [2,12], entries in [-3,3].

    ``want`` is "optimal" (b = A x0 for x0 ≥ 0 and c = Aᵀy + s0 with s0 ≥ 0,
    so both sides are feasible) or "infeasible" (random b, kept only when
    the simplex says so).
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        m = rng.randint(1, 6)
        n = rng.randint(max(2, m + 1), 12)
        A = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        if want == "optimal":
            x0 = [rng.randint(0, 3) for _ in range(n)]
            b = [sum(a * x for a, x in zip(r, x0)) for r in A]
            y = [rng.randint(-1, 1) for _ in range(m)]
            c = [sum(A[i][j] * y[i] for i in range(m)) + rng.randint(0, 3) for j in range(n)]
        else:
            b = [rng.randint(-6, 6) for _ in range(m)]
            c = [0] * n
        gt = V.rational_simplex(A, b, c)
        if gt.status != want:
            continue
        try:
            d = nx.solve_min_norm(nx.mat(A), b)
        except InconsistentProjection:
            continue  # Ax = b itself has no solution: not an instance in (W, d) form
        W = Subspace.kernel(A)
        out.append((A, b, c, W, d, gt))
    return out


@pytest.fixture(scope="module")
def optimal_corpus():
    return corpus(101, 500, want="optimal")


@pytest.fixture(scope="module")
def infeasible_corpus():
    return corpus(202, 150, want="infeasible")


COUNTERS: dict = {"depth": [], "outer": []}


def test_criterion_1_exactness(optimal_corpus):
    bad = 0
    for A, b, c, W, d, gt in optimal_corpus:
        M = max(2, V.brute_kappa(A))
        tr = Trace()
        out = optimize(W, d, c, M, trace=tr)
        COUNTERS["depth"].append((tr.max_feas_depth, W.rank))
        COUNTERS["outer"].append((tr.outer_iterations, W.rank))
        if not isinstance(out, Optimal):
            bad += 1
            continue
        x, s = [F(v) for v in out.x], [F(v) for v in out.s]
        opt = sum(Fraction(ci) * xi for ci, xi in zip(c, x))
        scale = 1 + max(abs(v) for v in x + s)
        res_p = max((abs(sum(a * v for a, v in zip(r, x)) - bi) for r, bi in zip(A, b)),
                    default=0)
        ds = [Fraction(ci) - si for ci, si in zip(c, s)]  # must lie in the row space
        res_d = max((abs(v) for v in V._matvec(V.kernel_basis(V.fmat(A), len(c)), ds)),
                    default=0)
        ok = (abs(opt - gt.opt) <= Fraction(1, 10 ** 7) * (1 + abs(gt.opt))
              and sum(a * b_ for a, b_ in zip(x, s)) <= Fraction(1, 10 ** 8) * scale
              and min(x) >= 0 and min(s) >= 0
              and res_p <= Fraction(1, 10 ** 8) and res_d <= Fraction(1, 10 ** 8))
        bad += not ok
    report(1, bad == 0, f"{len(optimal_corpus)} instances, {bad} mismatches")


def test_criterion_2_feasibility(optimal_corpus, infeasible_corpus):
    bad = unverified = 0
    for A, b, c, W, d, gt in optimal_corpus:
        M = max(2, V.brute_kappa(A))
        tr = Trace()
        out = solve_feasibility(W, d, M, trace=tr)
        COUNTERS["depth"].append((tr.max_feas_depth, W.rank))
        bad += not (isinstance(out, Feasible) and verify_feas_lp(W, d, M, out.x))
    for A, b, c, W, d, gt in infeasible_corpus:
        M = max(2, V.brute_kappa(A))
        tr = Trace()
        out = solve_feasibility(W, d, M, trace=tr)
        COUNTERS["depth"].append((tr.max_feas_depth, W.rank))
        if not isinstance(out, FarkasPrimal):
            bad += 1
        elif not V.check_certificate(out, {"A": A, "d": d})[0]:
            unverified += 1
    report(2, bad == 0 and unverified == 0,
           f"{len(optimal_corpus)} feasible + {len(infeasible_corpus)} infeasible, "
           f"{bad} wrong, {unverified} unverified certificates")


def test_criterion_3_unimodular():
    rng = random.Random(303)
    restarts = runs = 0
    for _ in range(60):
        nodes = rng.randint(3, 12)
        arcs = rng.randint(nodes, 30)
        inst = tu_network(nodes, arcs, rng)
        rep = run("opt", inst)
        runs += 1
        restarts += rep.restarts
    report(3, restarts == 0, f"{runs} network instances with n <= 30 at M = 2, {restarts} restarts")


def random_hoffman_case(rng):
    n = rng.randint(2, 10)
    m = rng.randint(1, n - 1)
    A = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
    W = Subspace.kernel(A)
    K = V.kernel_basis(V.fmat(A), n)
    x = nx.zeros(n)
    for g in K:
        x = x + nx.vec(g) * nx.q(Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
    lo, hi = [], []
    for xi in x:
        lo.append(None if rng.random() < 0.3 else xi - nx.q(Fraction(rng.randint(0, 8), 2)))
        hi.append(None if rng.random() < 0.3 else xi + nx.q(Fraction(rng.randint(0, 8), 2)))
    return A, W, x, lo, hi


def test_criterion_4_hoffman():
    rng = random.Random(404)
    cases = certs = bad = 0
    while cases < 1000:
        A, W, x, lo, hi = random_hoffman_case(rng)
        M = V.brute_kappa(A)
        y = hoffman_point(W, x, lo, hi, M)
        cases += 1
        if isinstance(y, LiftingCertificate):
            certs += 1
            continue
        yf = [F(v) for v in y]
        size = Fraction(0)
        inside = True
        for i in range(W.n):
            if lo[i] is not None:
                inside &= yf[i] >= F(lo[i])
                size += max(F(lo[i]), Fraction(0))
            if hi[i] is not None:
                inside &= yf[i] <= F(hi[i])
                size += max(-F(hi[i]), Fraction(0))
        ok = inside and W.contains(y) and max(map(abs, yf)) <= M * size + Fraction(1, 10 ** 9)
        bad += not ok
    report(4, certs == 0 and bad == 0, f"{cases} cases, {certs} certificates, {bad} bound violations")


def test_criterion_5_condition_numbers():
    rng = random.Random(505)
    bad = 0
    for _ in range(200):
        n = rng.randint(2, 7)
        m = rng.randint(1, n - 1)
        A = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        if all(v == 0 for r in A for v in r):
            A[0][0] = 1
        band = V.kappa_chibar_band(A)
        dual = V.brute_kappa(V.orthogonal_complement_matrix(A))
        bad += not (band.lower_exact and band.upper_exact and band.float_ok and dual == band.kappa)
    report(5, bad == 0, f"200 matrices, {bad} band or duality failures")


def test_criterion_6_lifting_soundness():
    rng = random.Random(606)
    worst = 0
    failed = 0
    for _ in range(40):
        inst = high_kappa(rng.randint(1, 5), rng)
        try:
            rep = run("opt", inst, RunFlags(verify=True))
        except Exception:
            failed += 1
            continue
        worst = max(worst, rep.restarts)
        failed += rep.verification.get("rational simplex agrees") is not True
    unsound = sum(not V.check_certificate(c)[0] for c in EMITTED)
    report(6, unsound == 0 and failed == 0 and worst <= 3,
           f"{len(EMITTED)} certificates emitted so far, {unsound} unsound; "
           f"40 gadget instances, max restarts {worst}, {failed} failures")


def test_criterion_7_solver_contract(optimal_corpus):
    seen = []

    def recording(req):
        r = approx.builtin_solve(req)
        seen.append((req, r))
        return r

    approx.register_external_solver(recording)
    try:
        for A, b, c, W, d, gt in optimal_corpus[:60]:
            optimize(W, d, c, max(2, V.brute_kappa(A)))
    finally:
        approx.register_external_solver(None)
    bad = 0
    for req, r in seen:
        lines = V.contract_lines(nx.table(req.A), req.b, req.c, req.x0, req.delta,
                                 req.R_P, req.R_D, r.x, r.y, r.s)
        bad += not all(lines.values())
    report(7, len(seen) >= 100 and bad == 0, f"{len(seen)} solves, {bad} contract violations")


def test_criterion_8_counters():
    assert COUNTERS["depth"] and COUNTERS["outer"], "criteria 1 and 2 must run first"
    deep = sum(v > m for v, m in COUNTERS["depth"])
    long = sum(v > m for v, m in COUNTERS["outer"])
    report(8, deep == 0 and long == 0,
           f"{len(COUNTERS['depth'])} feasibility runs, {len(COUNTERS['outer'])} optimization runs, "
           f"{deep} too deep, {long} too many outer iterations")


def test_criterion_9_perturbation_budget():
    bad = 0
    for n, d, M, r in ACCEPTED:
        lhs = F(nx.norm1(r.d_tilde - d))
        rhs = F(nx.norminf(r.x)) / (4 * n * n * F(M) ** 2)
        bad += lhs > rhs + Fraction(1, 10 ** 9)
    report(9, len(ACCEPTED) > 0 and bad == 0, f"{len(ACCEPTED)} accepted perturbed optima, {bad} over budget")


def test_criterion_10_extension_kappa():
    rng = random.Random(1010)
    bad = done = 0
    while done < 50:
        n = rng.randint(2, 4)
        m = rng.randint(1, n - 1)
        A = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        if all(v == 0 for r in A for v in r):
            continue
        W = Subspace.kernel(A)
        d = nx.vec([rng.randint(-3, 3) for _ in range(n)])
        c = nx.vec([rng.randint(-3, 3) for _ in range(n)])
        k = V.brute_kappa(A)
        E = build_extended(W, d, c, max(2, k), nx.q(Fraction(1, 64)))
        bad += V.brute_kappa(nx.table(E.A)) > 4 * k
        done += 1
    report(10, bad == 0, f"{done} instances, {bad} with kappa above 4x")
