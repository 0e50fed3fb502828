"""Exact optimization by repeated perturbed solves.

``inner_loop`` returns an exact optimum for a slightly perturbed right-hand
side; ``solve_optimization`` uses it to settle coordinates into B (positive
in some optimum) and N (zero in some optimum) until what is left is trivial,
then recovers x* and s* with two feasibility solves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from flint import fmpq

from . import numerics as nx
from .errors import InconsistentProjection, InternalInconsistency
from .feasibility import FeasConfig, solve_feasibility
from .numerics import ZERO
from .oracles import lambda_set, prox_opt_oracle
from .outcomes import (FarkasDual, FarkasPrimal, Feasible, Lifting, Optimal, PerturbedOptimum,
                       ProxOptPoint, Trace)
from .subspace import (LiftingCertificate, Subspace, check_lift_certificate, closure, fix_coords,
                       lift, lift_dual, min_norm_point, project_coords, search_certificate)

__all__ = ["lambda_set", "inner_loop", "solve_optimization", "certificate_backtrack",
           "optimize", "OptConfig", "OuterRecord", "f_primal_lines"]


@dataclass(frozen=True)
class OptConfig:
    feas: FeasConfig = FeasConfig()
    search_bases: int = 4000  # cap for the last-resort certificate search


# ------------------------------------------------------------ inner loop

def f_primal_lines(W: Subspace, d, c, M, res: PerturbedOptimum) -> dict:
    d, c = nx.vec(d), nx.vec(c)
    M = nx.q(M)
    n = W.n
    x, s, dt = res.x, res.s, res.d_tilde
    return {"|d~-d|_1 <= |x~|_inf/(4n^2M^2)": nx.norm1(dt - d) <= nx.norminf(x) / (4 * n * n * M * M),
            "x~ in W+d~": W.contains(x - dt),
            "s~ in W_perp+c": W.dual().contains(s - c),
            "<x~,s~> = 0": nx.dot(x, s) == 0,
            "x~ >= 0": nx.is_nonneg(x),
            "s~ >= 0": nx.is_nonneg(s)}


def _inner(W: Subspace, d, c, M, eps, trace: Trace, depth: int):
    """(x, s) solving F-Primal-Prox(W, d, c, M, ε), or a certificate."""
    n = W.n
    trace.max_inner_depth = max(trace.max_inner_depth, depth)
    if n == 0:
        return nx.zeros(0), nx.zeros(0)
    Wd = W.dual()
    cl = nx.norm1(nx.vec(c[lambda_set(c, d)]))
    cp = min_norm_point(Wd, c)
    if cl >= max(M * nx.norm1(cp), nx.norminf(c) / (4 * M * M * n)):
        c = cp
    r = prox_opt_oracle(Wd, c, d, M, eps, trace=trace)
    if isinstance(r, FarkasPrimal):
        return FarkasDual(r.s)  # in the flipped orientation this is a ray of W
    if not isinstance(r, ProxOptPoint):
        return r
    s, x, dt = r.x, r.s, r.c_tilde
    thr = 16 * n ** 3 * M ** 3 * nx.norm1(nx.vec(s[lambda_set(s, x)]))
    # ties go to I, except at a zero threshold where the pair is already
    # exactly complementary and nothing needs fixing
    I = [i for i in range(n) if (s[i] <= thr if thr else s[i] < 0)]
    if not I:
        return x + d - dt, s
    J = [i for i in range(n) if i not in set(I)]
    if not J:
        raise InternalInconsistency("inner loop did not shrink")
    sub = _inner(fix_coords(W, I), nx.vec(x[I]), nx.vec(s[I]), M, eps, trace, depth + 1)
    if not isinstance(sub, tuple):
        return sub
    w, z = sub
    q = z - nx.vec(s[I])
    if nx.is_zero(q):
        ls = nx.zeros(n)
    else:
        ls = lift_dual(W, I, q)
        cert = check_lift_certificate(Wd, I, q, M, origin="inner stitch", z=ls)
        if cert is not None:
            return Lifting(cert)
    xt = nx.scatter(n, I, w)
    for j in J:
        xt[j] = x[j]
    return xt + d - dt, s + ls


def inner_loop(W: Subspace, d, c, M, *, trace: Trace | None = None):
    """PerturbedOptimum(d̃, x̃, s̃) solving F-Primal(W, d, c, M), or a certificate.

    ``d`` must be nonnegative.  One ε = 1/(32M⁴n⁴) serves every level of the
    recursion.
    """
    d, c = nx.vec(d), nx.vec(c)
    M = nx.q(M)
    if not nx.is_nonneg(d):
        raise ValueError("inner_loop needs d >= 0")
    trace = trace if trace is not None else Trace()
    n = W.n
    eps = fmpq(1) / (32 * M ** 4 * n ** 4)
    out = _inner(W, d, c, M, eps, trace, 0)
    if not isinstance(out, tuple):
        return out
    x, s = out
    lam = set(lambda_set(x, s))
    xt = nx.vec([ZERO if i in lam else x[i] for i in range(n)])
    res = PerturbedOptimum(d - x + xt, xt, s)
    lines = f_primal_lines(W, d, c, M, res)
    bad = [k for k, v in lines.items() if not v]
    if bad:
        raise InternalInconsistency(f"inner loop output violates: {', '.join(bad)}")
    return res


# ------------------------------------------------------------ outer loop

@dataclass(frozen=True)
class OuterRecord:
    """One outer iteration, in the local coordinates of ``W``."""
    idx: tuple          # global indices of W's coordinates
    W: Subspace
    d: np.ndarray
    x: np.ndarray       # x̃
    s: np.ndarray       # s̃
    IL: tuple
    IM: tuple
    IS0: tuple
    ISp: tuple


@dataclass
class OuterResult:
    B: list
    N: list
    history: list = field(default_factory=list)


def _outer(W0: Subspace, d0, c0, M, trace: Trace):
    n = W0.n
    W, d = W0, d0
    c = min_norm_point(W0.dual(), c0)
    idx = list(range(n))
    B, N = set(), set()
    hist = []
    last_s = None
    while idx and not W.contains(d):
        if len(hist) >= W0.rank:
            raise InternalInconsistency("outer loop exceeded m iterations")
        r = inner_loop(W, d, c, M, trace=trace)
        if not isinstance(r, PerturbedOptimum):
            return r
        trace.outer_iterations += 1
        k = W.n
        x = r.x
        top = nx.norminf(x)
        IL = [i for i in range(k) if x[i] > top / k]
        IM = [i for i in range(k) if top / k >= x[i] > top / (3 * k * k * M)]
        IS = [i for i in range(k) if x[i] <= top / (3 * k * k * M)]
        cl = set(closure(W, IL))
        IS0 = [i for i in IS if i in cl]
        ISp = [i for i in IS if i not in cl]
        hist.append(OuterRecord(tuple(idx), W, d, x, r.s, tuple(IL), tuple(IM),
                                tuple(IS0), tuple(ISp)))
        B |= {idx[i] for i in IL + IM}
        N |= {idx[i] for i in IS0}
        keep = sorted(IL + IM + ISp)
        Wp = fix_coords(W, keep)
        pos = [keep.index(i) for i in ISp]
        W = project_coords(Wp, pos) if ISp else Subspace.whole(0)
        d = nx.vec(d[ISp])
        c = nx.vec(r.s[ISp])
        last_s = c
        idx = [idx[i] for i in ISp]
    if last_s is None:
        N |= set(idx)
    else:
        N |= {g for g, v in zip(idx, last_s) if v != 0}
        B |= {g for g, v in zip(idx, last_s) if v == 0}
    return OuterResult(sorted(B), sorted(N), hist)


def _restricted_start(W0: Subspace, S, v):
    """p ∈ ℝ^S with (p, 0) ∈ W0 + v, or None when no such p exists."""
    if not S:
        return nx.zeros(0) if W0.contains(v) else None
    if W0.rank == 0:
        return nx.vec(v[S]) if all(v[i] == 0 for i in range(W0.n) if i not in set(S)) else None
    try:
        return nx.solve_min_norm(nx.cols(W0.N, S), nx.mat_vec(W0.N, v))
    except InconsistentProjection:
        return None


def certificate_backtrack(W0: Subspace, history: list, M, *, max_bases: int = 4000):
    """Look for a lifting certificate after the final primal solve failed.

    For each outer record, newest first, the small coordinates I_S⁰ of x̃ are
    lifted to zero through the large ones (this is the step whose size the
    outer loop relies on); a lift exceeding M times its input certifies
    M < κ.  If every such lift is within bounds, the basis-exchange graph of
    W0 is searched directly.
    """
    M = nx.q(M)
    for rec in reversed(history):
        W = rec.W
        pos = list(rec.IS0) + list(rec.IM) + list(rec.ISp)
        if not rec.IS0:
            continue
        p = nx.vec([-rec.x[i] for i in rec.IS0] + [ZERO] * (len(rec.IM) + len(rec.ISp)))
        if nx.is_zero(p):
            continue
        try:
            z = lift(W, pos, p)
        except InconsistentProjection:
            continue
        cert = check_lift_certificate(W, pos, p, M, origin="backtrack", z=z)
        if cert is not None:
            return cert
    return search_certificate(W0, M, max_bases=max_bases)


def solve_optimization(W0: Subspace, d0, c0, M, *, trace: Trace | None = None,
                       cfg: OptConfig = OptConfig()):
    """Optimal(x*, s*) for Primal-Dual(W0, d0, c0), or a lifting certificate.

    Both sides must be feasible and d0 ≥ 0.
    """
    d0, c0 = nx.vec(d0), nx.vec(c0)
    M = nx.q(M)
    if not nx.is_nonneg(d0):
        raise ValueError("solve_optimization needs d0 >= 0")
    trace = trace if trace is not None else Trace()
    out = _outer(W0, d0, c0, M, trace)
    if not isinstance(out, OuterResult):
        return out
    n = W0.n
    B, N = out.B, out.N
    Wd0 = W0.dual()

    def fail(why):
        trace.note(f"final solve failed: {why}")
        cert = certificate_backtrack(W0, out.history, M, max_bases=cfg.search_bases)
        if cert is None:
            raise InternalInconsistency(f"{why}, and no certificate of M < kappa was found")
        return Lifting(cert)

    p = _restricted_start(W0, B, d0)
    if p is None:
        return fail("no point of W0+d0 vanishes on N")
    if B:
        rx = solve_feasibility(fix_coords(W0, B), p, M, trace=trace, cfg=cfg.feas)
        if isinstance(rx, Lifting):
            return rx
        if not isinstance(rx, Feasible):
            return fail("primal restricted to B is infeasible")
        x = nx.scatter(n, B, rx.x)
    else:
        x = nx.zeros(n)
    q = _restricted_start(Wd0, N, c0)
    if q is None:
        return fail("no point of W0⊥+c0 vanishes on B")
    if N:
        rs = solve_feasibility(fix_coords(Wd0, N), q, M, trace=trace, cfg=cfg.feas)
        if isinstance(rs, Lifting):
            return rs
        if not isinstance(rs, Feasible):
            return fail("dual restricted to N is infeasible")
        s = nx.scatter(n, N, rs.x)
    else:
        s = nx.zeros(n)
    if not (W0.contains(x - d0) and Wd0.contains(s - c0) and nx.is_nonneg(x)
            and nx.is_nonneg(s) and nx.dot(x, s) == 0):
        raise InternalInconsistency("final pair is not optimal")
    return Optimal(x, s)


# ------------------------------------------------------------ full problem

def _fallback(W, M, trace, why, cfg):
    trace.note(why)
    cert = search_certificate(W, M, max_bases=cfg.search_bases)
    if cert is None:
        raise InternalInconsistency(why)
    return Lifting(cert)


def optimize(W: Subspace, d, c, M, *, trace: Trace | None = None, cfg: OptConfig = OptConfig()):
    """Solve Primal-Dual(W, d, c) for one guess M.

    Returns Optimal, FarkasPrimal, FarkasDual or Lifting.  Feasibility of
    both sides is settled first; loops and coloops are split off before the
    outer loop runs.
    """
    d, c = nx.vec(d), nx.vec(c)
    M = nx.q(M)
    trace = trace if trace is not None else Trace()
    n = W.n
    Wd = W.dual()
    try:
        rp = solve_feasibility(W, d, M, trace=trace, cfg=cfg.feas)
        if not isinstance(rp, Feasible):
            return rp
        rd = solve_feasibility(Wd, c, M, trace=trace, cfg=cfg.feas)
        if isinstance(rd, FarkasPrimal):
            return FarkasDual(rd.s)
        if not isinstance(rd, Feasible):
            return rd
        d0 = rp.x
        loops = set(W.loops())
        coloops = set(Wd.loops())
        R = [i for i in range(n) if i not in loops and i not in coloops]
        if len(R) < n:
            # W = ℝ^L × W_R × {0}^C, so the problem splits coordinate-wise:
            # x_L = 0 against s_L = c_L ≥ 0, x_C = d0_C against s_C = 0
            sub = solve_optimization(fix_coords(W, R), d0[R], c[R], M, trace=trace, cfg=cfg) \
                if R else Optimal(nx.zeros(0), nx.zeros(0))
            if not isinstance(sub, Optimal):
                return sub
            x, s = d0.copy(), c.copy()
            for i in loops:
                x[i] = ZERO
            for i in coloops:
                s[i] = ZERO
            for k, i in enumerate(R):
                x[i], s[i] = sub.x[k], sub.s[k]
            res = Optimal(x, s)
        else:
            res = solve_optimization(W, d0, c, M, trace=trace, cfg=cfg)
    except InternalInconsistency as e:
        return _fallback(W, M, trace, f"internal inconsistency: {e}", cfg)
    if isinstance(res, Optimal):
        x, s = res.x, res.s
        if not (W.contains(x - d) and Wd.contains(s - c) and nx.is_nonneg(x)
                and nx.is_nonneg(s) and nx.dot(x, s) == 0):
            raise InternalInconsistency("assembled pair is not optimal")
    return res

