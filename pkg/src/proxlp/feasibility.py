"""Exact feasibility for x ∈ W+d, x ≥ 0 by recursive stitching."""
from __future__ import annotations

from dataclasses import dataclass

from flint import fmpq

from . import numerics as nx
from .approx import DEFAULT_IPM, IPMConfig
from .errors import InternalInconsistency
from .numerics import DEFAULT_TOL, Tolerance
from .oracles import prox_feas_oracle
from .outcomes import FarkasPrimal, Feasible, Lifting, ProxFeasPoint, Trace
from .subspace import Subspace, check_lift_certificate, closure, lift, min_norm_point, project_coords


@dataclass(frozen=True)
class FeasConfig:
    ipm: IPMConfig = DEFAULT_IPM
    check: bool = True  # re-measure Feas-LP at every level


def feas_lp_lines(W: Subspace, d, M, x, tol: Tolerance | None = None, *,
                  exact: bool = False) -> dict:
    """The three Feas-LP lines, measured in rationals up to the given tolerance."""
    tol = tol or DEFAULT_TOL
    d, x = nx.vec(d), nx.vec(x)
    M = nx.q(M)
    zt, rt = (nx.ZERO, nx.ZERO) if exact else (nx.q(tol.zero_tol), nx.q(tol.residual_tol))
    scale = 1 + max(nx.norminf(x), nx.norminf(d))
    res = nx.norminf(W.residual(x - d)) if W.rank else nx.ZERO
    bound = 16 * M * M * W.n * nx.norm1(nx.neg(d))
    return {"x in W+d": res <= rt * scale,
            "|x-d|_inf <= 16M^2 n |d-|_1": nx.norminf(x - d) <= bound * (1 + 10 * rt) + zt,
            "x >= 0": all(v >= -zt for v in x)}


def verify_feas_lp(W: Subspace, d, M, x, tol: Tolerance | None = None) -> bool:
    return all(feas_lp_lines(W, d, M, x, tol).values())


def solve_feasibility(W: Subspace, d, M, *, trace: Trace | None = None,
                      cfg: FeasConfig = FeasConfig()):
    """Feasible(x) solving Feas-LP(W, d, M), FarkasPrimal(y), or Lifting.

    Loops of W (coordinates unconstrained by W) are split off first: they
    can take any value, so they are set to max(d_i, 0).
    """
    d = nx.vec(d)
    M = nx.q(M)
    if M < 2:
        raise ValueError("need M >= 2")
    if len(d) != W.n:
        raise ValueError("dimension mismatch")
    trace = trace if trace is not None else Trace()
    n = W.n
    loops = set(W.loops())
    if loops:
        R = [i for i in range(n) if i not in loops]
        out = solve_feasibility(project_coords(W, R), d[R], M, trace=trace, cfg=cfg) if R \
            else Feasible(nx.zeros(0))
        if isinstance(out, FarkasPrimal):
            return FarkasPrimal(nx.scatter(n, R, out.s))
        if isinstance(out, Lifting):
            return out
        x = d + lift(W, R, out.x - nx.vec(d[R])) if R else d.copy()
        for i in loops:
            x[i] = max(d[i], nx.ZERO)
        return Feasible(x)
    return _solve(W, d, M, trace, cfg, 0, W.rank)


def _solve(W: Subspace, d0, M, trace: Trace, cfg: FeasConfig, depth: int, m0: int):
    n = W.n
    trace.max_feas_depth = max(trace.max_feas_depth, depth)
    if depth > m0:
        raise InternalInconsistency(f"feasibility recursion depth {depth} exceeds m = {m0}")
    if n == 0:
        return Feasible(nx.zeros(0))
    d = d0
    dp = min_norm_point(W, d)
    if nx.norm1(nx.neg(d)) >= max(M * nx.norm1(dp), nx.norminf(d) / (4 * M * M * n)):
        d = dp
    if nx.is_nonneg(d):
        return Feasible(d)
    eps = fmpq(1) / (2 * M * n) ** 4
    assert eps <= 1 / (16 * M ** 4 * n ** 4)
    r = prox_feas_oracle(W, d, M, eps, trace=trace, cfg=cfg.ipm)
    if not isinstance(r, ProxFeasPoint):
        return r
    x = r.x
    thr = 16 * n * n * M ** 3 * nx.norm1(nx.neg(x))
    K = [i for i in range(n) if x[i] >= thr]
    if not K:
        raise InternalInconsistency("large-index set K is empty")
    clK = closure(W, K)
    Ks, cs = set(K), set(clK)
    J = [i for i in clK if i not in Ks]
    I = [i for i in range(n) if i not in cs]
    if I:
        WI = project_coords(W, I)
        if WI.loops():
            raise InternalInconsistency("recursion created a loop")
        if WI.rank >= W.rank:
            raise InternalInconsistency("dim W⊥ did not decrease")
        child = _solve(WI, nx.vec(x[I]), M, trace, cfg, depth + 1, m0)
        if isinstance(child, FarkasPrimal):
            y = nx.scatter(n, I, child.s)
            return FarkasPrimal(y)
        if isinstance(child, Lifting):
            return child
        xs = child.x
    else:
        xs = nx.zeros(0)
    IJ = I + J
    p = nx.vec(list(xs - nx.vec(x[I])) + [max(-x[j], nx.ZERO) for j in J])
    if nx.is_zero(p):
        out = x
    else:
        w = lift(W, IJ, p)
        cert = check_lift_certificate(W, IJ, p, M, origin="feasibility stitch", z=w)
        if cert is not None:
            return Lifting(cert)
        out = x + w
    if cfg.check and not all(feas_lp_lines(W, d0, M, out, exact=True).values()):
        raise InternalInconsistency("stitched point violates Feas-LP")
    return Feasible(out)
