"""Near-feasible and near-optimal solves, and the two proximal oracles.

Everything here sits on the extended system: one approximate solve, an exact
repair into the right affine spaces, then circuit-based clean-up steps that
either produce the required bounds or a lifting certificate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from flint import fmpq

from . import numerics as nx
from .approx import DEFAULT_IPM, IPMConfig, SolverRequest, solve_approx
from .circuits import eliminate_with_proximity, hoffman_point
from .errors import InternalInconsistency
from .extended import GAMMA, build_extended, initial_point, objective_values, repair_to_subspace
from .numerics import ONE, ZERO
from .outcomes import (FarkasDual, FarkasPrimal, Lifting, NearFeasible, NearOptimal,
                       ProxFeasPoint, ProxOptPoint, Trace)
from .subspace import (LiftingCertificate, Subspace, fix_coords, lift, min_norm_point,
                       project_coords)


def lambda_set(a, b) -> list[int]:
    """Λ(a, b) = supp(a⁻) ∪ supp(b⁺), in increasing order."""
    return [i for i in range(len(a)) if a[i] < 0 or b[i] > 0]


def _wrap(res):
    return Lifting(res) if isinstance(res, LiftingCertificate) else None


# ------------------------------------------------------------ extended solves

@dataclass(frozen=True)
class ExtendedResult:
    x_tilde: np.ndarray
    s_tilde: np.ndarray
    primal: fmpq
    dual: fmpq
    sol: object


def solve_extended(W: Subspace, d, c, M, eps, need, *, M_P=None, M_D=None,
                   trace: Trace | None = None, cfg: IPMConfig = DEFAULT_IPM) -> ExtendedResult:
    """Solve the extended system for (W, d, c) to a repaired gap of at most ``need``.

    δ is the smallest of four requirements: the generic γε/(n^4.5 M²) rate,
    the gap budget, and the two residual budgets that the repair step can
    absorb.  Norms enter through rational upper bounds.
    """
    E = build_extended(W, d, c, M, eps, M_P=M_P, M_D=M_D)
    st = initial_point(E)
    n = E.n
    _, rn = nx.sqrt_bounds(n)
    _, fA = nx.sqrt_bounds(nx.frobenius_sq(E.A))
    _, nb = nx.norm2_bounds(E.b)
    _, nc = nx.norm2_bounds(E.cost)
    _, nd = nx.norm2_bounds(st.x)
    limP = GAMMA * E.eps * E.norm_d1 / n
    limD = GAMMA * E.eps * E.norm_c1 / n
    # the gap budget is split: half for the solver, half for repair drift
    cands = [GAMMA * E.eps / (n ** 4 * rn * E.M * E.M),
             (need / 2) / (nc * E.R_P + nd * E.R_D),
             limP / (fA * E.R_P + nb),
             limD / (fA * E.R_D + nc)]
    delta = min(cands)
    req = SolverRequest(E.A, E.b, E.cost, st.x, st.y, st.s, delta, E.R_P, E.R_D)
    resp = solve_approx(req, cfg)
    if trace is not None:
        trace.solver_calls += 1
        trace.ipm_iterations += int(resp.stats.get("iterations", 0))
    sol = repair_to_subspace(E, resp.x, resp.y, resp.s)
    primal, dual = objective_values(E, sol)
    if primal - dual > need:
        raise InternalInconsistency(
            f"extended gap {float(primal - dual):.3g} exceeds budget {float(need):.3g}")
    return ExtendedResult(sol.x_tilde, sol.s_tilde, primal, dual, sol)


# ------------------------------------------------------------ near-feasibility

def near_feasible(W: Subspace, d, M, eps, *, trace: Trace | None = None,
                  cfg: IPMConfig = DEFAULT_IPM):
    """NearFeasible(x) with x ∈ W+d, ‖x⁻‖₁ ≤ ε‖d/W‖₁, ‖x‖∞ ≤ 2M‖d/W‖₁,
    or FarkasPrimal, or Lifting."""
    d = nx.vec(d)
    M, eps = nx.q(M), nx.q(eps)
    if not (0 < eps <= nx.HALF):
        raise ValueError("need 0 < eps <= 1/2")
    if nx.is_nonneg(d):
        return NearFeasible(d)
    dp = min_norm_point(W, d)
    if nx.is_zero(dp):
        return NearFeasible(dp)
    n = W.n
    d1 = nx.norm1(dp)
    res = solve_extended(W, dp, nx.zeros(n), M, eps, eps * d1,
                         M_P=ONE, M_D=2 * M * d1, trace=trace, cfg=cfg)
    if res.dual <= 0:
        return NearFeasible(res.x_tilde)
    sh = res.s_tilde  # lies in W⊥ since c = 0
    J = [i for i in range(n) if sh[i] < 0]
    z = eliminate_with_proximity(W.dual(), sh, J, M)
    if isinstance(z, LiftingCertificate):
        return Lifting(z)
    if not nx.is_nonneg(z) or not nx.dot(d, z) < 0:
        raise InternalInconsistency("cleaned dual ray is not a Farkas certificate")
    return FarkasPrimal(z)


# ------------------------------------------------------------ near-optimality

def _case_two(W: Subspace, t, h, scale, M):
    """Run the Case-II proximity system v ∈ W, t - 2M·scale ≤ v ≤ t + h⁻.

    Returns a certificate, or None when a feasible v is found (which would
    contradict near-optimality of t).
    """
    lo = t - 2 * M * scale
    hi = t + nx.neg(h)
    v = hoffman_point(W, t - h, list(lo), list(hi), M)
    if isinstance(v, LiftingCertificate):
        return Lifting(v)
    return None


def near_optimal(W: Subspace, d, c, M, eps, *, trace: Trace | None = None,
                 cfg: IPMConfig = DEFAULT_IPM, _retry: bool = True):
    """Near-feasible, near-optimal (x, s) for Primal-Dual(W, d, c), or a certificate.

    ``d`` and ``c`` are replaced by d/W and c/W⊥ first; the affine spaces do
    not change.
    """
    M, eps = nx.q(M), nx.q(eps)
    if not (0 < eps <= nx.HALF):
        raise ValueError("need 0 < eps <= 1/2")
    Wd = W.dual()
    d = min_norm_point(W, nx.vec(d))
    c = min_norm_point(Wd, nx.vec(c))
    n = W.n
    kw = dict(trace=trace, cfg=cfg)
    if nx.is_zero(d) and nx.is_zero(c):
        return NearOptimal(nx.zeros(n), nx.zeros(n))
    if nx.is_zero(d):
        r = near_feasible(Wd, c, M, eps, **kw)
        if isinstance(r, NearFeasible):
            return NearOptimal(nx.zeros(n), r.x)
        return FarkasDual(r.s) if isinstance(r, FarkasPrimal) else r
    if nx.is_zero(c):
        r = near_feasible(W, d, M, eps, **kw)
        if isinstance(r, NearFeasible):
            return NearOptimal(r.x, nx.zeros(n))
        return r
    rp = near_feasible(W, d, M, eps / 4, **kw)
    if not isinstance(rp, NearFeasible):
        return rp
    rd = near_feasible(Wd, c, M, eps / 4, **kw)
    if isinstance(rd, FarkasPrimal):
        return FarkasDual(rd.s)
    if not isinstance(rd, NearFeasible):
        return rd
    xh, sh = rp.x, rd.x
    d1, c1 = nx.norm1(d), nx.norm1(c)
    res = solve_extended(W, d, c, M, eps, GAMMA * (eps / 2) * M * c1 * d1, **kw)
    xt, st = res.x_tilde, res.s_tilde
    okP = nx.norm1(nx.neg(xt)) <= eps * d1
    okD = nx.norm1(nx.neg(st)) <= eps * c1
    if okP and okD:
        return NearOptimal(xt, st)
    out = _case_two(W, xt, xh, d1, M) if not okP else _case_two(Wd, st, sh, c1, M)
    if out is not None:
        return out
    if _retry:
        if trace is not None:
            trace.note("near_optimal: Case II without certificate, retrying at eps/2")
        return near_optimal(W, d, c, M, eps / 2, trace=trace, cfg=cfg, _retry=False)
    raise InternalInconsistency("Case II produced neither a certificate nor a contradiction")


# ------------------------------------------------------------ checks

def check_near_feasible(W: Subspace, d, M, eps, x) -> dict:
    d, x = nx.vec(d), nx.vec(x)
    M, eps = nx.q(M), nx.q(eps)
    d1 = nx.norm1(min_norm_point(W, d))
    return {"x in W+d": W.contains(x - d),
            "|x-|_1 <= eps |d/W|_1": nx.norm1(nx.neg(x)) <= eps * d1,
            "|x|_inf <= 2M |d/W|_1": d1 == 0 or nx.norminf(x) <= 2 * M * d1}


def check_near_optimal(W: Subspace, d, c, M, eps, x, s) -> dict:
    d, c, x, s = (nx.vec(v) for v in (d, c, x, s))
    M, eps = nx.q(M), nx.q(eps)
    d1 = nx.norm1(min_norm_point(W, d))
    c1 = nx.norm1(min_norm_point(W.dual(), c))
    return {"x in W+d": W.contains(x - d),
            "s in W_perp+c": W.dual().contains(s - c),
            "|x-|_1 <= eps |d/W|_1": nx.norm1(nx.neg(x)) <= eps * d1,
            "|s-|_1 <= eps |c/W_perp|_1": nx.norm1(nx.neg(s)) <= eps * c1,
            "|x o s|_1 <= 5 eps M |d/W|_1 |c/W_perp|_1":
                sum((abs(a * b) for a, b in zip(x, s)), ZERO) <= 5 * eps * M * d1 * c1}


def check_prox_feas(W: Subspace, d, M, eps, x) -> dict:
    d, x = nx.vec(d), nx.vec(x)
    M, eps = nx.q(M), nx.q(eps)
    t = nx.norm1(nx.neg(d))
    return {"x in W+d": W.contains(x - d),
            "|x-d|_inf <= 3M^2 n |d-|_1": nx.norminf(x - d) <= 3 * M * M * W.n * t,
            "|x-|_inf <= eps |d-|_1": nx.norminf(nx.neg(x)) <= eps * t}


def check_prox_opt(W: Subspace, d, c, M, eps, x, s, c_tilde) -> dict:
    d, c, x, s, ct = (nx.vec(v) for v in (d, c, x, s, c_tilde))
    M, eps = nx.q(M), nx.q(eps)
    n = W.n
    tau = nx.norm1(nx.vec(d[lambda_set(d, c)]))
    lam = lambda_set(x, s)
    cw = nx.norm1(min_norm_point(W.dual(), c))
    return {"x in W+d": W.contains(x - d),
            "s in W_perp+c~": W.dual().contains(s - ct),
            "|x_L(x,s)|_inf <= eps tau": nx.norminf(nx.vec(x[lam])) <= eps * tau,
            "|x-d|_inf <= 3M^2 n tau": nx.norminf(x - d) <= 3 * M * M * n * tau,
            "|c-c~|_inf <= (eps/n)|c/W_perp|_1": nx.norminf(c - ct) <= eps * cw / n,
            "c-c~ >= 0": nx.is_nonneg(c - ct),
            "s >= 0": nx.is_nonneg(s)}


def _require(lines: dict, what: str):
    bad = [k for k, v in lines.items() if not v]
    if bad:
        raise InternalInconsistency(f"{what} violates: {', '.join(bad)}")


# ------------------------------------------------------------ oracles

def _pad_farkas(n, I, y) -> FarkasPrimal:
    return FarkasPrimal(nx.scatter(n, I, y))


def prox_feas_oracle(W: Subspace, d, M, eps, *, trace: Trace | None = None,
                     cfg: IPMConfig = DEFAULT_IPM):
    """ProxFeasPoint(x) with x ∈ W+d, ‖x-d‖∞ ≤ 3M²n‖d⁻‖₁, ‖x⁻‖∞ ≤ ε‖d⁻‖₁,
    or FarkasPrimal, or Lifting.

    Coordinates with d_i > 2M‖d⁻‖₁ are projected out before the solve; the
    accuracy passed down is chosen so that ‖x⁻‖₁ ≤ ε‖d⁻‖₁ directly.
    """
    d = nx.vec(d)
    M, eps = nx.q(M), nx.q(eps)
    if trace is not None:
        trace.oracle_calls += 1
        trace.eps_values.append(float(eps))
    if nx.is_nonneg(d):
        return ProxFeasPoint(d)
    n = W.n
    tau = nx.norm1(nx.neg(d))
    I = [i for i in range(n) if d[i] <= 2 * M * tau]
    WI = project_coords(W, I)
    dI = nx.vec(d[I])
    dp1 = nx.norm1(min_norm_point(WI, dI))
    e1 = min(nx.HALF, eps * tau / dp1) if dp1 else nx.HALF
    r = near_feasible(WI, dI, M, e1, trace=trace, cfg=cfg)
    if isinstance(r, FarkasPrimal):
        return _pad_farkas(n, I, r.s)
    if isinstance(r, Lifting):
        return r
    xp = d + lift(W, I, r.x - dI)
    if all(check_prox_feas(W, d, M, eps, xp).values()):
        return ProxFeasPoint(xp)
    lo = -d - nx.neg(xp)
    z = hoffman_point(W, xp - d, list(lo), None, M)
    if isinstance(z, LiftingCertificate):
        return Lifting(z)
    x = d + z
    _require(check_prox_feas(W, d, M, eps, x), "prox-feas output")
    return ProxFeasPoint(x)


def prox_opt_oracle(W: Subspace, d, c, M, eps, *, trace: Trace | None = None,
                    cfg: IPMConfig = DEFAULT_IPM):
    """ProxOptPoint(x, s, c̃) or FarkasPrimal or Lifting; requires c ≥ 0."""
    d, c = nx.vec(d), nx.vec(c)
    M, eps = nx.q(M), nx.q(eps)
    if not nx.is_nonneg(c):
        raise ValueError("prox_opt_oracle needs c >= 0")
    if trace is not None:
        trace.oracle_calls += 1
        trace.eps_values.append(float(eps))
    n = W.n
    tau = nx.norm1(nx.vec(d[lambda_set(d, c)]))
    if tau == 0:
        return ProxOptPoint(d.copy(), c.copy(), c.copy())
    I = [i for i in range(n) if d[i] <= 2 * M * tau]
    eps2 = min(nx.HALF, eps * eps / (28 * M ** 3 * n ** 3))
    WI = project_coords(W, I)
    dI, cI = nx.vec(d[I]), nx.vec(c[I])
    r = near_optimal(WI, dI, cI, M, eps2, trace=trace, cfg=cfg)
    if isinstance(r, FarkasPrimal):
        return _pad_farkas(n, I, r.s)
    if isinstance(r, FarkasDual):
        raise InternalInconsistency("dual side reported infeasible although c >= 0")
    if isinstance(r, Lifting):
        return r
    xh, sh = r.x, r.s
    # primal: a point of W+d agreeing with x̂ on I, pulled towards d
    xp = d + lift(W, I, xh - dI)
    lo = -d - nx.neg(xp)
    hi = [xp[i] - d[i] if c[i] > 0 else None for i in range(n)]
    z = hoffman_point(W, xp - d, list(lo), hi, M)
    if isinstance(z, LiftingCertificate):
        return Lifting(z)
    x = d + z
    # dual: repair ŝ into a nonnegative point using the feasible c
    WdI = fix_coords(W.dual(), I)
    w = hoffman_point(WdI, cI - sh, list(-sh), None, M)
    if isinstance(w, LiftingCertificate):
        return Lifting(w)
    sbar = nx.scatter(n, I, sh + w)
    thr = eps * nx.norm1(min_norm_point(W.dual(), c)) / n
    s = nx.vec([ZERO if v <= thr else v for v in sbar])
    ct = c - sbar + s
    _require(check_prox_opt(W, d, c, M, eps, x, s, ct), "prox-opt output")
    return ProxOptPoint(x, s, ct)
