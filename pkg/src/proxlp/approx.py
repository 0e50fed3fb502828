"""Approximate LP solving behind a checked contract.

For min ⟨c,x⟩, Ax = b, x ≥ 0 with a feasible interior start, a response
(x, y, s) with x, s ≥ 0 must satisfy

  (i)   ⟨c,x⟩ - ⟨b,y⟩ ≤ δ(‖c‖₂R_P + ‖d‖₂R_D)
  (ii)  ‖Ax - b‖₂     ≤ δ(‖A‖_F R_P + ‖b‖₂)
  (iii) ‖c - Aᵀy - s‖₂ ≤ δ(‖A‖_F R_D + ‖c‖₂)

where d is the start point.  The built-in solver runs a predictor-corrector
path-following method in double precision, recovers an exact optimal pair
from the limiting partition, and returns a convex combination of that pair
and the start point whose gap is an exact power-of-two fraction of the
starting gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from flint import fmpq, fmpq_mat

from . import numerics as nx
from .errors import (ContractViolation, InconsistentProjection, IterationLimit,
                     NumericalBreakdown)
from .numerics import ONE, ZERO


@dataclass(frozen=True)
class SolverRequest:
    A: fmpq_mat
    b: np.ndarray
    c: np.ndarray
    x0: np.ndarray
    y0: np.ndarray
    s0: np.ndarray
    delta: fmpq
    R_P: fmpq
    R_D: fmpq

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not all(v > 0 for v in self.x0) or not all(v > 0 for v in self.s0):
            raise ValueError("start point must be strictly positive")

    @property
    def d(self) -> np.ndarray:
        return self.x0


@dataclass(frozen=True)
class SolverResponse:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    gap: fmpq
    res_primal: float
    res_dual: float
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class IPMConfig:
    max_iter: int = 100_000
    theta_pred: float = 0.5
    theta_corr: float = 0.25
    grid_bits: int = 40
    stages: tuple = (1e-8, 1e-10, 1e-12, 1e-14)
    simplex_fallback: bool = True


DEFAULT_IPM = IPMConfig()


# ------------------------------------------------------------ contract

@dataclass
class ContractReport:
    ok: bool
    lines: dict


def gap_target(req: SolverRequest) -> fmpq:
    """A rational lower bound on δ(‖c‖₂R_P + ‖d‖₂R_D)."""
    cl, _ = nx.norm2_bounds(req.c)
    dl, _ = nx.norm2_bounds(req.d)
    return req.delta * (cl * req.R_P + dl * req.R_D)


def check_contract(req: SolverRequest, x, y, s) -> ContractReport:
    """Re-measure the contract from scratch in exact arithmetic."""
    x, y, s = nx.vec(x), nx.vec(y), nx.vec(s)
    lines = {}
    lines["x >= 0"] = nx.is_nonneg(x)
    lines["s >= 0"] = nx.is_nonneg(s)
    gap = nx.dot(req.c, x) - nx.dot(req.b, y)
    lines["(i) gap"] = gap <= gap_target(req)
    fl, _ = nx.sqrt_bounds(nx.frobenius_sq(req.A))
    bl, _ = nx.norm2_bounds(req.b)
    cl, _ = nx.norm2_bounds(req.c)
    rp = nx.norm2sq(nx.mat_vec(req.A, x) - req.b)
    rd = nx.norm2sq(req.c - nx.mat_tvec(req.A, y) - s)
    lines["(ii) primal residual"] = rp <= (req.delta * (fl * req.R_P + bl)) ** 2
    lines["(iii) dual residual"] = rd <= (req.delta * (fl * req.R_D + cl)) ** 2
    return ContractReport(all(lines.values()), lines)


# ------------------------------------------------------------ float IPM

def _centrality(x, s):
    mu = x @ s / len(x)
    return float(np.linalg.norm(x * s / mu - 1.0)), mu


def _newton(A, b, c, x, y, s, sigma):
    mu = x @ s / len(x)
    rb = b - A @ x
    rc = c - A.T @ y - s
    rxs = sigma * mu - x * s
    dd = x / s
    K = (A * dd) @ A.T
    rhs = rb + A @ (dd * rc) - A @ (rxs / s)
    try:
        dy = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        dy = np.linalg.lstsq(K, rhs, rcond=None)[0]
    ds = rc - A.T @ dy
    dx = (rxs - x * ds) / s
    if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(ds))):
        raise NumericalBreakdown("non-finite Newton direction")
    return dx, dy, ds


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return min(1.0, float(np.min(-v[neg] / dv[neg])))


def _in_nbhd(x, s, theta):
    if np.any(x <= 0) or np.any(s <= 0):
        return False
    return _centrality(x, s)[0] <= theta


class _IPM:
    def __init__(self, A, b, c, x, y, s, cfg):
        self.A, self.b, self.c = A, b, c
        self.x, self.y, self.s = x, y, s
        self.cfg = cfg
        self.iters = 0
        self.N = len(x)

    def gap(self):
        return float(self.x @ self.s)

    def _take(self, dx, dy, ds, a):
        self.x = self.x + a * dx
        self.y = self.y + a * dy
        self.s = self.s + a * ds

    def center(self, limit=60):
        for _ in range(limit):
            if _in_nbhd(self.x, self.s, self.cfg.theta_corr):
                return
            dx, dy, ds = _newton(self.A, self.b, self.c, self.x, self.y, self.s, 1.0)
            a = min(1.0, 0.95 * min(_max_step(self.x, dx), _max_step(self.s, ds)))
            self._take(dx, dy, ds, a)
            self.iters += 1

    def step(self):
        g0 = self.gap()
        dx, dy, ds = _newton(self.A, self.b, self.c, self.x, self.y, self.s, 0.0)
        amax = 0.9999 * min(_max_step(self.x, dx), _max_step(self.s, ds))
        lo, hi = 0.0, amax
        if _in_nbhd(self.x + hi * dx, self.s + hi * ds, self.cfg.theta_pred):
            lo = hi
        else:
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if _in_nbhd(self.x + mid * dx, self.s + mid * ds, self.cfg.theta_pred):
                    lo = mid
                else:
                    hi = mid
        short = 1.0 / (8.0 * math.sqrt(self.N))
        if lo >= short:
            self._take(dx, dy, ds, lo)
        else:
            dx, dy, ds = _newton(self.A, self.b, self.c, self.x, self.y, self.s, 1.0 - short)
            a = min(1.0, 0.9999 * min(_max_step(self.x, dx), _max_step(self.s, ds)))
            self._take(dx, dy, ds, a)
        dx, dy, ds = _newton(self.A, self.b, self.c, self.x, self.y, self.s, 1.0)
        a = min(1.0, 0.9999 * min(_max_step(self.x, dx), _max_step(self.s, ds)))
        self._take(dx, dy, ds, a)
        self.iters += 2
        g1 = self.gap()
        if not (g1 <= g0 * (1 + 1e-6) + 1e-300):
            raise NumericalBreakdown("duality gap increased")
        if np.any(self.x <= 0) or np.any(self.s <= 0):
            raise NumericalBreakdown("iterate left the positive orthant")
        return g1


# ------------------------------------------------------------ exact recovery

def _finish(A: fmpq_mat, b, c, xf, yf, sP, sD, P, bits):
    """Exact optimal pair with supp(x) ⊆ P and s_P = 0, or None."""
    n = A.ncols()
    Pl = sorted(P)
    if not Pl:
        return None
    x = nx.zeros(n)
    for j in Pl:
        x[j] = sP * nx.round_to_grid(float(xf[j]), bits)
    AP = nx.cols(A, Pl)
    try:
        dx = nx.solve_min_norm(AP, b - nx.mat_vec(AP, x[Pl]))
    except InconsistentProjection:
        return None
    for j, v in zip(Pl, dx):
        x[j] += v
    if not nx.is_nonneg(x):
        return None
    y = nx.vec([sD * nx.round_to_grid(float(v), bits) for v in yf])
    cP = nx.vec(c[Pl])
    try:
        dy = nx.solve_min_norm(AP.transpose(), cP - nx.mat_tvec(AP, y))
    except InconsistentProjection:
        return None
    y = y + dy
    s = c - nx.mat_tvec(A, y)
    for j in Pl:
        if s[j] != 0:
            return None
    if not nx.is_nonneg(s):
        return None
    return x, y, s


def exact_simplex(A: fmpq_mat, b, c):
    """Bland-rule two-phase simplex in exact arithmetic; returns (x, y, s).

    Requires both sides feasible.  Used when the float path cannot identify
    the optimal partition.
    """
    m, n = A.nrows(), A.ncols()
    t = nx.table(A)
    b = nx.vec(b)
    c = nx.vec(c)
    flip = [bi < 0 for bi in b]
    T = []
    for i in range(m):
        sg = -1 if flip[i] else 1
        T.append([sg * v for v in t[i]] + [ONE if k == i else ZERO for k in range(m)] + [sg * b[i]])
    basis = [n + i for i in range(m)]

    def pivot(r, j):
        inv = 1 / T[r][j]
        T[r] = [v * inv for v in T[r]]
        for i in range(m):
            if i != r and T[i][j] != 0:
                f = T[i][j]
                T[i] = [a - f * bb for a, bb in zip(T[i], T[r])]
        basis[r] = j

    def run(cost, allowed):
        while True:
            enter = None
            for j in allowed:
                if j in basis:
                    continue
                rc = cost[j] - sum((cost[basis[i]] * T[i][j] for i in range(m)), ZERO)
                if rc < 0:
                    enter = j
                    break
            if enter is None:
                return True
            rows = [i for i in range(m) if T[i][enter] > 0]
            if not rows:
                return False
            r = min(rows, key=lambda i: (T[i][-1] / T[i][enter], basis[i]))
            pivot(r, enter)

    c1 = [ZERO] * n + [ONE] * m
    run(c1, range(n + m))
    if sum((c1[basis[i]] * T[i][-1] for i in range(m)), ZERO) != 0:
        raise NumericalBreakdown("extended system reported infeasible")
    for r in range(m):
        if basis[r] >= n:
            j = next((j for j in range(n) if T[r][j] != 0 and j not in basis), None)
            if j is not None:
                pivot(r, j)
    c2 = list(c) + [ZERO] * m
    if not run(c2, range(n)):
        raise NumericalBreakdown("extended system reported unbounded")
    yp = [sum((c2[basis[i]] * T[i][n + k] for i in range(m)), ZERO) for k in range(m)]
    y = nx.vec([-v if f else v for v, f in zip(yp, flip)])
    x = nx.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    s = c - nx.mat_tvec(A, y)
    assert nx.is_nonneg(s) and nx.is_zero(nx.mat_vec(A, x) - b)
    return x, y, s


def _optimal_pair(req: SolverRequest, cfg: IPMConfig):
    A = req.A
    sP = nx.norminf(req.x0)
    sD = max(nx.norminf(req.s0), nx.norminf(req.y0)) if len(req.y0) else nx.norminf(req.s0)
    fP, fD = float(sP), float(sD)
    Af = np.array([[float(v) for v in r] for r in nx.table(A)])
    bf = np.array([float(v) for v in req.b]) / fP
    cf = np.array([float(v) for v in req.c]) / fD
    x = np.array([float(v) for v in req.x0]) / fP
    y = np.array([float(v) for v in req.y0]) / fD
    s = np.array([float(v) for v in req.s0]) / fD
    ipm = _IPM(Af, bf, cf, x, y, s, cfg)
    stats = {"iterations": 0, "path": "ipm"}
    try:
        ipm.center()
        g0 = ipm.gap()
        stage = 0
        stall = 0
        while ipm.iters < cfg.max_iter and stage < len(cfg.stages):
            g_prev = ipm.gap()
            g = ipm.step()
            stall = stall + 1 if g > 0.5 * g_prev else 0
            if g <= cfg.stages[stage] * g0 or stall >= 8:
                stage += 1
                stall = 0
                out = _try_partitions(req, ipm, sP, sD, cfg)
                if out is not None:
                    stats["iterations"] = ipm.iters
                    return out, stats
        if ipm.iters >= cfg.max_iter:
            raise IterationLimit("IPM iteration limit", best=(ipm.x, ipm.y, ipm.s))
    except (NumericalBreakdown, IterationLimit):
        if not cfg.simplex_fallback:
            raise
    stats["iterations"] = ipm.iters
    if not cfg.simplex_fallback:
        raise NumericalBreakdown("could not recover an exact optimal pair")
    stats["path"] = "simplex"
    return exact_simplex(req.A, req.b, req.c), stats


def _try_partitions(req, ipm, sP, sD, cfg):
    ratio = ipm.x / ipm.s
    seen = set()
    for tau in (1.0, 1e-2, 1e2, 1e-4, 1e4):
        P = frozenset(int(j) for j in np.nonzero(ratio >= tau)[0])
        if P in seen:
            continue
        seen.add(P)
        out = _finish(req.A, req.b, req.c, ipm.x, ipm.y, sP, sD, P, cfg.grid_bits)
        if out is not None:
            return out
    return None


def builtin_solve(req: SolverRequest, cfg: IPMConfig = DEFAULT_IPM) -> SolverResponse:
    target = gap_target(req)
    gap0 = nx.dot(req.c, req.x0) - nx.dot(req.b, req.y0)
    if gap0 <= target:
        return SolverResponse(req.x0, req.y0, req.s0, gap0, 0.0, 0.0,
                              {"iterations": 0, "path": "start", "theta": 1.0})
    (xs, ys, ss), stats = _optimal_pair(req, cfg)
    gs = nx.dot(req.c, xs) - nx.dot(req.b, ys)
    assert gs == 0, "recovered pair is not complementary"
    theta = nx.pow2_floor(min(ONE, (target / 2) / gap0))
    x = theta * req.x0 + (1 - theta) * xs
    y = theta * req.y0 + (1 - theta) * ys
    s = theta * req.s0 + (1 - theta) * ss
    gap = nx.dot(req.c, x) - nx.dot(req.b, y)
    assert gap == theta * gap0
    stats["theta"] = float(theta)
    return SolverResponse(x, y, s, gap, 0.0, 0.0, stats)


# ------------------------------------------------------------ registry

Adapter = Callable[[SolverRequest], object]
_ADAPTER: Adapter | None = None


def register_external_solver(adapter: Adapter | None) -> None:
    """Route subsequent solves to ``adapter`` (None restores the built-in)."""
    global _ADAPTER
    _ADAPTER = None if adapter is builtin_solve else adapter


def solve_approx(req: SolverRequest, cfg: IPMConfig = DEFAULT_IPM) -> SolverResponse:
    """Solve through the registered adapter and validate the contract."""
    if _ADAPTER is None:
        resp = builtin_solve(req, cfg)
    else:
        raw = _ADAPTER(req)
        x, y, s = (nx.vec(v) for v in (raw.x, raw.y, raw.s))
        gap = nx.dot(req.c, x) - nx.dot(req.b, y)
        rp = float(nx.norm2sq(nx.mat_vec(req.A, x) - req.b)) ** 0.5
        rd = float(nx.norm2sq(req.c - nx.mat_tvec(req.A, y) - s)) ** 0.5
        resp = SolverResponse(x, y, s, gap, rp, rd, dict(getattr(raw, "stats", {}) or {}))
    rep = check_contract(req, resp.x, resp.y, resp.s)
    if not rep.ok:
        bad = [k for k, v in rep.lines.items() if not v]
        raise ContractViolation(f"solver response violates: {', '.join(bad)}")
    return resp
