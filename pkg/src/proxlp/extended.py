"""The symmetric extended system used to warm-start the approximate solver.

Variables are (x, x̲, x̄) on the primal side and (y, s, s̲, s̄) on the dual
side.  In the standard form min ⟨ĉ, x̂⟩, Âx̂ = b̂, x̂ ≥ 0 with

    Â = [[N, -N, 0], [I, -½I, I]],  b̂ = (N d, M̂_D·1),  ĉ = (c, M̂_P·1 - c, 0)

the dual slack ŝ = ĉ - Âᵀŷ reads (s, s̲, s̄), with ŷ = (y, -s̄).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from flint import fmpq, fmpq_mat

from . import numerics as nx
from .errors import NotInterior, ResidualTooLarge
from .numerics import HALF, ONE, ZERO
from .subspace import Subspace

GAMMA = fmpq(1, 13)


@dataclass(frozen=True, eq=False)
class ExtendedSystem:
    W: Subspace
    d: np.ndarray
    c: np.ndarray
    M: fmpq
    eps: fmpq
    M_P: fmpq
    M_D: fmpq
    Mh_P: fmpq
    Mh_D: fmpq
    A: fmpq_mat
    b: np.ndarray
    cost: np.ndarray
    box_P: fmpq  # bound on every primal entry
    box_D: fmpq  # bound on every dual slack entry
    R_P: fmpq
    R_D: fmpq
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.W.n

    @property
    def r(self) -> int:
        return self.W.rank

    @property
    def norm_c1(self) -> fmpq:
        """‖c‖₁, or its stand-in M_P/(2M) when c = 0."""
        v = nx.norm1(self.c)
        return v if v else self.M_P / (2 * self.M)

    @property
    def norm_d1(self) -> fmpq:
        v = nx.norm1(self.d)
        return v if v else self.M_D / (2 * self.M)

    def split(self, v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.n
        return v[:n], v[n:2 * n], v[2 * n:]


def build_extended(W: Subspace, d, c, M, eps, *, M_P=None, M_D=None) -> ExtendedSystem:
    """Assemble the extended system for (W, d, c) under the guess M.

    M_P = 2‖c‖₁M and M_D = 2‖d‖₁M unless overridden; a zero vector gets
    scale 1 so that the system stays nondegenerate.
    """
    d, c = nx.vec(d), nx.vec(c)
    M, eps = nx.q(M), nx.q(eps)
    n, r = W.n, W.rank
    if len(d) != n or len(c) != n:
        raise ValueError("dimension mismatch")
    c1, d1 = nx.norm1(c), nx.norm1(d)
    M_P = nx.q(M_P) if M_P is not None else (2 * c1 * M if c1 else ONE)
    M_D = nx.q(M_D) if M_D is not None else (2 * d1 * M if d1 else ONE)
    Mh_P = M_P - eps * c1
    Mh_D = M_D - eps * d1
    I = nx.identity(n)
    top = nx.hstack(W.N, -W.N, fmpq_mat(r, n))
    bot = nx.hstack(I, I * (-HALF), I)
    A = nx.vstack(top, bot) if r else bot
    b = np.concatenate([nx.mat_vec(W.N, d) if r else nx.zeros(0), nx.ones(n) * Mh_D])
    cost = np.concatenate([c, nx.ones(n) * Mh_P - c, nx.zeros(n)])
    box_P = 2 * n * M_D
    box_D = 2 * n * M_P
    _, s3 = nx.sqrt_bounds(3 * n)
    return ExtendedSystem(W, d, c, M, eps, M_P, M_D, Mh_P, Mh_D, A, b, cost,
                          box_P, box_D, box_P * s3, box_D * s3)


@dataclass(frozen=True)
class StartPoint:
    x: np.ndarray  # (x, x̲, x̄)
    y: np.ndarray  # (y, -s̄)
    s: np.ndarray  # (s, s̲, s̄)

    @property
    def gap(self) -> fmpq:
        return nx.dot(self.x, self.s)


def initial_point(E: ExtendedSystem) -> StartPoint:
    """The near-central start (2/3)M̂_D(1,1,1) + (d,0,-d) and its dual mirror."""
    n, r = E.n, E.r
    tD = fmpq(2, 3) * E.Mh_D
    tP = fmpq(2, 3) * E.Mh_P
    one = nx.ones(n)
    x = np.concatenate([tD * one + E.d, tD * one, tD * one - E.d])
    sb = tP * one - E.c
    s = np.concatenate([tP * one, tP * one - HALF * E.c, sb])
    y = np.concatenate([nx.zeros(r), -sb])
    if not all(v > 0 for v in x) or not all(v > 0 for v in s):
        raise NotInterior("start point is not strictly positive")
    assert nx.is_zero(nx.mat_vec(E.A, x) - E.b)
    assert nx.is_zero(E.cost - nx.mat_tvec(E.A, y) - s)
    ref = fmpq(4, 3) * n * E.Mh_P * E.Mh_D
    g = nx.dot(x, s)
    if not (ref / 2 <= g <= 2 * ref):
        raise NotInterior("start gap far from (4/3)n M_P M_D")
    return StartPoint(x, y, s)


@dataclass(frozen=True)
class ApproxSolution:
    x: np.ndarray
    xl: np.ndarray
    xb: np.ndarray
    s: np.ndarray
    sl: np.ndarray
    sb: np.ndarray
    gap: fmpq            # primal minus dual objective of the raw output
    res_P: fmpq          # ∞-norm residuals of the raw output
    res_D: fmpq
    repaired: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def x_tilde(self) -> np.ndarray:
        return self.x - self.xl

    @property
    def s_tilde(self) -> np.ndarray:
        return self.s - self.sb


def residuals(E: ExtendedSystem, xh, yh, sh) -> tuple[np.ndarray, np.ndarray]:
    rp = nx.mat_vec(E.A, xh) - E.b
    rd = E.cost - nx.mat_tvec(E.A, yh) - sh
    return rp, rd


def _fix_block(Nrep: Subspace, u, v, target, shift, M_full, name):
    """Make N(u - v) = N target exactly by trimming u or v on basis columns."""
    u, v = u.copy(), v.copy()
    if Nrep.rank:
        res = nx.mat_vec(Nrep.N, u - v - target)
        for i, b in enumerate(Nrep.basis):
            if res[i] > 0:
                u[b] -= res[i]
            elif res[i] < 0:
                v[b] += res[i]
        assert Nrep.contains(u - v - target)
    u = u + shift
    v = v + shift
    w = M_full - u + HALF * v
    if any(x < 0 for x in np.concatenate([u, v, w])):
        raise ResidualTooLarge(f"{name} repair left a negative entry")
    return u, v, w


def repair_to_subspace(E: ExtendedSystem, xh, yh, sh, *, gap=None) -> ApproxSolution:
    """Turn a raw solver output into an exactly feasible extended solution.

    Residuals are moved onto x or x̲ (s or s̄) at basis coordinates, then both
    are shifted up by 2γε‖·‖₁/n.  Zero residuals leave the input untouched.
    """
    n = E.n
    xh, yh, sh = nx.vec(xh), nx.vec(yh), nx.vec(sh)
    rp, rd = residuals(E, xh, yh, sh)
    resP, resD = nx.norminf(rp), nx.norminf(rd)
    if gap is None:
        gap = nx.dot(E.cost, xh) - nx.dot(E.b, yh)
    x, xl, xb = E.split(xh)
    s, sl, sb = E.split(sh)
    if resP == 0 and resD == 0:
        return ApproxSolution(x, xl, xb, s, sl, sb, gap, resP, resD, False)
    limP = GAMMA * E.eps * E.norm_d1 / n
    limD = GAMMA * E.eps * E.norm_c1 / n
    if resP > limP or resD > limD:
        raise ResidualTooLarge(f"residuals {float(resP):.3g}/{float(resD):.3g} exceed "
                               f"{float(limP):.3g}/{float(limD):.3g}")
    x, xl, xb = _fix_block(E.W, x, xl, E.d, 2 * limP, E.M_D, "primal")
    s, sb, sl = _fix_block(E.W.dual(), s, sb, E.c, 2 * limD, E.M_P, "dual")
    return ApproxSolution(x, xl, xb, s, sl, sb, gap, resP, resD, True)


def objective_values(E: ExtendedSystem, sol: ApproxSolution) -> tuple[fmpq, fmpq]:
    """Primal and dual objective of a repaired solution, in subspace form."""
    primal = nx.dot(E.c, sol.x - sol.xl) + E.Mh_P * nx.norm1(sol.xl)
    dual = nx.dot(E.d, E.c) - nx.dot(E.d, sol.s - sol.sb) - E.Mh_D * nx.norm1(sol.sb)
    return primal, dual
