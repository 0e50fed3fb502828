"""Circuits, conformal decompositions and constructive proximity.

All arithmetic is exact.  Infinite bounds are passed as ``None``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from flint import fmpq

from . import numerics as nx
from .errors import InfeasibleBounds, NotInSubspace
from .numerics import ZERO, ONE
from .subspace import LiftingCertificate, Subspace, certificate_from_support


@dataclass(frozen=True)
class Circuit:
    support: tuple[int, ...]
    g: np.ndarray  # max |g_i| = 1


@dataclass(frozen=True)
class ConicDecomposition:
    """y - z = Σ α_j y^(j) with Σ α_j = 1 (terms empty when y_J = 0)."""
    terms: list  # of (alpha, generator)
    z: np.ndarray


def find_circuit_in_support(W: Subspace, S) -> np.ndarray | None:
    """A circuit vector of W supported inside S, or None if S is independent.

    Pivoting on the columns of S in order, the first column spanned by its
    predecessors gives a fundamental circuit.
    """
    S = list(S)
    if not S:
        return None
    if W.rank == 0:
        # every column is a loop
        return nx.unit(W.n, S[0])
    R, piv = nx.rref(nx.cols(W.N, S))
    ps = set(piv)
    free = [k for k in range(len(S)) if k not in ps]
    if not free:
        return None
    j = free[0]
    t = nx.table(R)
    g = nx.zeros(W.n)
    g[S[j]] = ONE
    for r, k in enumerate(piv):
        if k < j:
            g[S[k]] = -t[r][j]
    return g


def _normalize(g):
    return g / nx.norminf(g)


def sign_consistent_decompose(W: Subspace, z) -> list[tuple[fmpq, Circuit]]:
    """Write z ∈ W as Σ λ_k g^k with conformal circuits g^k (at most n terms)."""
    z = nx.vec(z)
    if not W.contains(z):
        raise NotInSubspace("z ∉ W")
    out = []
    w = z.copy()
    while not nx.is_zero(w):
        x = w.copy()
        while True:
            S = nx.support(x)
            g = find_circuit_in_support(W, S)
            assert g is not None, "nonzero kernel vector with independent support"
            if len(nx.support(g)) == len(S):
                h = x
                break
            if not any(g[i] * x[i] > 0 for i in S):
                g = -g
            t = min(x[i] / g[i] for i in S if g[i] * x[i] > 0)
            x = x - t * g
        g = _normalize(h)
        if g[nx.support(g)[0]] * w[nx.support(g)[0]] < 0:
            g = -g
        lam = min(w[i] / g[i] for i in nx.support(g))
        w = w - lam * g
        out.append((lam, Circuit(tuple(nx.support(g)), g)))
    assert len(out) <= W.n
    return out


def eliminate_on(W: Subspace, y, J) -> ConicDecomposition:
    """Zero out y_J while staying sign-consistent with y.

    Each generator y' keeps y'_J = y_J and is supported on J plus an
    independent set of columns, so it has minimal support.  The basis is
    chosen greedily by descending |ŷ_i| (ties by index).
    """
    y = nx.vec(y)
    n = W.n
    if not W.contains(y):
        raise NotInSubspace("y ∉ W")
    J = sorted(set(int(j) for j in J))
    yJ = nx.vec(y[J]) if J else nx.zeros(0)
    if nx.is_zero(yJ):
        return ConicDecomposition([], y.copy())
    Js = set(J)
    T = {i for i in range(n) if i not in Js and y[i] == 0}
    rhs = -nx.mat_vec(nx.cols(W.N, J), yJ) if W.rank else nx.zeros(0)
    yh = y.copy()
    ah = ONE
    terms = []
    for _ in range(n + 1):
        F = [i for i in range(n) if i not in Js and i not in T]
        F.sort(key=lambda i: (-abs(yh[i]), i))
        yp = nx.zeros(n)
        for j, v in zip(J, yJ):
            yp[j] = v
        B = []
        if W.rank and F:
            R, piv = nx.rref(nx.hstack(nx.cols(W.N, F), nx.column(rhs)))
            t = nx.table(R)
            assert all(p < len(F) for p in piv), "inconsistent elimination system"
            for r, p in enumerate(piv):
                yp[F[p]] = t[r][len(F)]
                B.append(F[p])
        alpha = ah
        for b in B:
            if yp[b] != 0 and yh[b] / yp[b] > 0:
                alpha = min(alpha, yh[b] / yp[b])
        yh = yh - alpha * yp
        terms.append((alpha, yp))
        if alpha == ah:
            for j in J:
                yh[j] = ZERO  # exact already; keeps the invariant explicit
            assert nx.is_zero(nx.vec(yh[J]))
            return ConicDecomposition(terms, yh)
        ah = ah - alpha
        new = {i for i in F if yh[i] == 0}
        assert new, "zeroed set did not grow"
        T |= new
    raise AssertionError("elimination exceeded n iterations")


def eliminate_with_proximity(W: Subspace, y, J, M) -> np.ndarray | LiftingCertificate:
    """z as in eliminate_on with ‖z - y‖∞ ≤ M‖y_J‖₁, or a lifting certificate."""
    y = nx.vec(y)
    J = sorted(set(int(j) for j in J))
    dec = eliminate_on(W, y, J)
    if not dec.terms:
        return dec.z
    bound = nx.q(M) * nx.norm1(nx.vec(y[J]))
    for _, g in dec.terms:
        if nx.norminf(g) > bound:
            return certificate_from_support(W, g, J, M, origin="elimination")
    return dec.z


def _bound(v):
    if v is None:
        return None
    if isinstance(v, float) and np.isinf(v):
        return None
    return nx.q(v)


def _bounds(b, n):
    if b is None:
        return [None] * n
    b = [_bound(v) for v in b]
    if len(b) != n:
        raise ValueError("bound length mismatch")
    return b


def _lower_tight(l, v):
    return l is not None and l > 0 and v == l


def _upper_tight(u, v):
    return u is not None and u < 0 and v == u


def hoffman_point(W: Subspace, x, lo, hi, M) -> np.ndarray | LiftingCertificate:
    """y ∈ W with lo ≤ y ≤ hi and ‖y‖∞ ≤ M‖lo⁺ + hi⁻‖₁, or a lifting certificate.

    ``x`` must be a feasible point of the same system.
    """
    x = nx.vec(x)
    n = W.n
    lo, hi = _bounds(lo, n), _bounds(hi, n)
    for i in range(n):
        if (lo[i] is not None and x[i] < lo[i]) or (hi[i] is not None and x[i] > hi[i]):
            raise InfeasibleBounds(f"x violates bounds at {i}")
    if not W.contains(x):
        raise NotInSubspace("x ∉ W")
    P = [i for i in range(n) if (lo[i] is not None and lo[i] > 0)
         or (hi[i] is not None and hi[i] < 0)]
    if not P:
        return nx.zeros(n)
    Ps = set(P)
    Mq = nx.q(M)
    target = sum((lo[i] if lo[i] is not None and lo[i] > 0 else -hi[i]) for i in P)

    def tight(y):
        return [i for i in range(n)
                if (i in Ps and (_lower_tight(lo[i], y[i]) or _upper_tight(hi[i], y[i])))
                or (i not in Ps and y[i] == 0)]

    y = x.copy()
    for _ in range(n + 1):
        J = tight(y)
        dec = eliminate_on(W, y, J)
        z = dec.z
        if nx.is_zero(z):
            # y is now the convex combination of the generators
            bound = Mq * nx.norm1(nx.vec(y[J]))
            if nx.norminf(y) <= Mq * target:
                return y
            for _, g in dec.terms:
                if nx.norminf(g) > bound:
                    return certificate_from_support(W, g, J, M, origin="proximity")
            raise AssertionError("generator bound holds but y exceeds it")
        Js = set(J)
        alpha = None
        for i in range(n):
            if i in Js or z[i] == 0:
                continue
            cands = [y[i] / z[i]]
            if lo[i] is not None and lo[i] > 0:
                cands.append((y[i] - lo[i]) / z[i])
            if hi[i] is not None and hi[i] < 0:
                cands.append((y[i] - hi[i]) / z[i])
            a = min(c for c in cands if c >= 0)
            alpha = a if alpha is None else min(alpha, a)
        assert alpha is not None and alpha > 0
        y = y - alpha * z
    raise AssertionError("proximity loop exceeded n iterations")
