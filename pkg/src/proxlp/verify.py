"""Ground-truth oracles in pure ``fractions.Fraction`` arithmetic.

Nothing here calls into the solver pipeline's linear algebra, so results can
be used to check it.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import TooLarge

KAPPA_GUARD = 20
CIRCUIT_GUARD = 14
CHIBAR_GUARD = 12


def F(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))  # exact binary value
    if isinstance(x, str):
        return Fraction(x)
    # flint fmpq and friends
    if hasattr(x, "p") and hasattr(x, "q"):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


def fvec(v) -> list[Fraction]:
    return [F(x) for x in v]


def fmat(A) -> list[list[Fraction]]:
    if hasattr(A, "table") and hasattr(A, "nrows"):
        return [[F(x) for x in r] for r in A.table()]
    return [[F(x) for x in r] for r in A]


def frref(A: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form with zero rows removed."""
    R = [r[:] for r in A]
    if not R:
        return [], []
    m, n = len(R), len(R[0])
    piv = []
    row = 0
    for col in range(n):
        p = next((i for i in range(row, m) if R[i][col] != 0), None)
        if p is None:
            continue
        R[row], R[p] = R[p], R[row]
        inv = 1 / R[row][col]
        R[row] = [x * inv for x in R[row]]
        for i in range(m):
            if i != row and R[i][col] != 0:
                f = R[i][col]
                R[i] = [a - f * b for a, b in zip(R[i], R[row])]
        piv.append(col)
        row += 1
        if row == m:
            break
    return R[:row], piv


def kernel_basis(A: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    R, piv = frref(A)
    ps = set(piv)
    out = []
    for j in range(n):
        if j in ps:
            continue
        v = [Fraction(0)] * n
        v[j] = Fraction(1)
        for r, p in enumerate(piv):
            v[p] = -R[r][j]
        out.append(v)
    return out


def _matvec(A, x):
    return [sum((a * b for a, b in zip(r, x)), Fraction(0)) for r in A]


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


# ---------------------------------------------------------------- simplex

@dataclass
class GroundTruth:
    status: str  # "optimal" | "infeasible" | "unbounded"
    opt: Fraction | None = None
    x: list[Fraction] | None = None
    y: list[Fraction] | None = None
    basis: tuple[int, ...] | None = None
    farkas_y: list[Fraction] | None = None  # Aᵀy ≥ 0, ⟨b,y⟩ < 0
    ray: list[Fraction] | None = None       # Ar = 0, r ≥ 0, ⟨c,r⟩ < 0

    def dual_slack(self, A, c):
        return [F(ci) - _dot(col, self.y) for ci, col in zip(c, zip(*A))]


def rational_simplex(A, b, c) -> GroundTruth:
    """Two-phase simplex with Bland's rule for min ⟨c,x⟩, Ax = b, x ≥ 0."""
    A, b, c = fmat(A), fvec(b), fvec(c)
    m = len(A)
    n = len(c)
    if m == 0:
        if any(ci < 0 for ci in c):
            j = next(i for i, ci in enumerate(c) if ci < 0)
            r = [Fraction(0)] * n
            r[j] = Fraction(1)
            return GroundTruth("unbounded", ray=r)
        return GroundTruth("optimal", Fraction(0), [Fraction(0)] * n, [], ())
    flip = [bi < 0 for bi in b]
    T = []
    for i in range(m):
        s = -1 if flip[i] else 1
        row = [s * a for a in A[i]] + [Fraction(int(k == i)) for k in range(m)] + [s * b[i]]
        T.append(row)
    basis = [n + i for i in range(m)]
    N = n + m

    def pivot(r, j):
        inv = 1 / T[r][j]
        T[r] = [x * inv for x in T[r]]
        for i in range(m):
            if i != r and T[i][j] != 0:
                f = T[i][j]
                T[i] = [a - f * bb for a, bb in zip(T[i], T[r])]
        basis[r] = j

    def duals(cost):
        # y = c_B A_B⁻¹; A_B⁻¹ sits in the artificial columns
        return [sum((cost[basis[i]] * T[i][n + k] for i in range(m)), Fraction(0)) for k in range(m)]

    def run(cost, allowed):
        while True:
            y = duals(cost)
            enter = None
            for j in allowed:
                if j in basis:
                    continue
                col = [T[i][j] for i in range(m)]
                # reduced cost via the current tableau
                rc = cost[j] - sum((cost[basis[i]] * col[i] for i in range(m)), Fraction(0))
                if rc < 0:
                    enter = j
                    break
            if enter is None:
                return "optimal", y
            rows = [i for i in range(m) if T[i][enter] > 0]
            if not rows:
                return "unbounded", enter
            best = min(rows, key=lambda i: (T[i][-1] / T[i][enter], basis[i]))
            pivot(best, enter)

    c1 = [Fraction(0)] * n + [Fraction(1)] * m
    run(c1, list(range(N)))
    val = sum((c1[basis[i]] * T[i][-1] for i in range(m)), Fraction(0))
    if val > 0:
        yp = duals(c1)
        y = [(yi if f else -yi) for yi, f in zip(yp, flip)]
        return GroundTruth("infeasible", farkas_y=y)
    # drive artificials out where possible
    for r in range(m):
        if basis[r] >= n:
            j = next((j for j in range(n) if T[r][j] != 0 and j not in basis), None)
            if j is not None:
                pivot(r, j)
    c2 = c + [Fraction(0)] * m
    status, info = run(c2, list(range(n)))
    if status == "unbounded":
        j = info
        r = [Fraction(0)] * n
        r[j] = Fraction(1)
        for i in range(m):
            if basis[i] < n:
                r[basis[i]] = -T[i][j]
        return GroundTruth("unbounded", ray=r)
    yp = info
    y = [(-yi if f else yi) for yi, f in zip(yp, flip)]
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    opt = _dot(c, x)
    B = tuple(sorted(j for j in basis if j < n))
    return GroundTruth("optimal", opt, x, y, B)


# ---------------------------------------------------------- condition numbers

def _row_basis(A):
    R, _ = frref(fmat(A))
    return R


def _bases_tables(A, limit: int):
    """Yield (basis, T) with T = A_B⁻¹A for every basis, via basis-graph search."""
    R = _row_basis(A)
    if not R:
        return
    m, n = len(R), len(R[0])
    if n > limit:
        raise TooLarge(f"n={n} exceeds enumeration guard {limit}")
    _, piv = frref(R)
    T0 = [r[:] for r in R]
    start = tuple(piv)
    seen = {frozenset(start)}
    queue = deque([(start, T0)])
    while queue:
        B, T = queue.popleft()
        yield B, T
        for r in range(m):
            for j in range(n):
                if j in B or T[r][j] == 0:
                    continue
                nb = B[:r] + (j,) + B[r + 1:]
                key = frozenset(nb)
                if key in seen:
                    continue
                seen.add(key)
                inv = 1 / T[r][j]
                Tn = [row[:] for row in T]
                Tn[r] = [x * inv for x in T[r]]
                for i in range(m):
                    if i != r and Tn[i][j] != 0:
                        f = Tn[i][j]
                        Tn[i] = [a - f * b for a, b in zip(Tn[i], Tn[r])]
                queue.append((nb, Tn))


def kappa_by_bases(A) -> Fraction:
    """max over bases B of max |(A_B⁻¹A)_ij|."""
    best = Fraction(1)
    for _, T in _bases_tables(A, KAPPA_GUARD):
        for r in T:
            for x in r:
                if abs(x) > best:
                    best = abs(x)
    return best


def circuits(A) -> list[list[Fraction]]:
    """All circuit vectors (one per support) by subset enumeration."""
    R = _row_basis(A)
    n = len(fmat(A)[0]) if fmat(A) else 0
    if n > CIRCUIT_GUARD:
        raise TooLarge(f"n={n} exceeds circuit enumeration guard {CIRCUIT_GUARD}")
    rank = len(R)
    out = []
    for k in range(1, rank + 2):
        for S in itertools.combinations(range(n), k):
            sub = [[r[j] for j in S] for r in R]
            if R:
                K = kernel_basis(sub, k)
            else:
                K = [[Fraction(int(a == b)) for a in range(k)] for b in range(k)]
            if len(K) != 1 or any(x == 0 for x in K[0]):
                continue
            v = [Fraction(0)] * n
            for j, x in zip(S, K[0]):
                v[j] = x
            out.append(v)
    return out


def kappa_by_circuits(A) -> Fraction:
    best = Fraction(1)
    for g in circuits(A):
        nz = [abs(x) for x in g if x != 0]
        best = max(best, max(nz) / min(nz))
    return best


def brute_kappa(A, *, route: str = "bases") -> Fraction:
    """Circuit imbalance of ker(A).  ``route`` is "bases" or "circuits"."""
    A = fmat(A)
    if route == "circuits":
        return kappa_by_circuits(A)
    return kappa_by_bases(A)


def orthogonal_complement_matrix(A) -> list[list[Fraction]]:
    """A matrix whose kernel is the row space of A."""
    A = fmat(A)
    n = len(A[0])
    K = kernel_basis(A, n)
    return K if K else [[Fraction(0)] * n]


def brute_chibar(A) -> float:
    """max over bases of ‖A_B⁻¹A‖₂ (spectral norms in double precision)."""
    best = 1.0
    for _, T in _bases_tables(A, CHIBAR_GUARD):
        M = np.array([[float(x) for x in r] for r in T])
        best = max(best, float(np.linalg.norm(M, 2)))
    return best


@dataclass
class KappaChiBand:
    kappa: Fraction
    chibar: float
    n: int
    lower_exact: bool   # exists basis row with ‖row‖₂² ≥ κ² + 1, so χ̄² ≥ κ² + 1
    upper_exact: bool   # every basis has ‖A_B⁻¹A‖_F² ≤ n²κ², so χ̄ ≤ nκ
    float_ok: bool


def kappa_chibar_band(A) -> KappaChiBand:
    A = fmat(A)
    n = len(A[0])
    kap = kappa_by_bases(A)
    lower = kap == 1  # the lower band is only claimed when κ > 1
    upper = True
    chi = 1.0
    for _, T in _bases_tables(A, CHIBAR_GUARD):
        if not lower:
            for r in T:
                if sum((x * x for x in r), Fraction(0)) >= kap * kap + 1:
                    lower = True
                    break
        fro = sum((x * x for r in T for x in r), Fraction(0))
        if fro > n * n * kap * kap:
            upper = False
        M = np.array([[float(x) for x in r] for r in T])
        chi = max(chi, float(np.linalg.norm(M, 2)))
    k = float(kap)
    fl = chi / n <= k * (1 + 1e-12) and (kap == 1 or k <= (chi * chi - 1) ** 0.5 * (1 + 1e-12))
    return KappaChiBand(kap, chi, n, lower, upper, fl)


# ----------------------------------------------------------- certificates

def _min_norm_completion(N, I, p, n):
    """Least-norm z with Nz = 0 and z_I = p, or None if inconsistent."""
    I = list(I)
    C = [j for j in range(n) if j not in set(I)]
    z = [Fraction(0)] * n
    for i, x in zip(I, p):
        z[i] = x
    if not N:
        return z
    rhs = [-sum((r[i] * x for i, x in zip(I, p)), Fraction(0)) for r in N]
    if not C:
        return z if all(x == 0 for x in rhs) else None
    aug = [[r[j] for j in C] + [h] for r, h in zip(N, rhs)]
    R, piv = frref(aug)
    if piv and piv[-1] == len(C):
        return None
    G = [r[:-1] for r in R]
    h = [r[-1] for r in R]
    if not G:
        return z
    # z_C = Gᵀ w, (G Gᵀ) w = h
    GG = [[_dot(a, b) for b in G] + [hi] for a, hi in zip(G, h)]
    S, sp = frref(GG)
    w = [Fraction(0)] * len(G)
    for r, p_ in enumerate(sp):
        w[p_] = S[r][-1]
    zc = [sum((G[k][t] * w[k] for k in range(len(G))), Fraction(0)) for t in range(len(C))]
    for j, x in zip(C, zc):
        z[j] = x
    return z


@dataclass
class CertificateReport:
    ok: bool
    kind: str
    checks: dict = field(default_factory=dict)
    violated: list = field(default_factory=list)

    def line(self, name: str, ok: bool, value: Any = None):
        self.checks[name] = value
        if not ok:
            self.violated.append(name)
            self.ok = False


def check_certificate(cert, context: dict | None = None) -> tuple[bool, CertificateReport]:
    """Exact re-verification of a FarkasPrimal, FarkasDual or Lifting outcome.

    ``context`` carries ``A`` (W = ker A) plus ``d`` and/or ``c`` for the
    Farkas kinds.  Lifting certificates are checked in their own space.
    """
    from .outcomes import FarkasDual, FarkasPrimal, Lifting
    from .subspace import LiftingCertificate
    context = context or {}
    if isinstance(cert, Lifting):
        cert = cert.cert
    if isinstance(cert, LiftingCertificate):
        rep = CertificateReport(True, "lifting")
        N = fmat(cert.space.N)
        n = cert.space.n
        p = fvec(cert.p)
        M = F(cert.M)
        z = _min_norm_completion(N, cert.I, p, n)
        rep.line("p in projection", z is not None)
        if z is None:
            return False, rep
        p1 = sum((abs(x) for x in p), Fraction(0))
        rep.line("p nonzero", p1 > 0, p1)
        if p1 == 0:
            return False, rep
        zinf = max(abs(x) for x in z)
        ratio = zinf / p1
        rep.line("ratio > M", ratio > M, ratio)
        rep.line("stored lift matches", fvec(cert.z) == z)
        return rep.ok, rep
    A = fmat(context["A"])
    n = len(A[0])
    if isinstance(cert, FarkasPrimal):
        rep = CertificateReport(True, "farkas-primal")
        s = fvec(cert.s)
        d = fvec(context["d"])
        rep.line("s >= 0", all(x >= 0 for x in s), min(s) if s else None)
        K = kernel_basis(A, n)
        res = _matvec(K, s) if K else []
        rep.line("s in row space", all(x == 0 for x in res), max((abs(x) for x in res), default=0))
        v = _dot(d, s)
        rep.line("<d,s> < 0", v < 0, v)
        return rep.ok, rep
    if isinstance(cert, FarkasDual):
        rep = CertificateReport(True, "farkas-dual")
        x = fvec(cert.x)
        c = fvec(context["c"])
        rep.line("x >= 0", all(v >= 0 for v in x), min(x) if x else None)
        res = _matvec(A, x)
        rep.line("x in kernel", all(v == 0 for v in res), max((abs(v) for v in res), default=0))
        v = _dot(c, x)
        rep.line("<c,x> < 0", v < 0, v)
        return rep.ok, rep
    raise TypeError(f"not a certificate: {type(cert).__name__}")


# ------------------------------------------------------- solver contract

def _sqrt_low(v: Fraction, bits: int = 80) -> Fraction:
    """A rational lower bound on √v, within 2^-bits relative."""
    if v <= 0:
        return Fraction(0)
    scale = 1 << (2 * bits)
    return Fraction(math.isqrt(v.numerator * scale // v.denominator), 1 << bits)


def _norm2_low(v) -> Fraction:
    return _sqrt_low(sum((x * x for x in v), Fraction(0)))


def contract_lines(A, b, c, x0, delta, R_P, R_D, x, y, s) -> dict:
    """The three approximate-solver guarantees re-measured with Fractions.

    Right-hand sides use lower bounds on the square roots, so a True line is
    a proof, never a rounding accident.
    """
    A, b, c, x0 = fmat(A), fvec(b), fvec(c), fvec(x0)
    x, y, s = fvec(x), fvec(y), fvec(s)
    delta, R_P, R_D = F(delta), F(R_P), F(R_D)
    fro = _sqrt_low(sum((a * a for r in A for a in r), Fraction(0)))
    gap = _dot(c, x) - _dot(b, y)
    rp = [r - bi for r, bi in zip(_matvec(A, x), b)]
    aty = [_dot(col, y) for col in zip(*A)] if A else [Fraction(0)] * len(c)
    rd = [ci - a - si for ci, a, si in zip(c, aty, s)]
    tp = delta * (fro * R_P + _norm2_low(b))
    td = delta * (fro * R_D + _norm2_low(c))
    return {"x >= 0": all(v >= 0 for v in x),
            "s >= 0": all(v >= 0 for v in s),
            "(i) gap": gap <= delta * (_norm2_low(c) * R_P + _norm2_low(x0) * R_D),
            "(ii) primal residual": sum((r * r for r in rp), Fraction(0)) <= tp * tp,
            "(iii) dual residual": sum((r * r for r in rd), Fraction(0)) <= td * td}
