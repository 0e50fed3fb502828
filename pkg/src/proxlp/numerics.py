"""Exact dense linear algebra over the rationals.

Vectors are 1-d numpy object arrays of ``flint.fmpq``; matrices are
``flint.fmpq_mat``.  All zero tests are exact.  ``Tolerance`` only governs
float-level reporting and checks of externally supplied data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from flint import fmpq, fmpq_mat, fmpz

from .errors import InconsistentProjection, RankDeficient

ZERO = fmpq(0)
ONE = fmpq(1)
HALF = fmpq(1, 2)


@dataclass(frozen=True)
class Tolerance:
    zero_tol: float = 1e-11
    residual_tol: float = 1e-8

    def __post_init__(self):
        if not (0 < self.zero_tol <= self.residual_tol < 1):
            raise ValueError("need 0 < zero_tol <= residual_tol < 1")


DEFAULT_TOL = Tolerance()


# -- scalars and vectors ---------------------------------------------------

def q(x) -> fmpq:
    """Exact conversion to fmpq.  Floats convert bit-exactly."""
    if isinstance(x, fmpq):
        return x
    if isinstance(x, (int, fmpz)) and not isinstance(x, bool):
        return fmpq(x)
    if isinstance(x, bool):
        return fmpq(int(x))
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite entry {x!r}")
        n, d = float(x).as_integer_ratio()
        return fmpq(n, d)
    if isinstance(x, (np.integer,)):
        return fmpq(int(x))
    if isinstance(x, str):
        f = Fraction(x.strip())
        return fmpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def to_fraction(x) -> Fraction:
    x = q(x)
    return Fraction(int(x.p), int(x.q))


def vec(xs) -> np.ndarray:
    xs = list(xs)
    out = np.empty(len(xs), dtype=object)
    for i, x in enumerate(xs):
        out[i] = q(x)
    return out


def zeros(n: int) -> np.ndarray:
    out = np.empty(n, dtype=object)
    out[:] = [ZERO] * n
    return out


def ones(n: int) -> np.ndarray:
    out = np.empty(n, dtype=object)
    out[:] = [ONE] * n
    return out


def unit(n: int, i: int) -> np.ndarray:
    e = zeros(n)
    e[i] = ONE
    return e


def to_float(v) -> np.ndarray:
    return np.array([float(x) for x in v], dtype=float)


def norm1(v) -> fmpq:
    s = ZERO
    for x in v:
        s += abs(x)
    return s


def norminf(v) -> fmpq:
    m = ZERO
    for x in v:
        a = abs(x)
        if a > m:
            m = a
    return m


def norm2sq(v) -> fmpq:
    s = ZERO
    for x in v:
        s += x * x
    return s


def dot(a, b) -> fmpq:
    s = ZERO
    for x, y in zip(a, b):
        s += x * y
    return s


def neg(v) -> np.ndarray:
    """The negative part v⁻ = max(-v, 0), as a nonnegative vector."""
    out = zeros(len(v))
    for i, x in enumerate(v):
        if x < 0:
            out[i] = -x
    return out


def pos(v) -> np.ndarray:
    out = zeros(len(v))
    for i, x in enumerate(v):
        if x > 0:
            out[i] = x
    return out


def is_zero(v) -> bool:
    return all(x == 0 for x in v)


def is_nonneg(v) -> bool:
    return all(x >= 0 for x in v)


def support(v) -> list[int]:
    return [i for i, x in enumerate(v) if x != 0]


def scatter(n: int, idx, vals) -> np.ndarray:
    """Vector of length n holding ``vals`` at positions ``idx``, zero elsewhere."""
    out = zeros(n)
    for i, x in zip(idx, vals):
        out[i] = x
    return out


def sqrt_bounds(x, bits: int = 64) -> tuple[fmpq, fmpq]:
    """Rational lo <= sqrt(x) <= hi with hi - lo <= 2^-bits / den(x)."""
    x = q(x)
    if x < 0:
        raise ValueError("negative argument")
    p, d = int(x.p), int(x.q)
    scale = 1 << bits
    s = math.isqrt(p * d * scale * scale)
    lo = fmpq(s, d * scale)
    hi = lo if s * s == p * d * scale * scale else fmpq(s + 1, d * scale)
    return lo, hi


def norm2_bounds(v, bits: int = 64) -> tuple[fmpq, fmpq]:
    return sqrt_bounds(norm2sq(v), bits)


def pow2_floor(x) -> fmpq:
    """Largest power of two (possibly negative exponent) that is <= x > 0."""
    x = q(x)
    if x <= 0:
        raise ValueError("need x > 0")
    k = int(x.p).bit_length() - int(x.q).bit_length()
    t = fmpq(2) ** k if k >= 0 else fmpq(1, 2 ** (-k))
    while t > x:
        t /= 2
    while t * 2 <= x:
        t *= 2
    return t


def round_to_grid(x: float, bits: int = 40) -> fmpq:
    return fmpq(int(round(x * (1 << bits))), 1 << bits)


# -- matrices --------------------------------------------------------------

def mat(rows, ncols: int | None = None) -> fmpq_mat:
    """fmpq_mat from a nested sequence (or 2-d array).  ``ncols`` is needed
    only when ``rows`` is empty."""
    if isinstance(rows, fmpq_mat):
        return rows
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        m, n = rows.shape
        return fmpq_mat(m, n, [q(x) for x in rows.ravel()])
    rows = [list(r) for r in rows]
    m = len(rows)
    n = len(rows[0]) if m else (ncols or 0)
    flat = []
    for r in rows:
        if len(r) != n:
            raise ValueError("ragged matrix")
        flat.extend(q(x) for x in r)
    return fmpq_mat(m, n, flat)


def shape(M: fmpq_mat) -> tuple[int, int]:
    return M.nrows(), M.ncols()


def table(M: fmpq_mat) -> list[list[fmpq]]:
    m, n = shape(M)
    if m == 0:
        return []
    e = M.entries()
    return [e[i * n:(i + 1) * n] for i in range(m)]


def identity(n: int) -> fmpq_mat:
    return fmpq_mat(n, n, [ONE if i == j else ZERO for i in range(n) for j in range(n)])


def cols(M: fmpq_mat, idx) -> fmpq_mat:
    idx = list(idx)
    t = table(M)
    return fmpq_mat(M.nrows(), len(idx), [r[j] for r in t for j in idx])


def rows(M: fmpq_mat, idx) -> fmpq_mat:
    idx = list(idx)
    t = table(M)
    return fmpq_mat(len(idx), M.ncols(), [x for i in idx for x in t[i]])


def hstack(*Ms: fmpq_mat) -> fmpq_mat:
    m = Ms[0].nrows()
    ts = [table(M) for M in Ms]
    n = sum(M.ncols() for M in Ms)
    return fmpq_mat(m, n, [x for i in range(m) for t in ts for x in t[i]])


def vstack(*Ms: fmpq_mat) -> fmpq_mat:
    n = Ms[0].ncols()
    flat = []
    for M in Ms:
        flat.extend(M.entries() if M.nrows() else [])
    return fmpq_mat(sum(M.nrows() for M in Ms), n, flat)


def column(v) -> fmpq_mat:
    v = list(v)
    return fmpq_mat(len(v), 1, v)


def mat_vec(M: fmpq_mat, v) -> np.ndarray:
    if M.nrows() == 0:
        return zeros(0)
    if M.ncols() == 0:
        return zeros(M.nrows())
    return np.array((M * column(v)).entries(), dtype=object)


def mat_tvec(M: fmpq_mat, v) -> np.ndarray:
    """Mᵀ v."""
    if M.nrows() == 0:
        return zeros(M.ncols())
    if M.ncols() == 0:
        return zeros(0)
    return np.array((fmpq_mat(1, M.nrows(), list(v)) * M).entries(), dtype=object)


def frobenius_sq(M: fmpq_mat) -> fmpq:
    return norm2sq(M.entries()) if M.nrows() and M.ncols() else ZERO


def rref(M: fmpq_mat) -> tuple[fmpq_mat, list[int]]:
    """Reduced row echelon form with zero rows dropped, and pivot columns."""
    m, n = shape(M)
    if m == 0 or n == 0:
        return fmpq_mat(0, n), []
    R, rank = M.rref()
    t = table(R)
    piv = []
    for i in range(rank):
        r = t[i]
        for j in range(n):
            if r[j] != 0:
                piv.append(j)
                break
    return rows(R, range(rank)) if rank < m else R, piv


@dataclass(frozen=True)
class Normalized:
    """Result of gaussian_normalize: N = T A has an identity block on ``basis``."""
    basis: tuple[int, ...]
    N: fmpq_mat
    transform: fmpq_mat
    kept_rows: tuple[int, ...]


def gaussian_normalize(A, *, tol: Tolerance | None = None,
                       allow_redundant: bool = False) -> Normalized:
    """Bring A to the form (I | T) up to column permutation.

    Exact elimination.  Pivot columns are the lexicographically first
    basis.  Rows that are zero (entrywise ``<= zero_tol`` relative to the
    largest entry when ``tol`` is given and A has float entries) are dropped
    first; remaining dependent rows raise RankDeficient unless
    ``allow_redundant``.
    """
    if tol is not None and not isinstance(A, fmpq_mat):
        arr = np.asarray(A, dtype=object)
        if arr.size:
            big = max(abs(float(x)) for x in arr.ravel())
            cut = tol.zero_tol * max(big, 1.0)
            arr = np.array([[0 if (isinstance(x, float) and abs(x) <= cut) else x for x in r]
                            for r in arr], dtype=object)
        A = arr
    A = mat(A) if not isinstance(A, fmpq_mat) else A
    m, n = shape(A)
    t = table(A)
    kept = [i for i in range(m) if any(x != 0 for x in t[i])]
    A = rows(A, kept)
    k = len(kept)
    R, piv = rref(hstack(A, identity(k))) if k else (fmpq_mat(0, n), [])
    rank = sum(1 for p in piv if p < n)
    if rank < k and not allow_redundant:
        raise RankDeficient(f"rank {rank} < {k} nonzero rows")
    if k == 0:
        return Normalized((), fmpq_mat(0, n), fmpq_mat(0, m), ())
    tR = table(R)
    N = fmpq_mat(rank, n, [x for i in range(rank) for x in tR[i][:n]])
    # express the transform against the original (undropped) rows
    where = {j: c for c, j in enumerate(kept)}
    T = fmpq_mat(rank, m, [tR[i][n + where[j]] if j in where else ZERO
                           for i in range(rank) for j in range(m)])
    return Normalized(tuple(piv[:rank]), N, T, tuple(kept))


def _full_rank_pinv_apply(A: fmpq_mat, b) -> np.ndarray:
    """A⁺ b through the factorization A = C F (C: pivot columns, F: rref rows)."""
    m, n = shape(A)
    R, piv = rref(A)
    k = len(piv)
    if k == 0:
        return zeros(n)
    C = cols(A, piv)
    Ct = C.transpose()
    w = (Ct * C).solve(Ct * column(b))          # (CᵀC)⁻¹ Cᵀ b
    u = (R * R.transpose()).solve(w)            # (F Fᵀ)⁻¹ w
    return np.array((R.transpose() * u).entries(), dtype=object)


def least_squares(A, b) -> np.ndarray:
    """Minimum-norm least-squares solution argmin ‖Ax − b‖₂ (exact)."""
    A = mat(A) if not isinstance(A, fmpq_mat) else A
    b = vec(b)
    if A.nrows() != len(b):
        raise ValueError("dimension mismatch")
    if A.ncols() == 0:
        return zeros(0)
    if A.nrows() == 0:
        return zeros(A.ncols())
    return _full_rank_pinv_apply(A, b)


def solve_min_norm(A, b) -> np.ndarray:
    """Minimum-norm exact solution of Ax = b; InconsistentProjection if none."""
    A = mat(A) if not isinstance(A, fmpq_mat) else A
    b = vec(b)
    x = least_squares(A, b)
    r = mat_vec(A, x) - b if A.nrows() else zeros(0)
    if not is_zero(r):
        raise InconsistentProjection("system has no solution")
    return x


def project_orthogonal(M, v) -> np.ndarray:
    """Orthogonal projection of v onto the row space of M."""
    M = mat(M, len(v)) if not isinstance(M, fmpq_mat) else M
    v = vec(v)
    if M.nrows() == 0:
        return zeros(len(v))
    F, piv = rref(M)
    if not piv:
        return zeros(len(v))
    u = (F * F.transpose()).solve(F * column(v))
    return np.array((F.transpose() * u).entries(), dtype=object)


def project_kernel(M, v) -> np.ndarray:
    """Orthogonal projection of v onto ker(M)."""
    v = vec(v)
    return v - project_orthogonal(M, v)
