"""Linear subspaces W = ker(N) and the coordinate operations the solvers use.

Index sets are tuples of 0-based coordinates.  Subspaces produced by
``project_coords`` / ``fix_coords`` live in the coordinates of the given
index set, in the order given.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from flint import fmpq, fmpq_mat

from . import numerics as nx
from .errors import InconsistentProjection, NotInSubspace
from .numerics import ONE, ZERO


@dataclass(frozen=True, eq=False)
class Subspace:
    """W = ker(N) with N in reduced row echelon form (no zero rows).

    ``basis`` lists the pivot columns, so N restricted to them is the
    identity.  ``rank`` = dim W⊥.
    """
    N: fmpq_mat
    basis: tuple[int, ...]
    n: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def kernel(cls, A, n: int | None = None) -> "Subspace":
        A = nx.mat(A, n) if not isinstance(A, fmpq_mat) else A
        R, piv = nx.rref(A)
        return cls(R, tuple(piv), A.ncols())

    @classmethod
    def span(cls, V, n: int | None = None) -> "Subspace":
        """The span of the rows of V."""
        V = nx.mat(V, n) if not isinstance(V, fmpq_mat) else V
        return cls.kernel(V).dual()

    @classmethod
    def whole(cls, n: int) -> "Subspace":
        return cls(fmpq_mat(0, n), (), n)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(nx.identity(n), tuple(range(n)), n)

    @property
    def rank(self) -> int:
        return self.N.nrows()

    @property
    def dim(self) -> int:
        return self.n - self.rank

    def rows(self) -> list[list[fmpq]]:
        if "rows" not in self._cache:
            self._cache["rows"] = nx.table(self.N)
        return self._cache["rows"]

    def kernel_basis(self) -> fmpq_mat:
        """Rows spanning W: one fundamental vector per nonbasic column."""
        if "kb" not in self._cache:
            t = self.rows()
            nb = [j for j in range(self.n) if j not in set(self.basis)]
            flat = []
            for j in nb:
                v = [ZERO] * self.n
                v[j] = nx.ONE
                for i, b in enumerate(self.basis):
                    v[b] = -t[i][j]
                flat.extend(v)
            self._cache["kb"] = fmpq_mat(len(nb), self.n, flat)
        return self._cache["kb"]

    def dual(self) -> "Subspace":
        """W⊥, represented as the kernel of a basis of W."""
        if "dual" not in self._cache:
            D = Subspace.kernel(self.kernel_basis(), self.n)
            D._cache["dual"] = self
            self._cache["dual"] = D
        return self._cache["dual"]

    def contains(self, v) -> bool:
        return nx.is_zero(nx.mat_vec(self.N, v)) if self.rank else True

    def residual(self, v) -> np.ndarray:
        return nx.mat_vec(self.N, v)

    def loops(self) -> tuple[int, ...]:
        """Coordinates i with e_i ∈ W (zero columns of N)."""
        t = self.rows()
        return tuple(j for j in range(self.n) if all(r[j] == 0 for r in t))

    def normal_form_max(self) -> tuple[fmpq, int, int]:
        """Largest |N_ij| with its position; a lower bound on κ_W."""
        best, at = ZERO, (-1, -1)
        for i, r in enumerate(self.rows()):
            for j, x in enumerate(r):
                if abs(x) > best:
                    best, at = abs(x), (i, j)
        return best, at[0], at[1]

    def __repr__(self):
        return f"Subspace(n={self.n}, rank={self.rank}, basis={self.basis})"


def _complement(n: int, I) -> list[int]:
    s = set(I)
    return [j for j in range(n) if j not in s]


def _check_index(W: Subspace, I) -> tuple[int, ...]:
    I = tuple(int(i) for i in I)
    if len(set(I)) != len(I) or any(i < 0 or i >= W.n for i in I):
        raise ValueError(f"bad index set {I}")
    return I


def project_coords(W: Subspace, I) -> Subspace:
    """π_I(W): eliminate the coordinates outside I."""
    I = _check_index(W, I)
    C = _complement(W.n, I)
    if not C:
        return W if list(I) == list(range(W.n)) else Subspace.kernel(nx.cols(W.N, I), len(I))
    if W.rank == 0:
        return Subspace.whole(len(I))
    R, piv = nx.rref(nx.cols(W.N, C + list(I)))
    k = len(C)
    keep = [r for r, p in enumerate(piv) if p >= k]
    if not keep:
        return Subspace.whole(len(I))
    sub = nx.cols(nx.rows(R, keep), range(k, k + len(I)))
    return Subspace.kernel(sub, len(I))


def fix_coords(W: Subspace, I) -> Subspace:
    """W_I = π_I(W ∩ ℝⁿ_I) = ker(N_I)."""
    I = _check_index(W, I)
    if list(I) == list(range(W.n)):
        return W
    if W.rank == 0:
        return Subspace.whole(len(I))
    return Subspace.kernel(nx.cols(W.N, I), len(I))


def closure(W: Subspace, K) -> tuple[int, ...]:
    """cl(K): K plus every coordinate whose column of N lies in span(N_K)."""
    K = _check_index(W, K)
    if not K:
        return ()
    rest = _complement(W.n, K)
    if W.rank == 0:
        # every column is zero, hence spanned
        return tuple(sorted(K + tuple(rest)))
    R, piv = nx.rref(nx.cols(W.N, list(K) + rest))
    p = sum(1 for c in piv if c < len(K))
    t = nx.table(R)
    out = set(K)
    for c, j in enumerate(rest):
        col = len(K) + c
        if all(t[i][col] == 0 for i in range(p, len(t))):
            out.add(j)
    return tuple(sorted(out))


def min_norm_point(W: Subspace, d) -> np.ndarray:
    """d/W: the orthogonal projection of d onto W⊥, the least-norm point of W + d."""
    return nx.project_orthogonal(W.N, d)


def project_onto(W: Subspace, v) -> np.ndarray:
    """Orthogonal projection of v onto W itself."""
    v = nx.vec(v)
    return v - min_norm_point(W, v)


def lift(W: Subspace, I, p) -> np.ndarray:
    """L_I^W(p): the least-norm z ∈ W with z_I = p."""
    I = _check_index(W, I)
    p = nx.vec(p)
    if len(p) != len(I):
        raise ValueError("p must match I")
    z = nx.zeros(W.n)
    for i, x in zip(I, p):
        z[i] = x
    C = _complement(W.n, I)
    if W.rank == 0:
        return z
    rhs = -nx.mat_vec(nx.cols(W.N, I), p) if I else nx.zeros(W.rank)
    if not C:
        if not nx.is_zero(rhs):
            raise InconsistentProjection("p ∉ π_I(W)")
        return z
    zc = nx.solve_min_norm(nx.cols(W.N, C), rhs)
    for j, x in zip(C, zc):
        z[j] = x
    return z


def lift_dual(W: Subspace, I, q) -> np.ndarray:
    """L_I^{W⊥}(q), computed without forming a basis of W⊥.

    Solve N_Iᵀ y = q, take ŵ = Nᵀ y ∈ W⊥, then replace ŵ_C by its
    projection onto π_C(W), the orthogonal complement of (W⊥)_C in ℝ^C.
    """
    I = _check_index(W, I)
    q = nx.vec(q)
    if len(q) != len(I):
        raise ValueError("q must match I")
    C = _complement(W.n, I)
    if W.rank == 0:
        if not nx.is_zero(q):
            raise InconsistentProjection("W⊥ = {0}")
        return nx.zeros(W.n)
    NI = nx.cols(W.N, I)
    y = nx.solve_min_norm(NI.transpose(), q) if I else nx.zeros(W.rank)
    w = nx.mat_tvec(W.N, y)
    if C:
        wc = nx.vec(w[C])
        Ahat = project_coords(W, C)
        wc = nx.project_kernel(Ahat.N, wc) if Ahat.rank else wc
        for j, x in zip(C, wc):
            w[j] = x
    for i, x in zip(I, q):
        w[i] = x
    return w


@dataclass(frozen=True)
class LiftingCertificate:
    """(I, p) with ‖L_I^W(p)‖∞ > M‖p‖₁, witnessing M < κ_W for ``space``.

    ``ratio`` is ‖z‖∞/‖p‖₁; ``ratio_l2`` is ‖z‖₂/‖p‖₂ (as a float), the
    variant that transfers to a parent space without loss.
    """
    I: tuple[int, ...]
    p: np.ndarray
    z: np.ndarray
    ratio: fmpq
    M: fmpq
    space: Subspace
    ratio_l2: float
    origin: str = ""

    @property
    def new_M(self) -> fmpq:
        return max(2 * self.ratio, self.M * self.M)

    def describe(self) -> str:
        return (f"lifting certificate on {self.space!r}: |I|={len(self.I)}, "
                f"ratio={float(self.ratio):.6g} > M={float(self.M):.6g}"
                + (f" [{self.origin}]" if self.origin else ""))


def _certificate(W, I, p, z, M, origin) -> LiftingCertificate:
    r = nx.norminf(z) / nx.norm1(p)
    l2 = (float(nx.norm2sq(z)) / float(nx.norm2sq(p))) ** 0.5
    return LiftingCertificate(tuple(I), nx.vec(p), z, r, nx.q(M), W, l2, origin)


def check_lift_certificate(W: Subspace, I, p, M, *, origin: str = "",
                           z=None) -> LiftingCertificate | None:
    """Return a certificate iff ‖L_I^W(p)‖∞ > M‖p‖₁ (None for p = 0)."""
    p = nx.vec(p)
    if nx.is_zero(p):
        return None
    if z is None:
        z = lift(W, I, p)
    if nx.norminf(z) > nx.q(M) * nx.norm1(p):
        return _certificate(W, I, p, z, M, origin)
    return None


def certificate_from_support(W: Subspace, y, J, M, *, origin: str = "") -> LiftingCertificate:
    """Certificate from a support-minimal y ∈ W subject to y_J fixed.

    I = J ∪ ([n] \\ supp(y)), p = y_I; the lift of p is y itself.
    """
    J = set(J)
    I = tuple(sorted(J | {i for i in range(W.n) if y[i] == 0}))
    p = nx.vec(y[list(I)])
    z = lift(W, I, p)
    return _certificate(W, I, p, z, M, origin)


def normal_form_certificate(W: Subspace, M, *, origin: str = "") -> LiftingCertificate | None:
    """Certificate from a fundamental circuit if some |N_ij| > M.

    The fundamental circuit of nonbasic column j has entry 1 at j and
    -N_ij at basis[i]; fixing every coordinate off the circuit to zero and
    coordinate j to 1 pins down the lift.
    """
    best, i, j = W.normal_form_max()
    if best <= nx.q(M) or j in W.basis:
        return None
    g = nx.zeros(W.n)
    g[j] = nx.ONE
    t = W.rows()
    for r, b in enumerate(W.basis):
        g[b] = -t[r][j]
    I = tuple(sorted({j} | {k for k in range(W.n) if g[k] == 0}))
    return check_lift_certificate(W, I, g[list(I)], M, origin=origin)


def assert_in(W: Subspace, v, what: str = "vector"):
    if not W.contains(v):
        raise NotInSubspace(f"{what} is not in the subspace")


def search_certificate(W: Subspace, M, *, max_bases: int = 4000) -> LiftingCertificate | None:
    """Walk the basis-exchange graph looking for a normal-form entry above M.

    Every circuit shows up as a fundamental circuit of some basis, so an
    exhaustive walk finds a certificate whenever κ_W > M.  The walk is capped
    at ``max_bases`` bases; None means nothing was found within the cap.
    """
    Mq = nx.q(M)
    if W.rank == 0 or W.rank == W.n:
        return None
    start = tuple(W.basis)
    seen = {frozenset(start)}
    queue = [start]
    while queue:
        B = queue.pop(0)
        T = nx.table(_normal_form(W, B))
        for r, row in enumerate(T):
            for j, t in enumerate(row):
                if abs(t) > Mq and j not in B:
                    g = nx.zeros(W.n)
                    g[j] = ONE
                    for rr, b in enumerate(B):
                        g[b] = -T[rr][j]
                    I = tuple(sorted({j} | {k for k in range(W.n) if g[k] == 0}))
                    cert = check_lift_certificate(W, I, g[list(I)], Mq, origin="basis search")
                    if cert is not None:
                        return cert
        for r, row in enumerate(T):
            for j, t in enumerate(row):
                if t != 0 and j not in B:
                    nb = B[:r] + (j,) + B[r + 1:]
                    key = frozenset(nb)
                    if key not in seen:
                        if len(seen) >= max_bases:
                            return None
                        seen.add(key)
                        queue.append(nb)
    return None


def _normal_form(W: Subspace, B) -> fmpq_mat:
    """N_B⁻¹ N for a basis B (rows ordered like B)."""
    if list(B) == list(W.basis):
        return W.N  # already in reduced form
    return nx.cols(W.N, list(B)).solve(W.N)
