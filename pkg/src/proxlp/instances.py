"""Instance files and the benchmark generators.

File format, one item per line, ``#`` starts a comment::

    m n
    <m rows of A, n decimals each>
    b <m decimals>      or      d <n decimals>
    c <n decimals>      (optional)

Numbers are parsed exactly (``1.1`` is 11/10, ``3/7`` is accepted too).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import numerics as nx
from .errors import InconsistentProjection, ParseError
from .subspace import Subspace


@dataclass
class Instance:
    A: list            # rows of rationals
    d: np.ndarray      # a point of {x : Ax = b}
    c: np.ndarray | None = None
    b: list | None = None
    name: str = ""
    family: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.d)

    @property
    def rhs(self) -> list:
        """b = A d (the given b when there was one)."""
        if self.b is not None:
            return list(self.b)
        return list(nx.mat_vec(nx.mat(self.A, self.n), self.d)) if self.m else []

    def subspace(self) -> Subspace:
        return Subspace.kernel(self.A, self.n) if self.m else Subspace.whole(self.n)


def make_instance(A, *, b=None, d=None, c=None, name="", family="", **meta) -> Instance:
    A = [[nx.q(x) for x in r] for r in A]
    if (b is None) == (d is None):
        raise ValueError("give exactly one of b and d")
    n = len(d) if d is not None else (len(A[0]) if A else 0)
    if any(len(r) != n for r in A):
        raise ValueError("rows of A have inconsistent length")
    if d is None:
        b = [nx.q(x) for x in b]
        if len(b) != len(A):
            raise ValueError("b has the wrong length")
        try:
            d = nx.solve_min_norm(nx.mat(A, n), b) if A else nx.zeros(n)
        except InconsistentProjection:
            raise ValueError("Ax = b has no solution") from None
    d = nx.vec(d)
    if c is not None:
        c = nx.vec(c)
        if len(c) != n:
            raise ValueError("c has the wrong length")
    return Instance(A, d, c, b, name, family, dict(meta))


# ------------------------------------------------------------ text format

def _number(tok: str, line: int, col: int):
    try:
        return nx.q(Fraction(tok))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a number: {tok!r}", line, col) from None


def _tokens(raw: str):
    """(token, column) pairs of one line, comments removed."""
    out, i = [], 0
    body = raw.split("#", 1)[0]
    while i < len(body):
        if body[i].isspace():
            i += 1
            continue
        j = i
        while j < len(body) and not body[j].isspace():
            j += 1
        out.append((body[i:j], i + 1))
        i = j
    return out


def parse_instance(text: str, *, name: str = "") -> Instance:
    lines = [(k + 1, _tokens(raw)) for k, raw in enumerate(text.splitlines())]
    lines = [(k, t) for k, t in lines if t]
    if not lines:
        raise ParseError("empty instance", 1, 1)
    ln, head = lines[0]
    if len(head) != 2:
        raise ParseError("first line must be 'm n'", ln, 1)
    try:
        m, n = int(head[0][0]), int(head[1][0])
    except ValueError:
        raise ParseError("m and n must be integers", ln, head[0][1]) from None
    if m < 0 or n < 1:
        raise ParseError("need m >= 0 and n >= 1", ln, head[0][1])
    if len(lines) < 1 + m + 1:
        last = lines[-1][0]
        raise ParseError(f"expected {m} rows of A and a b or d line", last + 1, 1)
    A = []
    for ln, toks in lines[1:1 + m]:
        if len(toks) != n:
            raise ParseError(f"row of A has {len(toks)} entries, expected {n}", ln, toks[0][1])
        A.append([_number(t, ln, col) for t, col in toks])
    sections = {}
    for ln, toks in lines[1 + m:]:
        key, col = toks[0]
        if key not in ("b", "d", "c"):
            raise ParseError(f"unknown section {key!r}", ln, col)
        if key in sections or (key in "bd" and ("b" in sections or "d" in sections)):
            raise ParseError(f"section {key!r} given twice", ln, col)
        want = m if key == "b" else n
        vals = toks[1:]
        if len(vals) != want:
            at = vals[want][1] if len(vals) > want else (toks[-1][1] + len(toks[-1][0]))
            raise ParseError(f"section {key!r} has {len(vals)} entries, expected {want}", ln, at)
        sections[key] = (ln, [_number(t, ln, cc) for t, cc in vals])
    if "b" not in sections and "d" not in sections:
        raise ParseError("missing b or d section", lines[-1][0] + 1, 1)
    c = sections["c"][1] if "c" in sections else None
    try:
        if "b" in sections:
            return make_instance(A, b=sections["b"][1], c=c, name=name)
        return make_instance(A, d=sections["d"][1], c=c, name=name)
    except ValueError as e:
        ln = (sections.get("b") or sections["d"])[0]
        raise ParseError(str(e), ln, 1) from None


def format_instance(inst: Instance, *, use_b: bool = True) -> str:
    def row(v):
        return " ".join(str(x) for x in v)
    out = []
    if inst.name or inst.family:
        out.append(f"# {inst.name} {inst.family}".rstrip())
    out.append(f"{inst.m} {inst.n}")
    out += [row(r) for r in inst.A]
    out.append("b " + row(inst.rhs) if use_b and inst.m else "d " + row(inst.d))
    if inst.c is not None:
        out.append("c " + row(inst.c))
    return "\n".join(out) + "\n"


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as f:
        return parse_instance(f.read(), name=str(path))


# ------------------------------------------------------------- generators

FAMILIES = ("tu-network", "random-int", "high-kappa", "infeasible")


def _costs(rng: random.Random, n: int, R: int) -> list[int]:
    return [rng.randint(-R, R) for _ in range(n)]


def tu_network(nodes: int, arcs: int, rng: random.Random, *, R: int = 3) -> Instance:
    """Min-cost flow on a random digraph; node-arc incidence with the last row dropped."""
    if nodes < 2:
        raise ValueError("need at least two nodes")
    edges = []
    for _ in range(arcs):
        u, v = rng.sample(range(nodes), 2)
        edges.append((u, v))
    A = [[0] * arcs for _ in range(nodes - 1)]
    for j, (u, v) in enumerate(edges):
        if u < nodes - 1:
            A[u][j] = 1
        if v < nodes - 1:
            A[v][j] = -1
    flow = [rng.randint(0, R) for _ in range(arcs)]
    b = [sum(a * x for a, x in zip(r, flow)) for r in A]
    # nonnegative costs keep every instance bounded
    return make_instance(A, b=b, c=[rng.randint(0, R) for _ in range(arcs)],
                         family="tu-network", nodes=nodes, arcs=arcs)


def random_int(m: int, n: int, rng: random.Random, *, R: int = 3) -> Instance:
    """Integer A with entries in [-R, R]; b = A x0 for a random x0 ≥ 0."""
    A = [[rng.randint(-R, R) for _ in range(n)] for _ in range(m)]
    x0 = [rng.randint(0, R) for _ in range(n)]
    b = [sum(a * x for a, x in zip(r, x0)) for r in A]
    return make_instance(A, b=b, c=_costs(rng, n, R), family="random-int")


def high_kappa(blocks: int, rng: random.Random, *, K: int = 100, R: int = 3) -> Instance:
    """Block-diagonal copies of the row (1, K), so κ = K exactly.

    b ≥ 0 makes every block a bounded segment, so any costs are fine.
    """
    n = 2 * blocks
    A = []
    for k in range(blocks):
        r = [0] * n
        r[2 * k], r[2 * k + 1] = 1, K
        A.append(r)
    b = [rng.randint(0, R) + K * rng.randint(0, R) for _ in range(blocks)]
    return make_instance(A, b=b, c=_costs(rng, n, R), family="high-kappa", K=K)


def infeasible(m: int, n: int, rng: random.Random, *, R: int = 3) -> Instance:
    """Primal-infeasible by construction, then rows mixed to hide the witness.

    Row 0 is strictly positive with a negative right-hand side, so y = e₀
    certifies infeasibility before mixing.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    A = [[rng.randint(1, R) for _ in range(n)]]
    A += [[rng.randint(-R, R) for _ in range(n)] for _ in range(m - 1)]
    x0 = [rng.randint(0, R) for _ in range(n)]
    b = [-rng.randint(1, R)] + [sum(a * x for a, x in zip(r, x0)) for r in A[1:]]
    for i in range(1, m):
        t = rng.randint(-2, 2)
        A[i] = [a + t * a0 for a, a0 in zip(A[i], A[0])]
        b[i] = b[i] + t * b[0]
    return make_instance(A, b=b, c=_costs(rng, n, R), family="infeasible")


def generate(family: str, size: int, rng: random.Random) -> Instance:
    """One instance of ``family`` whose column count grows with ``size``."""
    if family == "tu-network":
        nodes = max(2, size // 2)
        return tu_network(nodes, size, rng)
    if family == "random-int":
        m = rng.randint(1, max(1, size // 2))
        return random_int(m, size, rng)
    if family == "high-kappa":
        return high_kappa(max(1, size // 2), rng)
    if family == "infeasible":
        m = rng.randint(1, max(1, size // 2))
        return infeasible(m, size, rng)
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
