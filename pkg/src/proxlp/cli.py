"""Command-line driver.

    proxlp INSTANCE [--mode feas|opt|analyze] [--M 2] [--verify] [--json]
    proxlp --mode bench --family tu-network --sizes 6,10 [--reps 5] [--seed 0]

Every solve starts from a guess M (default 2).  A lifting certificate proves
the guess too small; M is then raised to max(2·ratio, M²) and the solve
restarts.  Exit codes: 0 solved or feasible, 1 infeasible (certificate
attached), 2 restart limit hit, 3 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import numerics as nx
from . import verify as V
from .errors import ParseError, ProxLPError, RestartLimit, TooLarge
from .feasibility import solve_feasibility, verify_feas_lp
from .instances import FAMILIES, Instance, generate, read_instance
from .numerics import Tolerance
from .optimization import optimize
from .outcomes import FarkasDual, FarkasPrimal, Feasible, Lifting, Optimal, Trace
from .subspace import search_certificate

EXIT_OK, EXIT_INFEASIBLE, EXIT_RESTARTS, EXIT_INPUT = 0, 1, 2, 3

KAPPA_GUARD = 12    # brute-force κ, χ̄ and the rational simplex up to this n
PROBE_BASES = 2000  # basis cap for the κ lower-bound probe on larger inputs


@dataclass(frozen=True)
class RunFlags:
    M: Fraction = Fraction(2)
    tol: float = 1e-8
    verify: bool = False
    max_restarts: int = 60
    seed: int = 0


@dataclass
class SolveReport:
    mode: str
    outcome: str
    x: list | None = None
    s: list | None = None
    certificate: dict | None = None
    objective: str | None = None
    M_history: list = field(default_factory=list)
    restarts: int = 0
    oracle_calls: int = 0
    solver_calls: int = 0
    ipm_iterations: int = 0
    feas_depth: int = 0
    outer_iterations: int = 0
    eps_values: list = field(default_factory=list)
    lifting_log: list = field(default_factory=list)
    lifting_ratios: list = field(default_factory=list)  # exact ‖z‖∞/‖p‖₁ per restart
    verification: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        out = [f"mode: {self.mode}", f"outcome: {self.outcome}"]
        if self.objective is not None:
            out.append(f"objective: {self.objective}")
        for key in ("x", "s"):
            v = getattr(self, key)
            if v is not None:
                out.append(f"{key}: {' '.join(v)}")
        if self.certificate:
            out.append("certificate: " + ", ".join(f"{k}={_short(v)}" for k, v in self.certificate.items()))
        if self.M_history:
            out.append(f"M history: {' -> '.join(self.M_history)}  (restarts: {self.restarts})")
        for line in self.lifting_log:
            out.append(f"  {line}")
        if self.mode in ("feas", "opt"):
            out.append(f"oracle calls: {self.oracle_calls}, solver calls: {self.solver_calls}, "
                       f"IPM iterations: {self.ipm_iterations}")
            out.append(f"feasibility depth: {self.feas_depth}, outer iterations: {self.outer_iterations}")
        for k, v in self.verification.items():
            out.append(f"check {k}: {v}")
        for k, v in self.analysis.items():
            out.append(f"{k}: {v}")
        out.append(f"time: {self.seconds:.3f}s")
        return "\n".join(out)


def _short(v) -> str:
    if isinstance(v, list):
        return "[" + " ".join(str(x) for x in v) + "]"
    return str(v)


def _strs(v) -> list[str]:
    return [str(x) for x in v]


# ------------------------------------------------------------ verification

def _check_or_die(cert, ctx: dict) -> dict:
    """Exact re-check; an unverified certificate never leaves this module."""
    ok, rep = V.check_certificate(cert, ctx)
    if not ok:
        raise ProxLPError(f"certificate failed verification: {', '.join(rep.violated)}")
    return {name: name not in rep.violated for name in rep.checks}


def _verify_feasible(inst: Instance, x, M, tol: Tolerance) -> dict:
    W = inst.subspace()
    return {"x in W+d (exact)": W.contains(x - inst.d),
            "x >= 0 (exact)": nx.is_nonneg(x),
            "Feas-LP lines": verify_feas_lp(W, inst.d, M, x, tol)}


def _verify_optimal(inst: Instance, x, s) -> dict:
    W = inst.subspace()
    return {"x in W+d": W.contains(x - inst.d),
            "s in W_perp+c": W.dual().contains(s - inst.c),
            "x, s >= 0": nx.is_nonneg(x) and nx.is_nonneg(s),
            "<x,s> = 0": nx.dot(x, s) == 0}


def _ground_truth(inst: Instance):
    c = inst.c if inst.c is not None else nx.zeros(inst.n)
    if not inst.m:
        return V.rational_simplex([], [], c)
    return V.rational_simplex(inst.A, inst.rhs, c)


def _agreement(inst: Instance, rep: SolveReport, tol: float) -> bool | None:
    if inst.n > KAPPA_GUARD:
        return None
    gt = _ground_truth(inst)
    if rep.outcome == "FarkasPrimal":
        return gt.status == "infeasible"
    if rep.mode == "feas":
        return rep.outcome == "Feasible" and gt.status != "infeasible"
    if rep.outcome == "FarkasDual":
        return gt.status == "unbounded"
    if rep.outcome == "Optimal":
        if gt.status != "optimal":
            return False
        opt = Fraction(rep.objective)
        return abs(opt - gt.opt) <= tol * (1 + abs(gt.opt))
    return False


# ------------------------------------------------------------------ run

def run(mode: str, inst: Instance, flags: RunFlags = RunFlags()) -> SolveReport:
    """Solve ``inst`` in ``mode`` ("feas", "opt" or "analyze")."""
    t0 = time.perf_counter()
    if mode == "analyze":
        rep = SolveReport("analyze", "Analysis", analysis=analyze(inst))
        rep.seconds = time.perf_counter() - t0
        return rep
    if mode not in ("feas", "opt"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "opt" and inst.c is None:
        raise ValueError("optimization needs a c section")
    W = inst.subspace()
    tol = Tolerance(zero_tol=min(1e-11, flags.tol), residual_tol=flags.tol)
    ctx = {"A": inst.A if inst.m else [[0] * inst.n], "d": inst.d}
    if inst.c is not None:
        ctx["c"] = inst.c
    M = nx.q(flags.M)
    if M < 2:
        raise ValueError("the starting M must be at least 2")
    rep = SolveReport(mode, "")
    trace = Trace()
    while True:
        rep.M_history.append(str(M))
        if mode == "feas":
            out = solve_feasibility(W, inst.d, M, trace=trace)
        else:
            out = optimize(W, inst.d, inst.c, M, trace=trace)
        if not isinstance(out, Lifting):
            break
        cert = out.cert
        _check_or_die(out, ctx)
        rep.lifting_log.append(cert.describe())
        rep.lifting_ratios.append(str(cert.ratio))
        new = cert.new_M
        assert new > M
        if rep.restarts >= flags.max_restarts:
            rep.outcome = "RestartLimit"
            _fill(rep, trace, t0)
            err = RestartLimit(f"gave up after {rep.restarts} restarts at M = {M}")
            err.report = rep
            raise err
        rep.restarts += 1
        M = new
    rep.outcome = type(out).__name__
    if isinstance(out, Feasible):
        rep.x = _strs(out.x)
        rep.verification = _verify_feasible(inst, out.x, M, tol)
    elif isinstance(out, Optimal):
        rep.x, rep.s = _strs(out.x), _strs(out.s)
        rep.objective = str(nx.dot(inst.c, out.x))
        rep.verification = _verify_optimal(inst, out.x, out.s)
    elif isinstance(out, FarkasPrimal):
        rep.certificate = {"kind": "FarkasPrimal", "s": _strs(out.s)}
        rep.verification = _check_or_die(out, ctx)
    elif isinstance(out, FarkasDual):
        rep.certificate = {"kind": "FarkasDual", "x": _strs(out.x)}
        rep.verification = _check_or_die(out, ctx)
    if not all(rep.verification.values()):
        raise ProxLPError(f"result failed verification: {rep.verification}")
    _fill(rep, trace, t0)
    if flags.verify:
        agree = _agreement(inst, rep, flags.tol)
        rep.verification["rational simplex agrees"] = "skipped (n too large)" if agree is None else agree
    return rep


def _fill(rep: SolveReport, trace: Trace, t0: float):
    rep.oracle_calls = trace.oracle_calls
    rep.solver_calls = trace.solver_calls
    rep.ipm_iterations = trace.ipm_iterations
    rep.feas_depth = trace.max_feas_depth
    rep.outer_iterations = trace.outer_iterations
    rep.eps_values = [str(e) for e in trace.eps_values]
    rep.seconds = time.perf_counter() - t0


def analyze(inst: Instance) -> dict:
    """Rank, loops, and κ (exact when small, a probed lower bound otherwise)."""
    W = inst.subspace()
    out = {"n": inst.n, "rank": W.rank, "loops": list(W.loops()),
           "coloops": list(W.dual().loops())}
    A = inst.A if inst.m else [[0] * inst.n]
    if inst.n <= KAPPA_GUARD:
        k = V.brute_kappa(A)
        out["kappa"] = str(k)
        out["kappa (circuit route)"] = str(V.brute_kappa(A, route="circuits"))
        out["chibar"] = f"{V.brute_chibar(A):.6g}"
        return out
    lower, _, _ = W.normal_form_max()
    lower = max(lower, nx.ONE)
    while True:
        cert = search_certificate(W, lower, max_bases=PROBE_BASES)
        if cert is None:
            break
        lower = cert.ratio
    out["kappa lower bound"] = str(lower)
    return out


# ---------------------------------------------------------------- bench

BENCH_FIELDS = ("family", "size", "rep", "m", "n", "outcome", "agree", "restarts",
                "lifting_events", "M_history", "oracle_calls", "solver_calls",
                "outer_iterations", "seconds")


def bench(family: str, sizes, seed: int = 0, *, reps: int = 5,
          flags: RunFlags = RunFlags()) -> list[dict]:
    """Generate, solve and cross-check ``reps`` instances per size."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    rng = random.Random(seed)
    rows = []
    for size in sizes:
        for k in range(reps):
            inst = generate(family, size, rng)
            mode = "opt" if inst.c is not None else "feas"
            try:
                rep = run(mode, inst, flags)
            except RestartLimit:
                rows.append({"family": family, "size": size, "rep": k, "m": inst.m, "n": inst.n,
                             "outcome": "RestartLimit"})
                continue
            agree = _agreement(inst, rep, flags.tol)
            rows.append({"family": family, "size": size, "rep": k, "m": inst.m, "n": inst.n,
                         "outcome": rep.outcome, "agree": "" if agree is None else agree,
                         "restarts": rep.restarts, "lifting_events": len(rep.lifting_log),
                         "M_history": " ".join(rep.M_history), "oracle_calls": rep.oracle_calls,
                         "solver_calls": rep.solver_calls,
                         "outer_iterations": rep.outer_iterations,
                         "seconds": f"{rep.seconds:.4f}"})
    return rows


def bench_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# ------------------------------------------------------------------ main

def _fraction(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxlp", description="Exact LP solving from approximate solves.")
    p.add_argument("instance", nargs="?", help="instance file ('-' for stdin)")
    p.add_argument("--mode", choices=("feas", "opt", "analyze", "bench"), default="opt")
    p.add_argument("--M", type=_fraction, default=Fraction(2), help="starting guess for kappa")
    p.add_argument("--tol", type=float, default=1e-8, help="tolerance for reported checks")
    p.add_argument("--verify", action="store_true", help="cross-check with the rational simplex")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-restarts", type=int, default=60)
    p.add_argument("--family", choices=FAMILIES, default="random-int", help="bench family")
    p.add_argument("--sizes", default="4,6,8", help="bench sizes, comma separated")
    p.add_argument("--reps", type=int, default=5, help="bench instances per size")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = RunFlags(args.M, args.tol, args.verify, args.max_restarts, args.seed)
    if args.mode == "bench":
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        except ValueError:
            print("error: --sizes must be integers", file=sys.stderr)
            return EXIT_INPUT
        sys.stdout.write(bench_csv(bench(args.family, sizes, args.seed, reps=args.reps, flags=flags)))
        return EXIT_OK
    if not args.instance:
        print("error: an instance file is required", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.instance == "-":
            from .instances import parse_instance
            inst = parse_instance(sys.stdin.read(), name="<stdin>")
        else:
            inst = read_instance(args.instance)
        mode = args.mode
        if mode == "opt" and inst.c is None:
            mode = "feas"  # no objective given
        rep = run(mode, inst, flags)
    except (ParseError, OSError, ValueError, TooLarge) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except RestartLimit as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESTARTS
    print(rep.to_json() if args.json else rep.to_text())
    if rep.outcome in ("FarkasPrimal", "FarkasDual"):
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
