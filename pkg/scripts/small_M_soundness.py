"""Run the optimizer with M fixed at 2 on instances whose κ is larger.

Every answer is either correct (checked against the rational simplex) or a
lifting certificate that re-verifies exactly; the script counts both.

    python3 scripts/small_M_soundness.py [--count 200] [--seed 0]
"""
import argparse
import random
from collections import Counter

from proxlp import numerics as nx
from proxlp import verify as V
from proxlp.optimization import optimize
from proxlp.outcomes import Lifting, Optimal
from proxlp.subspace import Subspace


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    tally = Counter()
    while sum(tally.values()) < args.count:
        n = rng.randint(3, 7)
        A = [[rng.choice([-10, -1, 0, 1, 2, 10]) for _ in range(n)] for _ in range(rng.randint(1, n - 1))]
        if V.brute_kappa(A) <= 2:
            continue
        x0 = [rng.randint(0, 5) for _ in range(n)]
        c = [rng.randint(-3, 3) for _ in range(n)]
        b = [sum(a * x for a, x in zip(r, x0)) for r in A]
        gt = V.rational_simplex(A, b, c)
        W = Subspace.kernel(A)
        out = optimize(W, nx.vec(x0), c, 2)
        if isinstance(out, Lifting):
            tally["lifting, verified" if V.check_certificate(out)[0] else "lifting, UNSOUND"] += 1
        elif isinstance(out, Optimal):
            ok = gt.status == "optimal" and nx.dot(nx.vec(c), out.x) == nx.q(gt.opt)
            tally["optimal, correct" if ok else "optimal, WRONG"] += 1
        else:
            tally[f"{type(out).__name__}, status {gt.status}"] += 1
    for k, v in sorted(tally.items()):
        print(f"{v:5d}  {k}")


if __name__ == "__main__":
    main()
