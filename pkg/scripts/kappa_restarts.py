"""Watch the M-guessing loop on the (1, K) gadget as K grows.

Each row shows the sequence of guesses and the exact certificate ratios
that forced each raise.

    python3 scripts/kappa_restarts.py [--blocks 2] [--seed 0]
"""
import argparse
import random

from proxlp.cli import run
from proxlp.instances import high_kappa


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--blocks", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    print(f"{'K':>8}  {'restarts':>8}  M history / certificate ratios")
    for K in (3, 10, 100, 10 ** 4, 10 ** 8):
        rep = run("opt", high_kappa(args.blocks, rng, K=K))
        print(f"{K:>8}  {rep.restarts:>8}  {' -> '.join(rep.M_history)}   "
              f"[{', '.join(rep.lifting_ratios)}]   {rep.outcome}")


if __name__ == "__main__":
    main()
