"""Run the benchmark harness over every family and print a per-family summary.

    python3 scripts/bench_sweep.py [--sizes 4,6,8] [--reps 5] [--seed 0] [--csv out.csv]
"""
import argparse
from collections import Counter

from proxlp.cli import bench, bench_csv
from proxlp.instances import FAMILIES


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="4,6,8")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", help="write all rows here")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    for fam in FAMILIES:
        got = bench(fam, sizes, args.seed, reps=args.reps)
        rows += got
        agree = sum(r.get("agree") is True for r in got)
        outcomes = Counter(r["outcome"] for r in got)
        restarts = sum(r.get("restarts", 0) for r in got)
        secs = sum(float(r.get("seconds", 0)) for r in got)
        print(f"{fam:12s} {len(got):3d} runs  agree {agree}/{len(got)}  restarts {restarts:3d}  "
              f"{dict(outcomes)}  {secs:.2f}s")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as f:
            f.write(bench_csv(rows))


if __name__ == "__main__":
    main()
