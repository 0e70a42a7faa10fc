#!/usr/bin/env python3
"""Monte-Carlo sweep of the empirical bound chain.

For random weight vectors on the unit sphere, count zeros of I, G = L1(I)
and R = L2(G) on the annulus interval and tally the chain
count(R) <= 6, count(G) <= count(R) + 2, count(I) <= count(G) <= 8.

    python scripts/sweep_bounds.py --trials 1000 --seed 42 \
        --kappa 1.5 --kappa 2 --kappa 4 --kappa 9
"""

import argparse
import collections
import time

from q4lab.analysis import sweep_bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--kappa", action="append", type=float)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--grid", type=int, default=512)
    args = ap.parse_args()
    kappas = args.kappa or [1.5, 2.0, 4.0, 9.0]

    t0 = time.time()
    reports = sweep_bounds(kappas, args.trials, args.seed, grid=args.grid)
    elapsed = time.time() - t0

    hist = collections.Counter((r.count_I, r.count_G, r.count_R) for r in reports)
    print(f"{len(reports)} trials over kappa = {kappas} in {elapsed:.1f}s")
    print("(count_I, count_G, count_R) histogram:")
    for key in sorted(hist):
        print(f"  {key}: {hist[key]}")
    bad = [r for r in reports if not r.chain_ok]
    print(f"chain violations: {len(bad)}")
    for r in bad[:10]:
        print(f"  kappa={r.kappa} mu={r.mu}: {r.violations}")
    return 2 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
