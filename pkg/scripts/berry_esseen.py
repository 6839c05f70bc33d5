#!/usr/bin/env python3
"""Sup-distance between the standardized-sum CDF and the normal CDF, per seed.

    python3 scripts/berry_esseen.py --dist uniform --n 10,100,1000 --seeds 20
"""
import argparse

from randprio.analysis import berry_esseen_gap
from randprio.distributions import parse_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dist", default="uniform")
    ap.add_argument("--n", default="10,100,1000")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--grid-points", type=int, default=1000)
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    dist = parse_spec(args.dist)
    for n in map(int, args.n.split(",")):
        reps = [berry_esseen_gap(dist, n, args.trials, args.grid_points, s) for s in range(args.seeds)]
        gaps = [r.empirical_sup_gap for r in reps]
        r = reps[0]
        print(f"n={n:>5}  gap max {max(gaps):.5f}  bound {r.bound:.5f} + dkw {r.dkw_slack:.5f}  "
              f"pass {sum(x.passes() for x in reps)}/{len(reps)}")


if __name__ == "__main__":
    main()
