#!/usr/bin/env python3
"""Average OPT/RP ratio across sizes for an i.i.d. value distribution.

    python3 scripts/ratio_sweep.py --dist uniform --n 10,50,100,200 --trials 2000
"""
import argparse

from randprio.analysis import RatioNotion, avg_ratio
from randprio.bounds import OutsideValidityWindow, theorem2_finite_bound
from randprio.distributions import parse_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dist", default="uniform")
    ap.add_argument("--n", default="10,50,100,200")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--rp-samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--notion", default=RatioNotion.EXPECTATION_OF_RATIO.value,
                    choices=[x.value for x in RatioNotion])
    args = ap.parse_args()

    dist = parse_spec(args.dist)
    mu, sigma = dist.mean(), dist.std()
    print(f"{dist.to_json()}  1/mu = {1 / mu:.4f}")
    print(f"{'n':>5} {'mean':>9} {'stderr':>9} {'finite bound':>13}")
    for n in map(int, args.n.split(",")):
        est = avg_ratio(dist, n, args.trials, args.rp_samples, args.notion, args.seed, args.workers)
        try:
            bound = f"{theorem2_finite_bound(n, mu, sigma):13.4f}"
        except (OutsideValidityWindow, ValueError):
            bound = f"{'n/a':>13}"
        print(f"{n:>5} {est.mean:9.4f} {est.stderr:9.4f} {bound}")


if __name__ == "__main__":
    main()
