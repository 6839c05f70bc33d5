#!/usr/bin/env python3
"""Empirical Pr{SW_RP <= lambda} against the closed-form tail bound.

    python3 scripts/tail_check.py --dist beta:2,2 --n 50,100,200 --trials 10000
"""
import argparse

from randprio.analysis import empirical_tail
from randprio.bounds import lambda_iid
from randprio.distributions import parse_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dist", default="uniform")
    ap.add_argument("--n", default="50,100,200")
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--rp-samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    dist = parse_spec(args.dist)
    print(f"{'n':>5} {'lambda':>10} {'empirical':>10} {'bound':>8}")
    for n in map(int, args.n.split(",")):
        lam = lambda_iid(n, dist.mean(), dist.std())
        rep = empirical_tail(dist, n, lam, args.trials, args.rp_samples, args.seed, workers=args.workers)
        flag = "  (vacuous)" if rep.vacuous else ""
        print(f"{n:>5} {lam:10.3f} {rep.empirical_prob:10.5f} {rep.theoretical_bound:8.4f}{flag}")


if __name__ == "__main__":
    main()
