#!/usr/bin/env python3
"""Hill-climb for small instances with a large OPT/RP ratio.

    python3 scripts/adversarial.py --n 2,3,4,5 --iters 2000 --restarts 4 --mode box
"""
import argparse

import numpy as np

from randprio.analysis import adversarial_search
from randprio.core import Mode


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="2,3,4,5")
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mode", default=Mode.UNIT_RANGE.value, choices=[m.value for m in Mode])
    args = ap.parse_args()

    for n in map(int, args.n.split(",")):
        res = adversarial_search(n, args.iters, args.restarts, args.seed, Mode(args.mode))
        print(f"n={n}: ratio {res.ratio:.4f}")
        print(np.array2string(res.instance.values, precision=3, suppress_small=True))


if __name__ == "__main__":
    main()
