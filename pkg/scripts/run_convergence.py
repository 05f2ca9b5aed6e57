"""Aligned max-row error of observed vs noise-free ULSE-n1 embeddings as n grows.

    python scripts/run_convergence.py --sizes 100 200 400 800 --trials 20
"""
import argparse

import numpy as np

from dynspect.experiments import convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 800])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--preset", default="synthetic1")
    args = ap.parse_args()

    errs = convergence(args.sizes, args.trials, args.base_seed, args.preset)
    prev = None
    print("n      median    p90       ratio_to_prev  n^-1/2 ratio")
    for n in args.sizes:
        med = float(np.median(errs[n]))
        if prev:
            ratio, ref = f"{med / prev[1]:.3f}", f"{np.sqrt(prev[0] / n):.3f}"
        else:
            ratio = ref = "-"
        print(f"{n:<6d} {med:.5f}  {np.quantile(errs[n], 0.9):.5f}  {ratio:<14s} {ref}")
        prev = (n, med)


if __name__ == "__main__":
    main()
