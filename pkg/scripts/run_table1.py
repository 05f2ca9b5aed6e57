"""Clustering metrics on both synthetic presets, printed as a table.

    python scripts/run_table1.py --trials 20 --n 200 --out runs/table1.csv
"""
import argparse
import csv
import time

from dynspect.experiments import ExperimentConfig, evaluate, summarize, table_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--mode", choices=["average", "pooled"], default="average")
    ap.add_argument("--out", help="optional CSV path")
    args = ap.parse_args()

    rows = []
    for name in ("synthetic1", "synthetic2"):
        cfg = ExperimentConfig(dataset=name, n=args.n, trials=args.trials, base_seed=args.base_seed,
                               mode=args.mode)
        t0 = time.perf_counter()
        table = table_rows(name, summarize(evaluate(cfg)))
        print(f"{name}: {args.trials} trials in {time.perf_counter() - t0:.1f}s (config {cfg.digest()})")
        if not rows:
            rows.append(table[0])
        rows.extend(table[1:])

    widths = [max(len(r[j]) for r in rows) for j in range(len(rows[0]))]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)


if __name__ == "__main__":
    main()
