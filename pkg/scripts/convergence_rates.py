"""Empirical convergence rates of one CSV column against dofs or triangles.

    python3 scripts/convergence_rates.py results/lshape_adaptive.csv --method sCR \
        --column glb_scr --reference 2.357076 --last 6
"""
import argparse
import csv

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("--method", required=True)
    ap.add_argument("--column", required=True)
    ap.add_argument("--reference", type=float, required=True)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--against", choices=("ndof", "ntri"), default="ndof")
    ap.add_argument("--last", type=int, default=3, help="number of final levels in the fit")
    args = ap.parse_args()
    rows = [r for r in csv.DictReader(open(args.csv))
            if r["method"] == args.method and int(r["k"]) == args.k and r[args.column]]
    n = np.array([float(r[args.against]) for r in rows])
    err = np.abs(np.array([float(r[args.column]) for r in rows]) - args.reference)
    for a, b, c, d in zip(n[:-1], n[1:], err[:-1], err[1:]):
        print(f"{int(a):>9d} -> {int(b):>9d}: rate {np.log(c / d) / np.log(b / a):.3f}")
    tail = slice(-args.last, None)
    print(f"fit over last {args.last}: {-np.polyfit(np.log(n[tail]), np.log(err[tail]), 1)[0]:.3f}")


if __name__ == "__main__":
    main()
