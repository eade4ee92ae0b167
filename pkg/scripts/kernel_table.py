"""Tabulate Ain(n, x) and its first derivatives on a grid and save as CSV.

    python3 scripts/kernel_table.py --n 2 --xmin -10 --xmax 10 --points 401 --out ain_n2.csv
"""

import argparse

import numpy as np

from gkdv import airy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--xmin", type=float, default=-10.0)
    ap.add_argument("--xmax", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=401)
    ap.add_argument("--orders", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--out", default="ain.csv")
    args = ap.parse_args()

    x = np.linspace(args.xmin, args.xmax, args.points)
    vals = airy.evaluator(args.n)(x, tuple(args.orders))
    header = "x," + ",".join(f"d{k}" for k in args.orders)
    np.savetxt(args.out, np.column_stack([x, vals.T]), delimiter=",", header=header, comments="")
    print(f"wrote {args.out} ({args.points} rows)")


if __name__ == "__main__":
    main()
