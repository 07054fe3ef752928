#!/usr/bin/env python3
"""Error against work (f-evaluations) for SAM-RK3 and SAM-RK4, plus fitted slopes.

    python3 scripts/efficiency.py --omega 256pi --out results/efficiency.csv

Output rows: method, omega, N, work, error. Slopes of log(error) against
log(N) and log(work) per method are printed to stdout.
"""

import argparse
import csv
import pathlib
import sys

from samdde.harness import error_grid, fit_lines, format_omega, parse_omega


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega", default="256pi", help="comma list, e.g. 128pi,256pi")
    ap.add_argument("--N", default="1,2,4,8,16")
    ap.add_argument("--methods", default="sam-rk3,sam-rk4")
    ap.add_argument("--min-macro-periods", type=float, default=3.0)
    ap.add_argument("--out", type=pathlib.Path, default=None)
    args = ap.parse_args()
    omegas = [parse_omega(t) for t in args.omega.split(",")]
    Ns = [int(x) for x in args.N.split(",")]

    rows = [("method", "omega", "N", "work", "error")]
    for method in args.methods.split(","):
        g = error_grid("toggle", method, omegas, Ns, min_macro_periods=args.min_macro_periods)
        for om in omegas:
            for N in Ns:
                c = g.cell(N, om)
                if c.status == "ok":
                    rows.append((method, format_omega(om), N, c.work, f"{c.error:.5e}"))
        for f in fit_lines(g):
            if f.slope is not None:
                print(f"{method:8s} {f.fit:5s} {f.line:14s} slope {f.slope:+.3f}  rms {f.residual:.3f}")

    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    csv.writer(fh, lineterminator="\n").writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
