#!/usr/bin/env python3
"""Successive-doubling slopes log2(e_N / e_2N) along each frequency column.

Shows how far a column is from its asymptotic order; useful when a global
least-squares fit over N = 1..8 mixes pre-asymptotic and asymptotic points.

    python3 scripts/local_slopes.py --method sam-rk3 --omega 64pi,128pi,256pi
"""

import argparse
import math

from samdde.harness import error_grid, format_omega, parse_omega


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--method", default="sam-rk3")
    ap.add_argument("--omega", default="64pi,128pi,256pi")
    ap.add_argument("--N", default="1,2,4,8,16")
    ap.add_argument("--m", type=int, default=None, help="micro steps per period (default 2N)")
    ap.add_argument("--min-macro-periods", type=float, default=3.0)
    args = ap.parse_args()
    omegas = [parse_omega(t) for t in args.omega.split(",")]
    Ns = [int(x) for x in args.N.split(",")]
    g = error_grid("toggle", args.method, omegas, Ns, m=args.m, min_macro_periods=args.min_macro_periods)
    for om in omegas:
        errs = [(N, g.value(N, om)) for N in Ns if g.value(N, om) is not None]
        local = [f"{a[0]}->{b[0]}: {math.log2(b[1] / a[1]):+.2f}"
                 for a, b in zip(errs, errs[1:])]
        print(f"{format_omega(om):>8s}  " + "  ".join(local))


if __name__ == "__main__":
    main()
