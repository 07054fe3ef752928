#!/usr/bin/env python3
"""Write the four SAM-RK4 error tables (whole-period and fractional delays) as CSV.

    python3 scripts/reproduce_tables.py --out results/ --jobs 4

Cells whose macro step would be shorter than --min-macro-periods fast periods,
or whose stencil windows leave the segment, are written as ***.
"""

import argparse
import math
import pathlib
import time

from samdde.cli import _grid_csv
from samdde.harness import error_grid

PI = math.pi
TABLES = {
    "toggle_whole_period": ("toggle", "strobo", [16 * PI, 32 * PI, 64 * PI, 128 * PI, 256 * PI]),
    "scaled_whole_period": ("scaled-toggle", "strobo", [16 * PI, 32 * PI, 64 * PI, 128 * PI, 256 * PI]),
    "toggle_fractional": ("toggle", "endpoint", [50.0, 100.0, 200.0, 400.0, 800.0]),
    "scaled_fractional": ("scaled-toggle", "endpoint", [50.0, 100.0, 200.0, 400.0, 800.0]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    ap.add_argument("--N", default="1,2,4,8,16")
    ap.add_argument("--method", default="sam-rk4")
    ap.add_argument("--min-macro-periods", type=float, default=3.0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", choices=sorted(TABLES), action="append")
    args = ap.parse_args()
    Ns = [int(x) for x in args.N.split(",")]
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.only or TABLES:
        problem, metric, omegas = TABLES[name]
        t0 = time.perf_counter()
        grid = error_grid(problem, args.method, omegas, Ns, metric,
                          min_macro_periods=args.min_macro_periods, jobs=args.jobs)
        path = args.out / f"{name}_{args.method}.csv"
        path.write_text(_grid_csv(grid, "error"), encoding="utf-8")
        print(f"{path}  ({time.perf_counter() - t0:.1f} s)")
        print(path.read_text(), end="")


if __name__ == "__main__":
    main()
