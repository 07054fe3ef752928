"""Command line front end: ``samdde {solve,table,order,propcheck}``.

All output is CSV (UTF-8, LF, '.' decimal separator). Exit codes: 0 success,
2 invalid (N, Omega) configuration, 3 bad arguments, 4 numerical blow-up.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings

from .benchmarks import get_problem
from .harness import error_grid, fit_lines, format_omega, parse_omega, propcheck_rows
from .oscproblem import ProviderMiss
from .sam import BlowUpError, CaseMismatch, SAMConfig, ValidityError, solve, validity_check
from .tableau import StageEvaluationError

EXIT_OK, EXIT_INVALID, EXIT_ARGS, EXIT_BLOWUP = 0, 2, 3, 4

PROBLEMS = ("toggle", "scaled-toggle", "synthetic", "zero")
METHODS = ("sam-rk2", "sam-rk3", "sam-rk4")


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _num(x: float) -> str:
    return f"{x:.5e}"


def _list(conv):
    def parse(text):
        try:
            vals = [conv(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if not vals:
            raise argparse.ArgumentTypeError("empty list")
        return vals

    return parse


def _positive_int(t):
    v = int(t)
    if v < 1:
        raise ValueError(f"expected a positive integer, got {t!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="samdde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, single):
        p.add_argument("--problem", choices=PROBLEMS, default="toggle")
        p.add_argument("--method", choices=METHODS, default="sam-rk4")
        p.add_argument("--omega", type=_list(parse_omega), required=True,
                       help="comma list; tokens like 16pi or 50")
        p.add_argument("--N", type=_list(_positive_int), required=True, dest="N",
                       help="macro steps per segment span (comma list)")
        p.add_argument("--micro-per-period", type=_positive_int, default=None,
                       help="micro steps per fast period (default 2N)")
        p.add_argument("--min-macro-periods", type=float, default=1.0,
                       help="smallest admissible H/T; 3 keeps H well above one period")
        p.add_argument("--out", default="-")
        if not single:
            p.add_argument("--metric", choices=("strobo", "endpoint"), default="strobo")
            p.add_argument("--component", type=_positive_int, default=1, help="1-based")
            p.add_argument("--ref-K", type=_positive_int, default=None,
                           help="reference steps per segment (default: 128 per period)")
            p.add_argument("--jobs", type=_positive_int, default=1)

    p = sub.add_parser("solve", help="solve one (Omega, N) and print the macro grid")
    common(p, single=True)
    p.add_argument("--case", choices=("auto", "force1", "force2"), default="auto")

    p = sub.add_parser("table", help="error grid over N (rows) and Omega (columns)")
    common(p, single=False)
    p.add_argument("--work-out", default=None, help="also write the f-evaluation grid here")

    p = sub.add_parser("order", help="fitted convergence slopes of the error grid")
    common(p, single=False)

    sub.add_parser("propcheck", help="whole-period exactness and aliasing of the RK tableaus")
    return parser


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def cmd_solve(args) -> int:
    if len(args.omega) != 1 or len(args.N) != 1:
        raise _ArgError("solve takes exactly one --omega and one --N")
    p = get_problem(args.problem, args.omega[0])
    cfg = SAMConfig.builtin(args.method, args.N[0], args.micro_per_period,
                            min_macro_periods=args.min_macro_periods)
    v = validity_check(p, cfg)
    if v is not None:
        print(f"error: {v}", file=sys.stderr)
        return EXIT_INVALID
    try:
        sol = solve(p, cfg, args.case)
    except CaseMismatch as exc:
        raise _ArgError(str(exc)) from exc
    rows = [["segment", "n", "t"] + [f"x{i + 1}" for i in range(p.dim)]]
    for ell, n, t, x in sol.rows():
        rows.append([ell, n, _num(t)] + [_num(v) for v in x])
    _write(args.out, _csv(rows))
    return EXIT_OK


def _grid(args):
    return error_grid(
        args.problem, args.method, args.omega, args.N, args.metric, args.component - 1,
        args.micro_per_period, args.ref_K, args.min_macro_periods, args.jobs,
    )


def _grid_csv(grid, attr) -> str:
    rows = [["N"] + [format_omega(om) for om in grid.omegas]]
    for N in grid.Ns:
        row = [N]
        for om in grid.omegas:
            c = grid.cell(N, om)
            row.append(_num(getattr(c, attr)) if c.status == "ok" else c.status)
        rows.append(row)
    return _csv(rows)


def cmd_table(args) -> int:
    grid = _grid(args)
    _write(args.out, _grid_csv(grid, "error"))
    if args.work_out:
        rows = [["N"] + [format_omega(om) for om in grid.omegas]]
        for N in grid.Ns:
            rows.append([N] + [str(grid.cell(N, om).work) if grid.cell(N, om).status == "ok"
                               else grid.cell(N, om).status for om in grid.omegas])
        _write(args.work_out, _csv(rows))
    return EXIT_OK


def cmd_order(args) -> int:
    grid = _grid(args)
    rows = [["fit", "line", "slope", "residual", "points"]]
    for f in fit_lines(grid):
        rows.append([f.fit, f.line,
                     "NA" if f.slope is None else f"{f.slope:.4f}",
                     "NA" if f.residual is None else f"{f.residual:.4f}",
                     f.points])
    _write(args.out, _csv(rows))
    return EXIT_OK


def cmd_propcheck(args) -> int:
    rows = [["tableau", "M", "direction", "case", "k", "defect", "expected", "pass"]]
    ok = True
    for r in propcheck_rows():
        ok &= bool(r["ok"])
        rows.append([r["tableau"], r["M"], r["direction"], r["case"], r["k"],
                     f"{r['defect']:.3e}", f"{r['expected']:.3e}", "pass" if r["ok"] else "FAIL"])
    sys.stdout.write(_csv(rows))
    return EXIT_OK if ok else 1


COMMANDS = {"solve": cmd_solve, "table": cmd_table, "order": cmd_order, "propcheck": cmd_propcheck}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        odd = [N for N in getattr(args, "N", []) if N & (N - 1)]
        if odd:
            print(f"warning: N={','.join(map(str, odd))} not a power of two; "
                  "stroboscopic nodes may be sparse", file=sys.stderr)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return COMMANDS[args.command](args)
    except _ArgError as exc:
        print(f"samdde: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except ValidityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (BlowUpError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ProviderMiss, StageEvaluationError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
