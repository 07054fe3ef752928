"""(N, Omega) error grids, slope fits and the exactness suite shared by the CLI and scripts."""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .benchmarks import get_problem
from .reference import (
    GridMisalignment,
    endpoint_error,
    loglog_fit,
    max_strobo_error,
    reference_with_floor,
)
from .sam import SAMConfig, solve, validity_check
from .tableau import alias_defect, builtin_tableaus, quadrature_exactness_check

__all__ = [
    "parse_omega",
    "format_omega",
    "Cell",
    "ErrorGrid",
    "error_grid",
    "fit_lines",
    "propcheck_rows",
]

_OMEGA_RE = re.compile(r"^\s*([0-9]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s*\*?\s*(pi|π)?\s*$")


def parse_omega(token: str) -> float:
    """'16pi' -> 16*math.pi, '50' -> 50.0, 'pi' -> math.pi."""
    m = _OMEGA_RE.match(token)
    if not m or (not m.group(1) and not m.group(2)):
        raise ValueError(f"cannot parse frequency {token!r}")
    coef = float(m.group(1)) if m.group(1) else 1.0
    value = coef * math.pi if m.group(2) else coef
    if not value > 0:
        raise ValueError(f"frequency must be positive, got {token!r}")
    return value


def format_omega(omega: float) -> str:
    k = omega / math.pi
    if abs(k - round(k)) < 1e-12 * max(1.0, k):
        return f"{round(k)}pi"
    return f"{omega:g}"


@dataclass
class Cell:
    N: int
    omega: float
    status: str  # "ok", "***" (invalid configuration) or "ERR"
    error: float | None = None
    work: int | None = None
    note: str = ""


@dataclass
class ErrorGrid:
    problem: str
    method: str
    metric: str
    component: int
    omegas: list[float]
    Ns: list[int]
    cells: dict[tuple[int, float], Cell] = field(default_factory=dict)
    floors: dict[float, float] = field(default_factory=dict)

    def cell(self, N: int, omega: float) -> Cell:
        return self.cells[(N, omega)]

    def value(self, N: int, omega: float) -> float | None:
        c = self.cells[(N, omega)]
        return c.error if c.status == "ok" else None


def _column(args):
    problem, method, metric, component, omega, Ns, m, ref_K, min_periods = args
    p = get_problem(problem, omega)
    cells = []
    cfgs = {}
    for N in Ns:
        cfg = SAMConfig.builtin(method, N, m, min_macro_periods=min_periods)
        v = validity_check(p, cfg)
        if v is not None:
            cells.append(Cell(N, omega, "***", note=str(v)))
        else:
            cfgs[N] = cfg
    floor = float("nan")
    if cfgs:
        ref = reference_with_floor(p, ref_K, component)
        floor = ref.floor
    for N in Ns:
        if N not in cfgs:
            continue
        try:
            sol = solve(p, cfgs[N])
            if metric == "strobo":
                rep = max_strobo_error(sol, ref, component)
            else:
                rep = endpoint_error(sol, ref, component)
            cells.append(Cell(N, omega, "ok", rep.value, sol.f_evals))
        except (GridMisalignment, FloatingPointError, ArithmeticError, ValueError) as exc:
            cells.append(Cell(N, omega, "ERR", note=repr(exc)))
    return omega, floor, cells


def error_grid(
    problem: str,
    method: str,
    omegas: list[float],
    Ns: list[int],
    metric: str = "strobo",
    component: int = 0,
    m: int | None = None,
    ref_K: int | None = None,
    min_macro_periods: float = 1.0,
    jobs: int = 1,
) -> ErrorGrid:
    """Errors of one method over every (N, Omega) cell; one reference per Omega."""
    if metric not in ("strobo", "endpoint"):
        raise ValueError(f"unknown metric {metric!r}")
    args = [
        (problem, method, metric, component, om, list(Ns), m, ref_K, min_macro_periods)
        for om in omegas
    ]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_column, args))
    else:
        results = [_column(a) for a in args]
    grid = ErrorGrid(problem, method, metric, component, list(omegas), list(Ns))
    for omega, floor, cells in results:
        grid.floors[omega] = floor
        for c in cells:
            grid.cells[(c.N, omega)] = c
    return grid


@dataclass
class FitLine:
    fit: str  # "N", "omega" or "work"
    line: str
    slope: float | None
    residual: float | None
    points: int


def fit_lines(grid: ErrorGrid, min_points: int = 3) -> list[FitLine]:
    """Slopes along each Omega column (vs N and vs work) and each N row (vs Omega).

    Cells within ten times the reference floor are left out.
    """

    def usable(N, om):
        c = grid.cells[(N, om)]
        fl = grid.floors.get(om, 0.0)
        return c.status == "ok" and c.error > 0 and not (c.error <= 10 * fl)

    out = []

    def add(fit, label, xs, es):
        if len(xs) < min_points:
            out.append(FitLine(fit, label, None, None, len(xs)))
        else:
            s, r = loglog_fit(xs, es)
            out.append(FitLine(fit, label, s, r, len(xs)))

    for om in grid.omegas:
        Ns = [N for N in grid.Ns if usable(N, om)]
        label = f"omega={format_omega(om)}"
        add("N", label, Ns, [grid.cells[(N, om)].error for N in Ns])
        add("work", label, [grid.cells[(N, om)].work for N in Ns],
            [grid.cells[(N, om)].error for N in Ns])
    for N in grid.Ns:
        oms = [om for om in grid.omegas if usable(N, om)]
        add("omega", f"N={N}", oms, [grid.cells[(N, om)].error for om in oms])
    return out


def propcheck_rows(Ms=(1, 4, 8, 16), seed: int = 2024):
    """Whole-period exactness of every built-in tableau on trigonometric polynomials.

    Yields dicts with keys tableau, M, direction, case, k, defect, expected, ok.
    Non-alias rows use all modes 1 <= |k| < M with random complex amplitudes
    and must vanish to 1e-12 * sum|amp|. Alias rows use the single mode k = M
    and must match the closed-form defect to 1e-12.
    """
    rng = np.random.default_rng(seed)
    for name, tab in builtin_tableaus().items():
        for M in Ms:
            for direction in (1, -1):
                ks = [k for k in range(-(M - 1), M) if k != 0]
                if ks:
                    amps = rng.normal(size=len(ks)) + 1j * rng.normal(size=len(ks))
                    modes = list(zip(ks, amps))
                    d = quadrature_exactness_check(tab, modes, M, direction)
                    scale = float(np.sum(np.abs(amps)))
                    yield dict(tableau=name, M=M, direction=direction, case="exact",
                               k=max(ks), defect=d, expected=0.0, ok=d <= 1e-12 * scale)
                d = quadrature_exactness_check(tab, [(M, 1.0)], M, direction)
                want = alias_defect(tab, M, M)
                yield dict(tableau=name, M=M, direction=direction, case="alias",
                           k=M, defect=d, expected=want, ok=abs(d - want) <= 1e-12 and want > 0)
