"""Brute-force reference solutions and error metrics.

The oracle is the method of steps with fixed-step classical RK4 on every
segment. Segment l at step j, stage jp reads segment l-1's stage value at the
same (j, jp), so delayed arguments are exact node values and the comparison
carries no interpolation error. Unlike the averaging engine, the oracle uses
the true absolute phase Omega (t + (l-1) tau).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .oscproblem import OscDDEProblem, classify_case, history_eval, segment_phase_offset
from .sam import BlowUpError, StroboscopicSolution
from .tableau import rk4_classical, rk_step

__all__ = [
    "ReferenceSolution",
    "ErrorReport",
    "GridMisalignment",
    "reference_solve",
    "reference_with_floor",
    "default_reference_K",
    "max_strobo_error",
    "endpoint_error",
    "observed_order",
    "loglog_fit",
    "richardson_ratio",
]

STROBO_TOL = 1e-9


class GridMisalignment(ValueError):
    pass


@dataclass
class ReferenceSolution:
    problem: OscDDEProblem
    K: int
    segments: list[np.ndarray]  # each (K+1, D)
    stages: list[np.ndarray]  # each (K, 4, D)
    floor: float | None = None  # estimated max error of this solution, if known

    @property
    def step(self) -> float:
        return self.problem.delay / self.K

    def value_at(self, ell: int, t_local: float) -> np.ndarray:
        q = t_local / self.step
        j = round(q)
        if abs(q - j) > 1e-9 * max(1.0, abs(q)) or not 0 <= j <= self.K:
            raise GridMisalignment(
                f"local time {t_local!r} of segment {ell} is not a reference node (h={self.step!r})"
            )
        return self.segments[ell - 1][j]

    def final_value(self) -> np.ndarray:
        return self.segments[-1][-1]


@dataclass(frozen=True)
class ErrorReport:
    metric: str
    component: int
    value: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.value >= 0) or math.isnan(self.value):
            raise ValueError(f"invalid error value {self.value!r}")


def default_reference_K(problem: OscDDEProblem, steps_per_period: int = 128) -> int:
    """Steps per segment giving about ``steps_per_period`` steps per fast period.

    For whole-period delays K is a multiple of the periods in the delay, so
    every stroboscopic time is a grid node.
    """
    case = classify_case(problem)
    if case.is_case1:
        return case.periods_in_delay * steps_per_period
    return int(math.ceil(problem.delay / problem.period * steps_per_period))


def reference_solve(problem: OscDDEProblem, K: int | None = None) -> ReferenceSolution:
    """Fixed-step RK4 method of steps with K steps per segment."""
    if K is None:
        K = default_reference_K(problem)
    if K < 2:
        raise ValueError("K must be >= 2")
    tau = problem.delay
    h = tau / K
    if h > problem.period / 10:
        warnings.warn(
            f"reference step {h:.3g} does not resolve the fast period {problem.period:.3g}",
            stacklevel=2,
        )
    tab = rk4_classical()
    s = tab.stage_count
    omega = problem.omega
    y = history_eval(problem, 0.0).astype(float)
    segs, stages_all = [], []
    prev = None
    for ell in range(1, problem.segments + 1):
        offset = segment_phase_offset(omega, tau, ell)
        slow = (ell - 1) * tau
        if prev is None:
            def delayed(t, key):
                return history_eval(problem, t - tau)
        else:
            def delayed(t, key, prev=prev):
                return prev[key]

        def rhs(t, x, key, offset=offset, slow=slow, delayed=delayed):
            return problem.rhs(x, delayed(t, key), t + slow, offset + omega * t, omega)

        X = np.empty((K + 1,) + y.shape)
        st = np.empty((K, s) + y.shape)
        X[0] = y
        for j in range(K):
            y, rec = rk_step(tab, rhs, j * h, y, h, [(j, jp) for jp in range(s)])
            if not np.all(np.isfinite(y)):
                raise BlowUpError("reference integration", j)
            X[j + 1] = y
            st[j] = rec.stage_states
        segs.append(X)
        stages_all.append(st)
        prev = st
    return ReferenceSolution(problem, K, segs, stages_all)


def _strobo_indices(times: np.ndarray, T: float):
    q = times / T
    return np.nonzero(np.abs(q - np.round(q)) <= STROBO_TOL)[0]


def max_strobo_error(
    sol: StroboscopicSolution | ReferenceSolution,
    ref: ReferenceSolution,
    component: int = 0,
) -> ErrorReport:
    """Max |X^(l)_n - x^(l)(nH)| over macro nodes at whole periods of segment time.

    For whole-period delays segment-local and absolute stroboscopic times coincide.
    """
    T = ref.problem.period
    worst = 0.0
    count = 0
    if isinstance(sol, ReferenceSolution):
        grids = [(np.arange(sol.K + 1) * sol.step, X) for X in sol.segments]
    else:
        grids = [(sol.local_times(), X) for X in sol.segments]
    for ell, (times, X) in enumerate(grids, start=1):
        for n in _strobo_indices(times, T):
            err = abs(X[n][component] - ref.value_at(ell, times[n])[component])
            worst = max(worst, float(err))
            count += 1
    return ErrorReport("max_strobo", component, worst, {"compared": count, "floor": ref.floor})


def endpoint_error(
    sol: StroboscopicSolution | ReferenceSolution,
    ref: ReferenceSolution,
    component: int = 0,
) -> ErrorReport:
    """|x(t_max) error| in one component."""
    err = abs(sol.final_value()[component] - ref.final_value()[component])
    return ErrorReport("endpoint", component, float(err), {"floor": ref.floor})


def reference_with_floor(problem: OscDDEProblem, K: int | None = None, component: int = 0) -> ReferenceSolution:
    """Reference at 2K steps; ``floor`` is its Richardson error estimate vs the K-step run.

    For a fourth-order method the finer run's error is about |x_K - x_2K| / 15.
    The estimate is the max over every node of the coarse grid.
    """
    if K is None:
        K = default_reference_K(problem)
    coarse = reference_solve(problem, K)
    fine = reference_solve(problem, 2 * K)
    diff = max(
        float(np.max(np.abs(c[:, component] - f[::2, component])))
        for c, f in zip(coarse.segments, fine.segments)
    )
    fine.floor = diff / 15.0
    return fine


def richardson_ratio(problem: OscDDEProblem, K: int, component: int = 0) -> float:
    """|x_K - x_2K| / |x_2K - x_4K| at t_max; about 16 for a fourth-order oracle."""
    a, b, c = (reference_solve(problem, k).final_value()[component] for k in (K, 2 * K, 4 * K))
    return float(abs(a - b) / abs(b - c))


def loglog_fit(xs: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of log(error) against log(x), and the RMS residual."""
    x = np.log(np.asarray(xs, dtype=float))
    e = np.asarray(errors, dtype=float)
    if len(x) < 3 or len(x) != len(e):
        raise ValueError("need at least three (x, error) pairs")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("errors must be positive and finite")
    if np.ptp(x) == 0:
        raise ValueError("abscissas must not all coincide")
    y = np.log(e)
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return float(slope), resid


def observed_order(points: Sequence[tuple[float, float]], floor: float | None = None) -> float:
    """Fitted slope of log(error) vs log(N) from (N, error) pairs.

    With ``floor`` given, every error must exceed ten times it.
    """
    if floor is not None and any(e <= 10 * floor for _, e in points):
        raise ValueError("errors too close to the reference accuracy floor")
    return loglog_fit([n for n, _ in points], [e for _, e in points])[0]
