"""Stroboscopic averaging for oscillatory delay problems.

Each segment x^(l) on [0, tau] is advanced by a macro Runge-Kutta method
applied to its (never formed) averaged system. Every macro stage needs the
averaged vector field at a state w; it is recovered by micro-integrating the
oscillatory segment equation over whole periods from w and differencing the
period-end values with a finite-difference stencil.

The delayed argument of segment l during a micro stage is the stage value that
segment l-1 produced at the same (macro step, macro stage, direction, micro
step, micro stage). That is exactly what the micro method would do on the
stacked system of all segments, so no interpolation ever happens.

Phase convention: a micro-integration started at macro stage time theta sees
phase ``phase_offset(l) + Omega * elapsed``, never ``Omega * theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import stencil as _stencil
from .oscproblem import (
    CaseInfo,
    CaseKind,
    OscDDEProblem,
    ProviderMiss,
    SegmentRhs,
    classify_case,
    history_eval,
    history_provider,
    segment_rhs,
)
from .stencil import Stencil, StencilSchedule, builtin_schedules
from .tableau import ButcherTableau, builtin_tableaus, rk_step

__all__ = [
    "SAMConfig",
    "MicroStore",
    "StroboscopicSolution",
    "Violation",
    "ValidityError",
    "BlowUpError",
    "CaseMismatch",
    "METHODS",
    "micro_propagate",
    "eval_averaged_rhs",
    "macro_integrate_segment",
    "validity_check",
    "choose_stencil",
    "solve",
    "solve_case1",
    "solve_case2",
]

METHODS = {"sam-rk2": "RK2", "sam-rk3": "RK3", "sam-rk4": "RK4"}


class ValidityError(ValueError):
    def __init__(self, violation: "Violation"):
        super().__init__(str(violation))
        self.violation = violation


class BlowUpError(FloatingPointError):
    def __init__(self, where: str, step: int):
        super().__init__(f"non-finite state in {where} at step {step}")
        self.step = step


class CaseMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SAMConfig:
    """Macro/micro methods, stencil schedule and step counts.

    H = span / macro_steps and h = T / micro_steps_per_period. When
    ``micro_steps_per_period`` is None it defaults to 2 * macro_steps.
    ``min_macro_periods`` is the smallest admissible H / T.
    """

    macro_tableau: ButcherTableau
    micro_tableau: ButcherTableau
    schedule: StencilSchedule
    macro_steps: int
    micro_steps_per_period: int | None = None
    min_macro_periods: float = 1.0
    tol_case: float = 1e-9
    name: str = ""

    def __post_init__(self):
        if self.macro_steps < 1:
            raise ValueError("macro_steps must be >= 1")
        if self.micro_steps_per_period is None:
            object.__setattr__(self, "micro_steps_per_period", 2 * self.macro_steps)
        if self.micro_steps_per_period < 1:
            raise ValueError("micro_steps_per_period must be >= 1")

    @property
    def N(self) -> int:
        return self.macro_steps

    @property
    def m(self) -> int:
        return self.micro_steps_per_period

    @classmethod
    def builtin(cls, method: str, N: int, m: int | None = None, **kw) -> "SAMConfig":
        key = method.lower()
        if key not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {sorted(METHODS)}")
        tab = builtin_tableaus()[METHODS[key]]
        return cls(tab, tab, builtin_schedules(key.upper()), N, m, name=key, **kw)


class MicroStore:
    """Stage values of one segment's micro-integrations, keyed by integer tuples.

    Sweep keys are ``(n, j, direction, nu, jp)``: macro step, macro stage,
    +1/-1, micro step, micro stage. Tail keys are ``(nu, jp)``.
    """

    def __init__(self):
        self._sweeps: dict[tuple[int, int, int], np.ndarray] = {}
        self._tail: np.ndarray | None = None

    def put_sweep(self, n: int, j: int, direction: int, stages: np.ndarray) -> None:
        stages.setflags(write=False)
        self._sweeps[(n, j, direction)] = stages

    def put_tail(self, stages: np.ndarray) -> None:
        stages.setflags(write=False)
        self._tail = stages

    def lookup(self, key: tuple) -> np.ndarray:
        try:
            if len(key) == 5:
                n, j, d, nu, jp = key
                return self._sweeps[(n, j, d)][nu, jp]
            if len(key) == 2 and self._tail is not None:
                return self._tail[key[0], key[1]]
        except (KeyError, IndexError):
            pass
        raise ProviderMiss(f"no stored stage value at key {key}")

    def __len__(self):
        n = sum(a.shape[0] * a.shape[1] for a in self._sweeps.values())
        if self._tail is not None:
            n += self._tail.shape[0] * self._tail.shape[1]
        return n

    def keys(self):
        for (n, j, d), a in self._sweeps.items():
            for nu in range(a.shape[0]):
                for jp in range(a.shape[1]):
                    yield (n, j, d, nu, jp)
        if self._tail is not None:
            for nu in range(self._tail.shape[0]):
                for jp in range(self._tail.shape[1]):
                    yield (nu, jp)


@dataclass
class StroboscopicSolution:
    """Macro-grid values per segment.

    ``segments[l-1][n]`` approximates x^(l)(n H) (in segment-local time).
    ``tails[l-1]`` is the Case II value at local time tau. ``starts[l-1]`` is the
    initial value handed to segment l.
    """

    problem: OscDDEProblem
    config: SAMConfig
    case: CaseInfo
    span: float
    segments: list[np.ndarray]
    starts: list[np.ndarray]
    tails: list[np.ndarray] = field(default_factory=list)
    f_evals: int = 0

    @property
    def macro_step(self) -> float:
        return self.span / self.config.N

    def local_times(self) -> np.ndarray:
        return np.arange(self.config.N + 1) * self.macro_step

    def final_value(self) -> np.ndarray:
        if self.tails:
            return self.tails[-1]
        return self.segments[-1][-1]

    def rows(self):
        """(segment, n, absolute time, state) for every macro node."""
        tau = self.problem.delay
        H = self.macro_step
        for ell, X in enumerate(self.segments, start=1):
            for n, x in enumerate(X):
                yield ell, n, (ell - 1) * tau + n * H, x


@dataclass(frozen=True)
class Violation:
    n: int
    j: int
    k: int
    reason: str

    def __str__(self):
        return f"invalid configuration at macro step n={self.n}, stage j={self.j}, offset k={self.k}: {self.reason}"


# --------------------------------------------------------------------------- stencils


def choose_stencil(schedule: StencilSchedule, theta: float, span: float, T: float) -> Stencil:
    """Interior stencil unless its window would leave [0, span]."""
    tol = 1e-9 * span
    inner = schedule.interior
    if theta + inner.k_min * T < -tol:
        return schedule.at_start
    if theta + inner.k_max * T > span + tol and schedule.at_end is not None:
        return schedule.at_end
    return inner


def validity_check(problem: OscDDEProblem, cfg: SAMConfig, case: CaseInfo | None = None):
    """Return None if every macro stage's stencil window fits, else the first Violation."""
    if case is None:
        case = classify_case(problem, cfg.tol_case)
    T = case.period
    span = problem.delay if case.is_case1 else case.periods_in_delay * T
    H = span / cfg.N
    tol = 1e-9 * span
    if H < cfg.min_macro_periods * T - tol:
        return Violation(
            0, 0, 0, f"macro step H={H:.6g} is below {cfg.min_macro_periods:g} fast periods (T={T:.6g})"
        )
    c = cfg.macro_tableau.abscissas
    for n in range(cfg.N):
        for j, cj in enumerate(c):
            theta = (n + cj) * H
            st = choose_stencil(cfg.schedule, theta, span, T)
            if theta + st.k_min * T < -tol:
                return Violation(n, j, st.k_min, "backward window starts before segment time 0")
            if theta + st.k_max * T > span + tol:
                return Violation(n, j, st.k_max, f"forward window ends after segment time {span:.6g}")
    return None


# --------------------------------------------------------------------------- micro level


class _Work:
    __slots__ = ("f_evals",)

    def __init__(self):
        self.f_evals = 0


def micro_propagate(
    srhs: SegmentRhs,
    y0: np.ndarray,
    t0: float,
    direction: int,
    periods: int,
    cfg: SAMConfig,
    store_sink: Callable[[np.ndarray], None] | None = None,
    key_prefix: tuple = (),
    checkpoints: list | None = None,
    work: _Work | None = None,
) -> np.ndarray:
    """Integrate the oscillatory segment equation over ``direction * periods * T``.

    Starts from ``y0`` at local segment time ``t0``; stage ``jp`` of micro step
    ``nu`` is handed the delayed value stored under ``key_prefix + (nu, jp)``.
    The stage states, shape (periods*m, stages, D), go to ``store_sink``.
    Period-end values are appended to ``checkpoints`` when it is given.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if periods < 1:
        raise ValueError("periods must be >= 1")
    p = srhs.problem
    m = cfg.m
    h = p.period / m
    dt = direction * h
    omega = p.omega
    offset = srhs.phase_offset
    tab = cfg.micro_tableau
    s = tab.stage_count
    steps = periods * m
    y = np.asarray(y0, dtype=float)
    stages = np.empty((steps, s) + y.shape)

    def rhs(el, x, key):
        return srhs(x, t0 + el, offset + omega * el, key)

    for nu in range(steps):
        keys = [key_prefix + (nu, jp) for jp in range(s)]
        y, rec = rk_step(tab, rhs, nu * dt, y, dt, keys)
        if not np.all(np.isfinite(y)):
            raise BlowUpError("micro-integration", nu)
        stages[nu] = rec.stage_states
        if checkpoints is not None and (nu + 1) % m == 0:
            checkpoints.append(y)
    if work is not None:
        work.f_evals += steps * s
    if store_sink is not None:
        store_sink(stages)
    return y


class _SegmentSolver:
    def __init__(self, problem, cfg, ell, span, prev_store, work):
        if ell == 1:
            provider = history_provider(problem)
        else:
            provider = lambda key, t: prev_store.lookup(key)  # noqa: E731
        self.problem = problem
        self.cfg = cfg
        self.ell = ell
        self.span = span
        self.srhs = segment_rhs(problem, ell, provider)
        self.store = MicroStore()
        self.work = work
        self.T = problem.period

    def averaged_rhs(self, n: int, j: int, theta: float, w: np.ndarray, which: str | None = None):
        sch = self.cfg.schedule
        if which is None:
            st = choose_stencil(sch, theta, self.span, self.T)
        else:
            st = {"interior": sch.interior, "at_start": sch.at_start, "at_end": sch.at_end}[which]
            if st is None:
                raise ValueError("schedule has no at_end stencil")
        tol = 1e-9 * self.span
        if theta + st.k_min * self.T < -tol or theta + st.k_max * self.T > self.span + tol:
            raise ValidityError(Violation(n, j, st.k_min, "stencil window leaves the segment"))
        values = {0: np.asarray(w, dtype=float)}
        for direction, periods in ((1, st.forward_periods), (-1, st.backward_periods)):
            if periods == 0:
                continue
            cps: list = []
            micro_propagate(
                self.srhs,
                w,
                theta,
                direction,
                periods,
                self.cfg,
                store_sink=lambda a, d=direction: self.store.put_sweep(n, j, d, a),
                key_prefix=(n, j, direction),
                checkpoints=cps,
                work=self.work,
            )
            for k, v in enumerate(cps, start=1):
                values[direction * k] = v
        return _stencil.apply(st, [values[k] for k in st.offsets], self.T)

    def macro(self, X0: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        H = self.span / cfg.N
        tab = cfg.macro_tableau
        X = np.empty((cfg.N + 1,) + np.shape(X0))
        X[0] = X0
        rhs = lambda theta, w, nj: self.averaged_rhs(nj[0], nj[1], theta, w)  # noqa: E731
        for n in range(cfg.N):
            X[n + 1], _ = rk_step(tab, rhs, n * H, X[n], H, [(n, j) for j in range(tab.stage_count)])
            if not np.all(np.isfinite(X[n + 1])):
                raise BlowUpError("macro-integration", n)
        return X

    def tail(self, y0: np.ndarray, case: CaseInfo) -> np.ndarray:
        """Integrate the oscillatory equation itself from M T to tau."""
        p = self.problem
        cfg = self.cfg
        h = p.period / cfg.m
        t_start = case.periods_in_delay * case.period
        r = case.remainder
        q = int(math.floor(r / h * (1 + 1e-12)))
        last = r - q * h
        dts = [h] * q
        if last > 1e-12 * h:
            dts.append(last)
        tab = cfg.micro_tableau
        s = tab.stage_count
        omega = p.omega
        offset = self.srhs.phase_offset
        srhs = self.srhs

        def rhs(el, x, key):
            return srhs(x, t_start + el, offset + omega * el, key)

        y = np.asarray(y0, dtype=float)
        stages = np.empty((len(dts), s) + y.shape)
        for nu, dt in enumerate(dts):
            y, rec = rk_step(tab, rhs, nu * h, y, dt, [(nu, jp) for jp in range(s)])
            if not np.all(np.isfinite(y)):
                raise BlowUpError("tail integration", nu)
            stages[nu] = rec.stage_states
        self.work.f_evals += len(dts) * s
        self.store.put_tail(stages)
        return y


# --------------------------------------------------------------------------- public API


def eval_averaged_rhs(
    problem: OscDDEProblem,
    ell: int,
    stage_time: float,
    w: np.ndarray,
    which: str,
    cfg: SAMConfig,
    prev_store: MicroStore | None = None,
    store: MicroStore | None = None,
    span: float | None = None,
    n: int = 0,
    j: int = 0,
) -> np.ndarray:
    """Finite-difference estimate of the averaged field of segment ``ell`` at ``w``.

    ``which`` is one of ``interior``, ``at_start``, ``at_end``. Stage values of
    the micro-integrations land in ``store`` (when given) under macro indices
    ``(n, j)``.
    """
    if span is None:
        span = problem.delay
    seg = _SegmentSolver(problem, cfg, ell, span, prev_store, _Work())
    if store is not None:
        seg.store = store
    return seg.averaged_rhs(n, j, stage_time, w, which)


def macro_integrate_segment(
    problem: OscDDEProblem,
    ell: int,
    X0: np.ndarray,
    span: float,
    cfg: SAMConfig,
    prev_store: MicroStore | None = None,
) -> tuple[np.ndarray, MicroStore]:
    """Macro grid X^(l)_n, n = 0..N, over [0, span] and the store for segment l+1."""
    seg = _SegmentSolver(problem, cfg, ell, span, prev_store, _Work())
    return seg.macro(np.asarray(X0, dtype=float)), seg.store


def _solve(problem: OscDDEProblem, cfg: SAMConfig, case: CaseInfo) -> StroboscopicSolution:
    v = validity_check(problem, cfg, case)
    if v is not None:
        raise ValidityError(v)
    span = problem.delay if case.is_case1 else case.periods_in_delay * case.period
    work = _Work()
    start = history_eval(problem, 0.0).copy()
    prev = None
    segs, starts, tails = [], [], []
    for ell in range(1, problem.segments + 1):
        seg = _SegmentSolver(problem, cfg, ell, span, prev, work)
        starts.append(start)
        X = seg.macro(start)
        segs.append(X)
        if case.is_case1:
            start = X[-1]
        else:
            start = seg.tail(X[-1], case)
            tails.append(start)
        prev = seg.store
    return StroboscopicSolution(problem, cfg, case, span, segs, starts, tails, work.f_evals)


def solve_case1(problem: OscDDEProblem, cfg: SAMConfig) -> StroboscopicSolution:
    case = classify_case(problem, cfg.tol_case)
    if not case.is_case1:
        raise CaseMismatch(
            f"delay {problem.delay} is not a multiple of the period {case.period:.6g} "
            f"(remainder {case.remainder:.3g})"
        )
    return _solve(problem, cfg, case)


def solve_case2(problem: OscDDEProblem, cfg: SAMConfig) -> StroboscopicSolution:
    case = classify_case(problem, cfg.tol_case)
    if case.is_case1:
        raise CaseMismatch("delay is a whole number of periods; use solve_case1")
    return _solve(problem, cfg, case)


def solve(problem: OscDDEProblem, cfg: SAMConfig, force: str = "auto") -> StroboscopicSolution:
    """Dispatch on the delay/period relation. ``force`` in {auto, force1, force2}.

    ``force2`` on a whole-period delay runs the Case II path with an empty tail,
    which must reproduce the Case I result.
    """
    if force not in ("auto", "force1", "force2"):
        raise ValueError(f"unknown case mode {force!r}")
    case = classify_case(problem, cfg.tol_case)
    if force == "force1" and not case.is_case1:
        raise CaseMismatch("force1 requested but the delay is not a multiple of the period")
    if force == "force2" and case.is_case1:
        case = CaseInfo(CaseKind.CASE_II, case.periods_in_delay, 0.0, case.period)
    return _solve(problem, cfg, case)
