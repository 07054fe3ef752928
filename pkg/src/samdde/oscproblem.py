"""Highly oscillatory delay problems and their segmented ODE reformulation.

A problem

    x'(t) = f(x(t), x(t - tau), t, Omega t; Omega),   0 <= t <= L tau,
    x(t)  = phi(t),                                     -tau <= t <= 0,

is rewritten on [0, tau] in terms of the segments x^(l)(t) = x(t + (l-1) tau).
Segment l only sees segment l-1 through its delayed argument, so segments can
be solved one after another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import mpmath
import numpy as np

__all__ = [
    "OscDDEProblem",
    "CaseKind",
    "CaseInfo",
    "SegmentRhs",
    "ProviderMiss",
    "classify_case",
    "reduce_phase",
    "segment_phase_offset",
    "segment_rhs",
    "history_eval",
]

TWO_PI = 2 * math.pi
_HISTORY_SLACK = 1e-12


class ProviderMiss(LookupError):
    """A delayed value was requested at a node the previous segment never produced."""


@dataclass(frozen=True)
class OscDDEProblem:
    """An oscillatory constant-delay problem.

    ``rhs(x, x_delayed, t_slow, phase, omega)`` must be 2*pi-periodic in
    ``phase`` and free of hidden state; ``history(t)`` must not depend on
    ``omega``.
    """

    dim: int
    rhs: Callable[[np.ndarray, np.ndarray, float, float, float], np.ndarray]
    delay: float
    omega: float
    history: Callable[[float], np.ndarray]
    segments: int
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not self.delay > 0:
            raise ValueError("delay must be positive")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if int(self.segments) != self.segments or self.segments < 1:
            raise ValueError("segments must be a positive integer")

    @property
    def horizon(self) -> float:
        return self.segments * self.delay

    @property
    def period(self) -> float:
        return TWO_PI / self.omega

    @classmethod
    def with_horizon(cls, dim, rhs, delay, omega, history, horizon, name=""):
        """Build a problem from t_max, which must be a whole number of delays."""
        ratio = horizon / delay
        L = round(ratio)
        if L < 1 or abs(ratio - L) > 1e-12 * max(1.0, ratio):
            raise ValueError(
                f"horizon {horizon} is not an integer multiple of the delay {delay}; "
                "either extend t_max to the next multiple of the delay or stop at the "
                "last multiple and finish with a conventional DDE solver"
            )
        return cls(dim, rhs, delay, omega, history, L, name)

    def with_omega(self, omega: float) -> "OscDDEProblem":
        return OscDDEProblem(
            self.dim, self.rhs, self.delay, omega, self.history, self.segments, self.name
        )


class CaseKind(str, Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"


@dataclass(frozen=True)
class CaseInfo:
    kind: CaseKind
    periods_in_delay: int
    remainder: float
    period: float

    @property
    def is_case1(self) -> bool:
        return self.kind is CaseKind.CASE_I


def classify_case(problem: OscDDEProblem, tol_case: float = 1e-9) -> CaseInfo:
    """Decide whether the delay is (numerically) a whole number of fast periods."""
    if not 0 < tol_case <= 1e-6:
        raise ValueError("tol_case must lie in (0, 1e-6]")
    T = problem.period
    tau = problem.delay
    ratio = tau / T
    if ratio < 1 - tol_case:
        raise ValueError(
            f"delay {tau} is shorter than one fast period {T}; averaging does not apply"
        )
    M = math.floor(ratio)
    r = tau - M * T
    if T - r <= tol_case * tau:
        M += 1
        r = 0.0
    elif r <= tol_case * tau:
        r = 0.0
    kind = CaseKind.CASE_I if r == 0.0 else CaseKind.CASE_II
    return CaseInfo(kind, M, r, T)


def reduce_phase(x: float) -> float:
    """Reduce a (possibly large) float angle into [0, 2*pi) without losing digits."""
    with mpmath.workdps(40):
        v = mpmath.fmod(mpmath.mpf(x), 2 * mpmath.pi)
        if v < 0:
            v += 2 * mpmath.pi
        return float(v)


def segment_phase_offset(omega: float, delay: float, ell: int) -> float:
    """Omega (l-1) tau reduced mod 2*pi, with the product formed exactly."""
    with mpmath.workdps(40):
        prod = mpmath.mpf(omega) * mpmath.mpf(delay) * (ell - 1)
        v = mpmath.fmod(prod, 2 * mpmath.pi)
        if v < 0:
            v += 2 * mpmath.pi
        out = float(v)
    # values a hair below 2*pi are the same phase as 0
    return 0.0 if TWO_PI - out < 1e-13 else out


def history_eval(problem: OscDDEProblem, t: float) -> np.ndarray:
    tau = problem.delay
    slack = _HISTORY_SLACK * max(1.0, tau)
    if t < -tau - slack or t > slack:
        raise ValueError(f"history requested at t={t}, outside [-{tau}, 0]")
    return np.asarray(problem.history(min(max(t, -tau), 0.0)), dtype=float)


@dataclass(frozen=True)
class SegmentRhs:
    """Right-hand side of segment ``segment_index`` on the local interval [0, tau].

    ``delayed_provider(key, t_local)`` returns x^(l-1) at the node identified by
    the integer tuple ``key`` (local time ``t_local``); segment 1 ignores the key
    and evaluates the history.
    """

    problem: OscDDEProblem
    segment_index: int
    slow_offset: float
    phase_offset: float
    delayed_provider: Callable[[tuple, float], np.ndarray]

    def __call__(self, x, t_local, phase, key):
        xd = self.delayed_provider(key, t_local)
        p = self.problem
        return p.rhs(x, xd, t_local + self.slow_offset, phase, p.omega)

    def delayed(self, key, t_local):
        return self.delayed_provider(key, t_local)


def history_provider(problem: OscDDEProblem):
    """Delayed provider for segment 1: x^(0)(t) = phi(t - tau)."""

    def provide(key, t_local):
        return history_eval(problem, t_local - problem.delay)

    return provide


def segment_rhs(problem: OscDDEProblem, ell: int, provider=None) -> SegmentRhs:
    if not 1 <= ell <= problem.segments:
        raise ValueError(f"segment index {ell} outside 1..{problem.segments}")
    if provider is None:
        if ell != 1:
            raise ValueError("segments after the first need a delayed-value provider")
        provider = history_provider(problem)
    return SegmentRhs(
        problem,
        ell,
        (ell - 1) * problem.delay,
        segment_phase_offset(problem.omega, problem.delay, ell),
        provider,
    )


def sample_periodicity_defect(problem: OscDDEProblem, n: int = 32, seed: int = 0) -> float:
    """Largest |f(.., theta) - f(.., theta + 2 pi)| over random samples, relative to |f|."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        x = rng.uniform(0.1, 3.0, problem.dim)
        xd = rng.uniform(0.1, 3.0, problem.dim)
        t = rng.uniform(0.0, problem.horizon)
        th = rng.uniform(0.0, TWO_PI)
        f0 = np.asarray(problem.rhs(x, xd, t, th, problem.omega))
        f1 = np.asarray(problem.rhs(x, xd, t, th + TWO_PI, problem.omega))
        scale = max(1.0, float(np.max(np.abs(f0))))
        worst = max(worst, float(np.max(np.abs(f0 - f1))) / scale)
    return worst
