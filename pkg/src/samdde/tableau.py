"""Explicit Runge-Kutta tableaus and a single-step advancer that keeps stage values."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ButcherTableau",
    "StageRecord",
    "StageEvaluationError",
    "rk2_midpoint",
    "rk3_heun",
    "rk4_classical",
    "builtin_tableaus",
    "order_condition_defects",
    "rk_step",
    "quadrature_exactness_check",
    "alias_defect",
]


class StageEvaluationError(RuntimeError):
    """Raised when the right-hand side fails inside a Runge-Kutta stage."""

    def __init__(self, stage: int, cause: BaseException):
        super().__init__(f"right-hand side failed at stage {stage}: {cause!r}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class ButcherTableau:
    """Coefficients of an explicit Runge-Kutta method.

    ``coefficients`` must be strictly lower triangular. ``declared_order`` is
    the classical order the coefficients are claimed to satisfy; it is checked
    on construction.
    """

    abscissas: np.ndarray
    coefficients: np.ndarray
    weights: np.ndarray
    declared_order: int
    name: str = ""
    stage_count: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.abscissas, dtype=float)
        a = np.asarray(self.coefficients, dtype=float)
        b = np.asarray(self.weights, dtype=float)
        s = len(b)
        if c.shape != (s,) or a.shape != (s, s):
            raise ValueError("inconsistent tableau shapes")
        if np.any(np.triu(a) != 0.0):
            raise ValueError("coefficient matrix must be strictly lower triangular")
        if self.declared_order < 1:
            raise ValueError("declared_order must be positive")
        for arr in (c, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "abscissas", c)
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "weights", b)
        object.__setattr__(self, "stage_count", s)
        worst = max(order_condition_defects(self).values())
        if worst > 1e-13:
            raise ValueError(
                f"tableau {self.name!r} violates order conditions up to "
                f"order {self.declared_order} (max defect {worst:.2e})"
            )


@dataclass(frozen=True)
class StageRecord:
    stage_times: np.ndarray
    stage_states: np.ndarray  # shape (stage_count, D)


def _tableau(c, a, b, order, name):
    f = lambda xs: [float(Fraction(x)) for x in xs]  # noqa: E731
    return ButcherTableau(
        np.array(f(c)), np.array([f(row) for row in a]), np.array(f(b)), order, name
    )


def rk2_midpoint() -> ButcherTableau:
    """Runge's two-stage second-order method (explicit midpoint)."""
    return _tableau(
        ["0", "1/2"], [["0", "0"], ["1/2", "0"]], ["0", "1"], 2, "RK2"
    )


def rk3_heun() -> ButcherTableau:
    """Heun's third-order method, b = (1/4, 0, 3/4)."""
    return _tableau(
        ["0", "1/3", "2/3"],
        [["0", "0", "0"], ["1/3", "0", "0"], ["0", "2/3", "0"]],
        ["1/4", "0", "3/4"],
        3,
        "RK3",
    )


def rk4_classical() -> ButcherTableau:
    return _tableau(
        ["0", "1/2", "1/2", "1"],
        [
            ["0", "0", "0", "0"],
            ["1/2", "0", "0", "0"],
            ["0", "1/2", "0", "0"],
            ["0", "0", "1", "0"],
        ],
        ["1/6", "2/6", "2/6", "1/6"],
        4,
        "RK4",
    )


def builtin_tableaus() -> dict[str, ButcherTableau]:
    return {"RK2": rk2_midpoint(), "RK3": rk3_heun(), "RK4": rk4_classical()}


def order_condition_defects(tab: ButcherTableau) -> dict[str, float]:
    """Absolute defects of the rooted-tree order conditions up to order 4.

    Only conditions with order <= ``tab.declared_order`` are reported.
    """
    a, b, c = tab.coefficients, tab.weights, tab.abscissas
    conds = {
        "sum b = 1": (1, b.sum() - 1.0),
        "b.c = 1/2": (2, b @ c - 1 / 2),
        "b.c^2 = 1/3": (3, b @ c**2 - 1 / 3),
        "b.A.c = 1/6": (3, b @ a @ c - 1 / 6),
        "b.c^3 = 1/4": (4, b @ c**3 - 1 / 4),
        "b.(c*A.c) = 1/8": (4, b @ (c * (a @ c)) - 1 / 8),
        "b.A.c^2 = 1/12": (4, b @ a @ c**2 - 1 / 12),
        "b.A.A.c = 1/24": (4, b @ a @ a @ c - 1 / 24),
    }
    # row-sum condition c_i = sum_j a_ij is assumed by the trees above
    out = {"c = A.1": float(np.max(np.abs(a.sum(axis=1) - c)))}
    out.update(
        {k: float(abs(v)) for k, (p, v) in conds.items() if p <= tab.declared_order}
    )
    return out


def rk_step(
    tab: ButcherTableau,
    rhs: Callable,
    t: float,
    y: np.ndarray,
    dt: float,
    stage_args: Sequence | None = None,
) -> tuple[np.ndarray, StageRecord]:
    """Advance ``y`` by one explicit RK step of (signed) size ``dt``.

    ``rhs(t, y)`` is called once per stage. When ``stage_args`` is given, the
    call becomes ``rhs(t, y, stage_args[j])`` for stage ``j``; the SAM engine
    uses this to hand each stage its delayed argument.

    Returns the new state and the record of all stage times and states.
    """
    if dt == 0:
        raise ValueError("dt must be nonzero")
    y = np.asarray(y, dtype=float)
    a, b, c = tab.coefficients, tab.weights, tab.abscissas
    s = tab.stage_count
    k = np.empty((s,) + y.shape)
    states = np.empty((s,) + y.shape)
    times = t + c * dt
    for j in range(s):
        yj = y.copy()
        for i in range(j):
            if a[j, i] != 0.0:
                yj += (dt * a[j, i]) * k[i]
        states[j] = yj
        try:
            if stage_args is None:
                k[j] = rhs(times[j], yj)
            else:
                k[j] = rhs(times[j], yj, stage_args[j])
        except StageEvaluationError:
            raise
        except Exception as exc:
            raise StageEvaluationError(j, exc) from exc
    y_next = y.copy()
    for j in range(s):
        if b[j] != 0.0:
            y_next += (dt * b[j]) * k[j]
    return y_next, StageRecord(times, states)


def _trig_rhs(modes):
    ks = np.array([k for k, _ in modes], dtype=float)
    amps = np.array([amp for _, amp in modes], dtype=complex)

    def rhs(s, y):
        lam = np.sum(amps * np.exp(1j * ks * s))
        return np.array([lam.real, lam.imag])

    return rhs


def quadrature_exactness_check(
    tab: ButcherTableau,
    modes: Sequence[tuple[int, complex]],
    M: int,
    direction: int = 1,
) -> float:
    """Integrate dy/ds = sum_k amp_k exp(iks) over one signed period with M steps.

    The complex state is carried as a real (Re, Im) pair. Every mode is zero
    mean, so the exact increment over the period is 0 and the returned value
    is the endpoint defect ``|y_M - y_0|``. It vanishes to round-off unless a
    mode aliases a constant on the grid (k a multiple of M).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if any(k == 0 for k, _ in modes):
        raise ValueError("modes must have nonzero wavenumbers")
    if not modes:
        return 0.0
    rhs = _trig_rhs(modes)
    ds = direction * 2 * np.pi / M
    y = np.zeros(2)
    for m in range(M):
        y, _ = rk_step(tab, rhs, m * ds, y, ds)
    return float(np.hypot(y[0], y[1]))


def alias_defect(tab: ButcherTableau, k: int, M: int, amp: complex = 1.0) -> float:
    """Closed-form endpoint defect when exp(iks) aliases a constant on the grid."""
    ds = 2 * np.pi / M
    if not np.isclose(np.exp(1j * k * ds), 1.0, atol=1e-12):
        return 0.0
    return float(
        abs(amp) * 2 * np.pi * abs(np.sum(tab.weights * np.exp(1j * k * tab.abscissas * ds)))
    )
