"""First-derivative finite-difference formulas on integer multiples of the period.

Weights come from an exact rational solve of the moment system, so the
formulas used by the averaging engine carry no transcription error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = ["Stencil", "StencilSchedule", "derive_weights", "builtin_schedules", "apply"]


@dataclass(frozen=True)
class Stencil:
    offsets: tuple[int, ...]
    weights: tuple[float, ...]
    order: int
    exact_weights: tuple[Fraction, ...] = ()

    @property
    def k_min(self) -> int:
        return self.offsets[0]

    @property
    def k_max(self) -> int:
        return self.offsets[-1]

    @property
    def backward_periods(self) -> int:
        return max(0, -self.k_min)

    @property
    def forward_periods(self) -> int:
        return max(0, self.k_max)


@dataclass(frozen=True)
class StencilSchedule:
    """Stencils for interior stages and for stages near either end of a segment."""

    interior: Stencil
    at_start: Stencil
    at_end: Stencil | None = None

    def __post_init__(self):
        if self.at_start.k_min < 0:
            raise ValueError("at_start stencil may not use negative offsets")
        if self.at_end is not None and self.at_end.k_max > 0:
            raise ValueError("at_end stencil may not use positive offsets")


def _solve_exact(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    aug = [row[:] + [r] for row, r in zip(mat, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] / aug[col][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def derive_weights(offsets: Sequence[int]) -> Stencil:
    """Weights w with sum_k w_k k^m = delta_{m,1} for m = 0..n-1.

    Dividing ``sum_k w_k u(kT)`` by T then reproduces u'(0) for every
    polynomial u of degree <= n-1.
    """
    offs = [int(k) for k in offsets]
    if len(offs) < 2:
        raise ValueError("a first-derivative stencil needs at least two nodes")
    if len(set(offs)) != len(offs):
        raise ValueError("stencil offsets must be distinct")
    if any(int(k) != k for k in offsets):
        raise ValueError("stencil offsets must be integers")
    offs.sort()
    n = len(offs)
    mat = [[Fraction(k) ** m for k in offs] for m in range(n)]
    rhs = [Fraction(int(m == 1)) for m in range(n)]
    w = _solve_exact(mat, rhs)
    return Stencil(tuple(offs), tuple(float(x) for x in w), n - 1, tuple(w))


_SCHEDULES = {
    "SAM-RK2": ((-1, 1), (0, 1), None),
    "SAM-RK3": ((-2, -1, 0, 1), (0, 1, 2, 3), None),
    "SAM-RK4": ((-2, -1, 1, 2), (0, 1, 2, 3, 4), (-4, -3, -2, -1, 0)),
}


def builtin_schedules(method: str) -> StencilSchedule:
    key = method.upper()
    if key not in _SCHEDULES:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(_SCHEDULES)}")
    interior, start, end = _SCHEDULES[key]
    return StencilSchedule(
        derive_weights(interior),
        derive_weights(start),
        derive_weights(end) if end is not None else None,
    )


def apply(st: Stencil, values: Sequence[np.ndarray], T: float) -> np.ndarray:
    """Combine node values (aligned with ``st.offsets``) into a derivative estimate."""
    if len(values) != len(st.offsets):
        raise ValueError(f"expected {len(st.offsets)} node values, got {len(values)}")
    if not T > 0:
        raise ValueError("period must be positive")
    base = np.asarray(values[0], dtype=float)
    acc = np.zeros_like(base)
    # The weights sum to zero, so differencing against the first node changes
    # nothing algebraically, is exact on constants and limits cancellation.
    # Fixed offset order keeps the sum bit-reproducible.
    for w, v in zip(st.weights[1:], values[1:]):
        acc = acc + w * (np.asarray(v, dtype=float) - base)
    return acc / T
