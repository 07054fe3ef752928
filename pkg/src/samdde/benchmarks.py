"""Test problems: the forced delayed toggle switch and synthetic oscillatory fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .oscproblem import OscDDEProblem

__all__ = [
    "ToggleParams",
    "toggle_problem",
    "scaled_toggle_problem",
    "synthetic_quadrature_problem",
    "zero_problem",
    "get_problem",
]


@dataclass(frozen=True)
class ToggleParams:
    alpha: float = 2.5
    beta: int = 2
    A: float = 0.1
    omega_slow: float = 0.1
    B: float = 4.0
    B_hat: float = 0.1
    tau: float = 0.5
    history: tuple[float, float] = (0.5, 2.0)

    def __post_init__(self):
        if int(self.beta) != self.beta or self.beta < 1:
            raise ValueError("beta must be a positive integer")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


def _toggle_rhs(p: ToggleParams, fast_amplitude):
    alpha, beta, A, w = p.alpha, int(p.beta), p.A, p.omega_slow

    def rhs(x, xd, t, phase, omega):
        return np.array(
            [
                alpha / (1.0 + x[1] ** beta) - xd[0] + A * math.sin(w * t)
                + fast_amplitude(omega) * math.sin(phase),
                alpha / (1.0 + x[0] ** beta) - xd[1],
            ]
        )

    return rhs


def _constant_history(values):
    h = np.array(values, dtype=float)
    h.setflags(write=False)
    return lambda t: h


def toggle_problem(
    params: ToggleParams = ToggleParams(), L: int = 4, omega: float = 16 * math.pi
) -> OscDDEProblem:
    """Toggle switch with slow forcing A sin(wt) and fast forcing B sin(Omega t)."""
    B = params.B
    return OscDDEProblem(
        2,
        _toggle_rhs(params, lambda om: B),
        params.tau,
        omega,
        _constant_history(params.history),
        L,
        "toggle",
    )


def scaled_toggle_problem(
    params: ToggleParams = ToggleParams(), L: int = 4, omega: float = 16 * math.pi
) -> OscDDEProblem:
    """As :func:`toggle_problem` but the fast forcing is B_hat * Omega * sin(Omega t).

    The solution then carries O(1) fast oscillations for every Omega.
    """
    Bh = params.B_hat
    return OscDDEProblem(
        2,
        _toggle_rhs(params, lambda om: Bh * om),
        params.tau,
        omega,
        _constant_history(params.history),
        L,
        "scaled-toggle",
    )


def synthetic_quadrature_problem(
    modes: Sequence[tuple[int, complex]] = ((1, 1.0),),
    decay: float = 0.0,
    dim: int = 1,
    omega: float = 16 * math.pi,
    delay: float = 0.5,
    L: int = 1,
    y0: float = 0.0,
) -> OscDDEProblem:
    """dy/dt = Omega * Re(sum_k amp_k exp(i k phase)) - decay * y, no delay coupling.

    With ``decay = 0`` and a single cosine mode the solution is
    y0 + sin(Omega t) in closed form.
    """
    ks = np.array([k for k, _ in modes], dtype=float)
    amps = np.array([a for _, a in modes], dtype=complex)
    if np.any(ks == 0):
        raise ValueError("modes must be zero-mean (k != 0)")

    def rhs(x, xd, t, phase, om):
        lam = float(np.real(np.sum(amps * np.exp(1j * ks * phase))))
        return om * lam - decay * np.asarray(x, dtype=float)

    return OscDDEProblem(
        dim, rhs, delay, omega, _constant_history([y0] * dim), L, "synthetic"
    )


def zero_problem(dim: int = 2, omega: float = 16 * math.pi, delay: float = 0.5,
                 L: int = 4, value: float = 1.0) -> OscDDEProblem:
    return OscDDEProblem(
        dim,
        lambda x, xd, t, ph, om: np.zeros(dim),
        delay,
        omega,
        _constant_history([value] * dim),
        L,
        "zero",
    )


def get_problem(name: str, omega: float, L: int = 4) -> OscDDEProblem:
    if name == "toggle":
        return toggle_problem(L=L, omega=omega)
    if name == "scaled-toggle":
        return scaled_toggle_problem(L=L, omega=omega)
    if name == "synthetic":
        return synthetic_quadrature_problem(omega=omega, decay=1.0, L=L, y0=1.0)
    if name == "zero":
        return zero_problem(omega=omega, L=L)
    raise ValueError(f"unknown problem {name!r}")
