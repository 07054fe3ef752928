"""Independent constructions used as test oracles."""

from __future__ import annotations

import math

import numpy as np

from samdde.oscproblem import OscDDEProblem, segment_phase_offset
from samdde.sam import solve


def random_scalar_problem(seed: int, L: int = 3, omega: float = 16 * math.pi, delay: float = 0.5):
    """1-D delay problem with random smooth coefficients and a non-constant history."""
    rng = np.random.default_rng(seed)
    a, b, c, d, e, g, h0, h1 = rng.uniform(-1, 1, size=8)

    def rhs(x, xd, t, ph, om):
        return np.array([a * x[0] + b * math.tanh(xd[0]) + c * math.sin(ph) * (1 + d * x[0])
                         + e * math.cos(t) + g * math.cos(2 * ph) * xd[0]])

    def history(t):
        return np.array([h0 + h1 * t])

    return OscDDEProblem(1, rhs, delay, omega, history, L, f"random{seed}")


def stacked_problem(problem: OscDDEProblem, starts) -> OscDDEProblem:
    """The L segments as one (L*D)-dimensional system on [0, tau] with given initial blocks.

    Block l sees slow time t + (l-1) tau, phase offset of segment l, and block
    l-1 as its delayed argument; block 1 reads the history.
    """
    D, L, tau, om = problem.dim, problem.segments, problem.delay, problem.omega
    offsets = [segment_phase_offset(om, tau, ell) for ell in range(1, L + 1)]
    y0 = np.concatenate([np.asarray(s, dtype=float) for s in starts])

    def rhs(y, yd, t, ph, omega):
        out = np.empty_like(y)
        for ell in range(L):
            x = y[ell * D:(ell + 1) * D]
            xd = problem.history(t - tau) if ell == 0 else y[(ell - 1) * D:ell * D]
            phase = offsets[ell] + ph
            out[ell * D:(ell + 1) * D] = problem.rhs(x, xd, t + ell * tau, phase, omega)
        return out

    return OscDDEProblem(L * D, rhs, tau, om, lambda t: y0, 1, "stacked")


def stacked_solve(problem: OscDDEProblem, cfg, force: str = "auto"):
    """Solve the stacked system L times, each pass fixing one more initial block.

    Returns the list of per-segment macro grids (shape (N+1, D) each) and the
    segment endpoints.
    """
    D, L = problem.dim, problem.segments
    starts = [np.asarray(problem.history(0.0), dtype=float)] * L
    for _ in range(L):
        sol = solve(stacked_problem(problem, starts), cfg, force)
        end = sol.final_value()
        starts = [starts[0]] + [end[ell * D:(ell + 1) * D] for ell in range(L - 1)]
    X = sol.segments[0]
    return [X[:, ell * D:(ell + 1) * D] for ell in range(L)], [end[ell * D:(ell + 1) * D] for ell in range(L)]
