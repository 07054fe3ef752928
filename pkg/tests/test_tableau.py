import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from samdde.tableau import (
    ButcherTableau,
    StageEvaluationError,
    alias_defect,
    builtin_tableaus,
    order_condition_defects,
    quadrature_exactness_check,
    rk2_midpoint,
    rk3_heun,
    rk4_classical,
    rk_step,
)

TABS = list(builtin_tableaus().values())


def test_rk2_coefficients():
    tab = rk2_midpoint()
    assert tab.stage_count == 2
    np.testing.assert_array_equal(tab.weights, [0.0, 1.0])
    np.testing.assert_array_equal(tab.abscissas, [0.0, 0.5])
    np.testing.assert_array_equal(tab.coefficients, [[0, 0], [0.5, 0]])
    assert tab.weights @ tab.abscissas == 0.5


def test_rk3_coefficients():
    tab = rk3_heun()
    np.testing.assert_array_equal(tab.weights, [0.25, 0.0, 0.75])
    np.testing.assert_allclose(tab.abscissas, [0, 1 / 3, 2 / 3])
    assert tab.weights.sum() == 1.0
    # 0 + 0 + (3/4)(4/9)
    assert tab.weights @ tab.abscissas**2 == pytest.approx(1 / 3, abs=1e-15)


def test_rk4_coefficients():
    tab = rk4_classical()
    np.testing.assert_allclose(tab.weights, [1 / 6, 2 / 6, 2 / 6, 1 / 6], rtol=0, atol=1e-16)
    np.testing.assert_array_equal(tab.abscissas, [0, 0.5, 0.5, 1])
    assert tab.weights.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("tab", TABS, ids=lambda t: t.name)
def test_order_conditions_and_explicitness(tab):
    assert max(order_condition_defects(tab).values()) <= 1e-14
    assert np.all(np.triu(tab.coefficients) == 0)


def test_wrong_declared_order_is_rejected():
    t = rk2_midpoint()
    with pytest.raises(ValueError):
        ButcherTableau(t.abscissas, t.coefficients, t.weights, 3)


def test_implicit_tableau_rejected():
    with pytest.raises(ValueError):
        ButcherTableau(np.array([0.5]), np.array([[0.5]]), np.array([1.0]), 1)


def test_rk4_stability_polynomial():
    z = 0.1
    y, _ = rk_step(rk4_classical(), lambda t, y: y, 0.0, np.array([1.0]), 0.1)
    assert y[0] == pytest.approx(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24, rel=0, abs=1e-15)
    assert y[0] == pytest.approx(1.1051708333333333, abs=1e-15)


@pytest.mark.parametrize("tab", TABS, ids=lambda t: t.name)
def test_zero_field_keeps_state(tab):
    y0 = np.array([0.3, -1.2])
    y, rec = rk_step(tab, lambda t, y: np.zeros(2), 1.0, y0, 0.2)
    np.testing.assert_array_equal(y, y0)
    assert rec.stage_states.shape == (tab.stage_count, 2)
    for s in rec.stage_states:
        np.testing.assert_array_equal(s, y0)


@pytest.mark.parametrize("tab", TABS, ids=lambda t: t.name)
def test_constant_field(tab):
    y, rec = rk_step(tab, lambda t, y: np.ones(1), 0.0, np.zeros(1), 0.3)
    assert y[0] == pytest.approx(0.3, abs=1e-16)
    np.testing.assert_allclose(rec.stage_times, 0.3 * tab.abscissas)


@pytest.mark.parametrize("tab", TABS, ids=lambda t: t.name)
def test_polynomial_in_t_exactness(tab):
    # the weights/abscissas integrate t^q exactly for q <= order-1
    t0, dt = 0.7, 0.45
    for q in range(tab.declared_order):
        y, _ = rk_step(tab, lambda t, y: np.array([t**q]), t0, np.zeros(1), dt)
        exact = ((t0 + dt) ** (q + 1) - t0 ** (q + 1)) / (q + 1)
        assert y[0] == pytest.approx(exact, rel=1e-13)


def test_negative_step_and_zero_step():
    tab = rk4_classical()
    y, rec = rk_step(tab, lambda t, y: np.array([1.0]), 1.0, np.zeros(1), -0.25)
    assert y[0] == pytest.approx(-0.25)
    assert rec.stage_times[-1] == pytest.approx(0.75)
    with pytest.raises(ValueError):
        rk_step(tab, lambda t, y: y, 0.0, np.zeros(1), 0.0)


def test_stage_failure_reports_index():
    def bad(t, y, arg):
        if arg == 2:
            raise ZeroDivisionError("boom")
        return y

    with pytest.raises(StageEvaluationError) as info:
        rk_step(rk4_classical(), bad, 0.0, np.ones(1), 0.1, stage_args=[0, 1, 2, 3])
    assert info.value.stage == 2


def test_stage_args_are_passed_positionally():
    seen = []
    rk_step(rk4_classical(), lambda t, y, a: (seen.append(a), y)[1], 0.0, np.ones(1), 0.1,
            stage_args=["a", "b", "c", "d"])
    assert seen == ["a", "b", "c", "d"]


def test_deterministic():
    f = lambda t, y: np.sin(3 * t) * y + np.cos(y)  # noqa: E731
    a = rk_step(rk3_heun(), f, 0.1, np.array([0.2, 0.4]), 0.05)[0]
    b = rk_step(rk3_heun(), f, 0.1, np.array([0.2, 0.4]), 0.05)[0]
    assert a.tobytes() == b.tobytes()


# whole-period exactness on trigonometric polynomials


def test_single_mode_exact_rk4():
    assert quadrature_exactness_check(rk4_classical(), [(1, 1.0)], 8) <= 1e-13


def test_alias_mode_matches_closed_form():
    tab = rk4_classical()
    M = 8
    d = quadrature_exactness_check(tab, [(M, 1.0)], M)
    ds = 2 * math.pi / M
    want = abs(2 * math.pi * np.sum(tab.weights * np.exp(1j * M * tab.abscissas * ds)))
    assert want > 0.1
    assert d == pytest.approx(want, abs=1e-12)
    assert alias_defect(tab, M, M) == pytest.approx(want, abs=1e-15)


def test_empty_modes():
    assert quadrature_exactness_check(rk2_midpoint(), [], 4) == 0.0


def test_period_one_step_aliases():
    d = quadrature_exactness_check(rk2_midpoint(), [(1, 1.0)], 1)
    assert d == pytest.approx(2 * math.pi, abs=1e-12)


@given(
    tab_i=st.integers(0, 2),
    M=st.integers(2, 24),
    direction=st.sampled_from([1, -1]),
    data=st.data(),
)
def test_trig_polynomial_exact_after_whole_period(tab_i, M, direction, data):
    tab = TABS[tab_i]
    K = data.draw(st.integers(1, M - 1))
    ks = data.draw(st.lists(st.integers(1, K), min_size=1, max_size=5))
    signs = data.draw(st.lists(st.sampled_from([1, -1]), min_size=len(ks), max_size=len(ks)))
    amps = data.draw(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                 allow_infinity=False),
                              min_size=len(ks), max_size=len(ks)))
    modes = [(s * k, a) for s, k, a in zip(signs, ks, amps)]
    d = quadrature_exactness_check(tab, modes, M, direction)
    assert d <= 1e-12 * max(1.0, sum(abs(a) for a in amps))


@given(tab_i=st.integers(0, 2), M=st.integers(1, 32), mult=st.integers(1, 3),
       direction=st.sampled_from([1, -1]))
def test_alias_property(tab_i, M, mult, direction):
    tab = TABS[tab_i]
    k = mult * M
    d = quadrature_exactness_check(tab, [(k, 1.0)], M, direction)
    ds = 2 * math.pi / M
    want = abs(2 * math.pi * np.sum(tab.weights * np.exp(1j * k * tab.abscissas * ds)))
    assert abs(d - want) <= 1e-12 * max(1, k)
