from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from samdde.stencil import Stencil, StencilSchedule, apply, builtin_schedules, derive_weights


def sympy_weights(offsets):
    """Independent oracle: Fornberg's recursion as implemented by sympy."""
    w = sympy.finite_diff_weights(1, [sympy.Integer(k) for k in offsets], 0)[1][-1]
    return [Fraction(int(x.p), int(x.q)) for x in w]


TABULATED = {
    (0, 1): ["-1", "1"],
    (-1, 1): ["-1/2", "1/2"],
    (-2, -1, 0, 1): ["1/6", "-1", "1/2", "1/3"],
    (-2, -1, 1, 2): ["1/12", "-2/3", "2/3", "-1/12"],
    (0, 1, 2, 3): ["-11/6", "3", "-3/2", "1/3"],
    (0, 1, 2, 3, 4): ["-25/12", "4", "-3", "4/3", "-1/4"],
    (-4, -3, -2, -1, 0): ["1/4", "-4/3", "3", "-4", "25/12"],
}


@pytest.mark.parametrize("offsets", list(TABULATED))
def test_tabulated_weights(offsets):
    want = [Fraction(x) for x in TABULATED[offsets]]
    assert sympy_weights(offsets) == want  # the frozen table agrees with the oracle
    st_ = derive_weights(offsets)
    assert list(st_.exact_weights) == want
    np.testing.assert_allclose(st_.weights, [float(x) for x in want], rtol=0, atol=1e-13)
    assert st_.order == len(offsets) - 1


def test_forward_and_central_differences_exact():
    assert derive_weights([0, 1]).weights == (-1.0, 1.0)
    assert derive_weights([1, -1]).weights == (-0.5, 0.5)


def test_offsets_are_sorted():
    assert derive_weights([1, -2, 0, -1]).offsets == (-2, -1, 0, 1)


@pytest.mark.parametrize("bad", [[0], [], [1, 1], [0, 0.5]])
def test_invalid_offsets(bad):
    with pytest.raises(ValueError):
        derive_weights(bad)


def test_builtin_schedules():
    s2 = builtin_schedules("SAM-RK2")
    assert s2.interior.offsets == (-1, 1) and s2.at_start.offsets == (0, 1) and s2.at_end is None
    s3 = builtin_schedules("SAM-RK3")
    assert s3.interior.offsets == (-2, -1, 0, 1)
    assert s3.at_start.offsets == (0, 1, 2, 3)
    assert s3.at_end is None
    s4 = builtin_schedules("sam-rk4")
    assert s4.interior.offsets == (-2, -1, 1, 2)
    assert s4.at_start.offsets == (0, 1, 2, 3, 4)
    assert s4.at_end.offsets == (-4, -3, -2, -1, 0)
    with pytest.raises(ValueError):
        builtin_schedules("SAM-RK5")


def test_schedule_rejects_wrong_sided_boundaries():
    with pytest.raises(ValueError):
        StencilSchedule(derive_weights([-1, 1]), derive_weights([-1, 0, 1]))
    with pytest.raises(ValueError):
        StencilSchedule(derive_weights([-1, 1]), derive_weights([0, 1]), derive_weights([0, 1]))


def test_apply_constant_linear_cubic():
    e = np.array([1.0, -2.0])
    T = 0.125
    for st_ in (derive_weights([0, 1]), derive_weights([-1, 1]), derive_weights([-2, -1, 1, 2])):
        np.testing.assert_allclose(apply(st_, [e] * len(st_.offsets), T), 0, atol=1e-14)
        np.testing.assert_allclose(apply(st_, [k * T * e for k in st_.offsets], T), e, rtol=1e-13)
    cd4 = derive_weights([-2, -1, 1, 2])
    np.testing.assert_allclose(apply(cd4, [(k * T) ** 3 * e for k in cd4.offsets], T), 0, atol=1e-15)


def test_apply_errors():
    st_ = derive_weights([0, 1])
    with pytest.raises(ValueError):
        apply(st_, [np.zeros(1)], 1.0)
    with pytest.raises(ValueError):
        apply(st_, [np.zeros(1)] * 2, 0.0)


offset_sets = st.lists(st.integers(-8, 8), min_size=2, max_size=8, unique=True)


@given(offset_sets)
def test_moment_conditions(offsets):
    s = derive_weights(offsets)
    ks = np.array(s.offsets, dtype=float)
    w = np.array(s.weights)
    scale = np.abs(ks).max() ** np.arange(len(ks))
    for m in range(len(ks)):
        assert abs(w @ ks**m - (m == 1)) <= 1e-13 * max(1.0, scale[m])
    # exact rational moments hold identically
    for m in range(len(ks)):
        assert sum(x * Fraction(k) ** m for x, k in zip(s.exact_weights, s.offsets)) == (m == 1)


@given(offset_sets, st.sampled_from([1e-3, 1e-1, 1.0]), st.data())
def test_polynomial_derivative_exact(offsets, T, data):
    s = derive_weights(offsets)
    deg = len(offsets) - 1
    coefs = data.draw(st.lists(st.floats(-2, 2), min_size=deg + 1, max_size=deg + 1))
    p = np.polynomial.Polynomial(coefs)
    vals = [np.array([p(k * T)]) for k in s.offsets]
    got = apply(s, vals, T)[0]
    want = coefs[1] if deg >= 1 else 0.0
    # cancellation in sum w_k p(kT) is bounded by the weights times the values
    bound = sum(abs(w) * abs(v[0]) for w, v in zip(s.weights, vals)) / T
    assert abs(got - want) <= 1e-11 * max(1.0, abs(want)) + 1e-14 * bound


def test_stencil_properties():
    s = derive_weights([-2, -1, 1, 2])
    assert (s.k_min, s.k_max, s.backward_periods, s.forward_periods) == (-2, 2, 2, 2)
    assert isinstance(s, Stencil)
