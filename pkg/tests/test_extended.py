from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mmbm_cr.extended import EPS_DD, ExtendedReal, two_prod, two_sum

finite = st.floats(min_value=-1e100, max_value=1e100, allow_nan=False, allow_infinity=False)
# double-double needs the low parts of intermediate products to stay normal,
# i.e. nonzero operands above ~2^-969; below that it degrades to float64
operand = st.one_of(st.just(0.0), st.floats(min_value=1e-250, max_value=1e100)).flatmap(
    lambda x: st.sampled_from([x, -x])
)


def exact(x: ExtendedReal) -> Fraction:
    return Fraction(float(x.hi)) + Fraction(float(x.lo))


@given(finite, finite)
def test_two_sum_is_error_free(a, b):
    s, e = two_sum(np.float64(a), np.float64(b))
    assert Fraction(float(s)) + Fraction(float(e)) == Fraction(a) + Fraction(b)


@given(st.floats(min_value=1e-250, max_value=1e150), st.booleans())
def test_two_prod_is_error_free(a, neg):
    # the error term must stay clear of the subnormal range
    a = -a if neg else a
    b = 3.0000000000000004
    p, e = two_prod(np.float64(a), np.float64(b))
    assert Fraction(float(p)) + Fraction(float(e)) == Fraction(a) * Fraction(b)


@given(
    st.floats(min_value=1e-100, max_value=1e100),
    st.floats(min_value=1.0, max_value=1e8),
    st.booleans(),
    st.booleans(),
)
def test_add_then_subtract_recovers_operand(mag, ratio, neg_a, neg_b):
    # (a + b) - b == a for |a| <= |b| <= 1e8 |a|
    a = -mag if neg_a else mag
    b = mag * ratio * (-1 if neg_b else 1)
    assume(abs(a) <= abs(b) <= 1e8 * abs(a))
    x = (ExtendedReal(a) + b) - b
    assert float(x.hi) == a and float(x.lo) == 0.0


@given(operand, operand, operand)
def test_arithmetic_accuracy(a, b, c):
    assume(c != 0 and abs(c) > 1e-100)
    ea, eb, ec = ExtendedReal(a), ExtendedReal(b), ExtendedReal(c)
    for got, ref in (
        (ea * eb + ec, Fraction(a) * Fraction(b) + Fraction(c)),
        (ea / ec, Fraction(a) / Fraction(c)),
    ):
        if ref == 0:
            continue
        assert abs(exact(got) - ref) <= 8 * EPS_DD * abs(ref) + Fraction(1, 10**300)


def test_arithmetic_accuracy_regression_near_underflow():
    # the smallest normal operand loses the low part of the division remainder
    a, c = 2.2250738585072014e-308, 3.8766179121736937e-56
    got = ExtendedReal(a) / ExtendedReal(c)
    assert abs(exact(got) - Fraction(a) / Fraction(c)) <= 4 * np.finfo(float).eps * Fraction(a) / Fraction(c)


def test_third_is_accurate_to_double_double():
    third = ExtendedReal(1.0) / 3.0
    assert abs(exact(third) - Fraction(1, 3)) < Fraction(1, 3) * 2 * EPS_DD
    assert float(third.hi) == 1 / 3


def test_from_string_rounds_decimal():
    x = ExtendedReal.from_string("0.1")
    assert abs(exact(x) - Fraction(1, 10)) < Fraction(1, 10) * EPS_DD


def test_array_protocol():
    a = ExtendedReal(np.arange(6.0).reshape(2, 3))
    assert a.shape == (2, 3) and a.ndim == 2 and a.size == 6 and len(a) == 2
    assert a.T.shape == (3, 2)
    np.testing.assert_array_equal(a.sum(axis=1).to_float(), [3.0, 12.0])
    np.testing.assert_array_equal((a @ a.T).to_float(), [[5.0, 14.0], [14.0, 50.0]])
    np.testing.assert_array_equal((a @ np.ones(3)).to_float(), [3.0, 12.0])
    b = a.copy()
    b[0, 0] = 7.0
    assert float(a[0, 0].hi) == 0.0 and float(b[0, 0].hi) == 7.0
    assert float(abs(ExtendedReal(-2.0, 1e-20)).lo) == -1e-20


def test_matmul_shape_mismatch():
    with pytest.raises(ValueError):
        ExtendedReal(np.ones((2, 3))) @ ExtendedReal(np.ones((2, 3)))


def test_numpy_defers_to_extended():
    x = np.ones(3) + ExtendedReal(np.ones(3))
    assert isinstance(x, ExtendedReal)
    y = np.ones((2, 2)) @ ExtendedReal(np.eye(2))
    assert isinstance(y, ExtendedReal)
