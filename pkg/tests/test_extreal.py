import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fitzcalc.extreal import (NEG_INF, POS_INF, ExtReal, InfSumError, ext_add,
                              ext_neg, ext_sub)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
extended = st.one_of(finite, st.just(math.inf), st.just(-math.inf))


def test_nan_rejected():
    with pytest.raises(ValueError):
        ExtReal(float("nan"))


def test_opposite_infinities_raise():
    with pytest.raises(InfSumError):
        POS_INF + NEG_INF
    with pytest.raises(InfSumError):
        NEG_INF + POS_INF
    with pytest.raises(InfSumError):
        POS_INF - POS_INF


def test_same_sign_infinity_sums():
    assert POS_INF + POS_INF == math.inf
    assert NEG_INF + NEG_INF == -math.inf
    assert POS_INF + 5.0 == math.inf
    assert 5.0 + NEG_INF == -math.inf


def test_total_order():
    assert NEG_INF < ExtReal(-1e300) < ExtReal(0.0) < ExtReal(1e300) < POS_INF


def test_negation_swaps_infinities():
    assert -POS_INF == NEG_INF
    assert -NEG_INF == POS_INF
    assert -ExtReal(2.5) == ExtReal(-2.5)


@given(extended, extended)
def test_addition_commutes_when_defined(a, b):
    x, y = ExtReal(a), ExtReal(b)
    try:
        left = x + y
    except InfSumError:
        with pytest.raises(InfSumError):
            y + x
        return
    assert left == y + x


@given(extended)
def test_double_negation(a):
    x = ExtReal(a)
    assert -(-x) == x


def test_array_add_conflict_detected():
    a = np.array([1.0, np.inf, -np.inf])
    b = np.array([2.0, -np.inf, 1.0])
    with pytest.raises(InfSumError):
        ext_add(a, b)
    ok = ext_add(a, np.array([2.0, 1.0, 1.0]))
    assert list(ok) == [3.0, np.inf, -np.inf]


def test_array_sub_conflict_detected():
    a = np.array([np.inf])
    with pytest.raises(InfSumError):
        ext_sub(a, a)
    assert ext_sub(a, np.array([-np.inf]))[0] == np.inf


def test_array_neg():
    a = np.array([1.0, np.inf, -np.inf])
    assert list(ext_neg(a)) == [-1.0, -np.inf, np.inf]
