import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logicmio.regularizers import Regularizer, conjugate, conjugate_grad, omega, perspective_term

finite = st.floats(-50, 50, allow_nan=False)
positive = st.floats(0.05, 20, allow_nan=False)


def test_constructors_and_validation():
    assert Regularizer.bigm(3).M == 3.0
    assert Regularizer.ridge(0.5).gamma == 0.5
    for bad in (lambda: Regularizer.bigm(0), lambda: Regularizer.ridge(-1), lambda: Regularizer("lasso")):
        with pytest.raises(ValueError):
            bad()


def test_parse_and_dict_round_trip():
    for text, reg in [("bigM:M=10", Regularizer.bigm(10)), ("ridge:gamma=1.5", Regularizer.ridge(1.5))]:
        parsed = Regularizer.parse(text)
        assert parsed == reg
        assert Regularizer.from_dict(parsed.to_dict()) == reg
    with pytest.raises(ValueError):
        Regularizer.parse("l1:lam=2")
    with pytest.raises(ValueError):
        Regularizer.from_dict({"kind": "ridge", "gamma": 1, "extra": 0})


def test_omega_values():
    assert omega(Regularizer.bigm(2), [1.0, -2.0]) == 0.0
    assert omega(Regularizer.bigm(2), [2.5]) == math.inf
    assert omega(Regularizer.ridge(2), [1.0, 1.0]) == pytest.approx(0.5)


def test_conjugate_closed_forms():
    assert conjugate(Regularizer.bigm(3), -2.0) == pytest.approx(6.0)
    assert conjugate(Regularizer.ridge(2), 3.0) == pytest.approx(9.0)
    np.testing.assert_allclose(conjugate(Regularizer.bigm(1), [1.0, -1.0], M=np.array([2.0, 0.5])), [2.0, 0.5])


def test_perspective_term_limits():
    reg = Regularizer.ridge(1.0)
    assert perspective_term(reg, 1.0, 1.0) == pytest.approx(0.5)
    assert perspective_term(reg, 1.0, 0.25) == pytest.approx(2.0)
    assert perspective_term(reg, 0.0, 0.0) == 0.0
    assert perspective_term(reg, 0.1, 0.0) == math.inf
    with pytest.raises(ValueError):
        perspective_term(Regularizer.bigm(1), 1.0, 1.0)


@given(beta=finite, x=finite, gamma=positive)
def test_ridge_fenchel_young(beta, x, gamma):
    reg = Regularizer.ridge(gamma)
    assert omega(reg, [x]) + conjugate(reg, beta) >= x * beta - 1e-7 * (1 + abs(x * beta))


@given(beta=finite, M=positive)
def test_bigm_conjugate_is_support_function(beta, M):
    reg = Regularizer.bigm(M)
    grid = np.linspace(-M, M, 41)
    assert conjugate(reg, beta) == pytest.approx(np.max(grid * beta), abs=1e-9)


@given(beta=finite, gamma=positive)
@settings(max_examples=50)
def test_conjugate_gradient_matches_finite_difference(beta, gamma):
    reg = Regularizer.ridge(gamma)
    h = 1e-6
    fd = (conjugate(reg, beta + h) - conjugate(reg, beta - h)) / (2 * h)
    assert conjugate_grad(reg, beta) == pytest.approx(fd, rel=1e-5, abs=1e-5)


@given(x=finite, z=st.floats(0.01, 1), gamma=positive)
def test_perspective_is_scaled_ridge(x, z, gamma):
    reg = Regularizer.ridge(gamma)
    assert perspective_term(reg, x, z) == pytest.approx(z * omega(reg, [x / z]), rel=1e-9)
