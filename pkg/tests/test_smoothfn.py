import math

import numpy as np
import pytest

from ldexpand.smoothfn import SmoothScalarFn, constant_fn, finite_difference


def test_order_zero_is_the_evaluator():
    f = SmoothScalarFn(lambda z: z**3 - 2.0 * z)
    for z in (-1.3, 0.0, 0.7):
        assert f.derivative(z, 0) == f(z)


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
def test_finite_differences_match_analytic_sin(order):
    f = SmoothScalarFn(np.sin)
    analytic = [np.sin, np.cos, lambda z: -np.sin(z), lambda z: -np.cos(z), np.sin, np.cos]
    for z in (-0.8, 0.2, 1.5):
        fd = f.derivative(z, order)
        exact = analytic[order](z)
        assert fd == pytest.approx(exact, rel=1e-6, abs=1e-8)


def test_analytic_derivatives_take_priority():
    marker = []
    f = SmoothScalarFn(np.exp, derivatives={1: lambda z: marker.append(z) or np.exp(z)})
    assert f.derivative(0.3, 1) == pytest.approx(math.exp(0.3))
    assert marker == [0.3]


def test_higher_orders_differentiate_the_best_analytic_base():
    # order-3 request with analytic order-2 supplied: only one FD level applied
    f = SmoothScalarFn(np.exp, derivatives={2: np.exp})
    assert f.derivative(0.5, 3) == pytest.approx(math.exp(0.5), rel=1e-9)


def test_order_cap():
    f = SmoothScalarFn(np.exp)
    with pytest.raises(ValueError):
        f.derivative(0.0, 6)


def test_finite_difference_order_zero_and_bad_order():
    assert finite_difference(np.exp, 0.3, 0) == pytest.approx(math.exp(0.3))
    with pytest.raises(ValueError):
        finite_difference(np.exp, 0.0, 7)


def test_shifted():
    f = SmoothScalarFn(lambda z: z * z, derivatives={1: lambda z: 2.0 * z})
    g = f.shifted(1.5)
    assert g(1.5) == 0.0
    assert g.derivative(2.5, 1) == pytest.approx(2.0)


def test_constant_fn():
    c = constant_fn(3.25)
    assert c(10.0) == 3.25
    assert c.derivative(1.0, 1) == 0.0
    assert c.derivative(-2.0, 5) == 0.0
