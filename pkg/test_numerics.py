"""Tests for the finite-difference helpers."""

import math

import numpy as np
import pytest

from holosim.errors import DomainError
from holosim.utils.numerics import (
    derivative,
    extrapolated_stencil,
    mixed_derivative,
    richardson_extrapolate,
    richardson_weights,
)


def test_richardson_cancels_the_leading_error():
    # f(h) = 1 + h^2: one level removes the h^2 term exactly
    assert richardson_extrapolate([1.0 + 0.1**2, 1.0 + 0.05**2], p=2) == pytest.approx(1.0, abs=1e-14)


def test_weights_sum_to_one():
    for levels in (2, 3):
        assert richardson_weights(levels).sum() == pytest.approx(1.0)


def test_needs_two_values():
    with pytest.raises(DomainError):
        richardson_extrapolate([1.0], p=2)


@pytest.mark.parametrize("order,expected", [(1, math.cos(0.3)), (2, -math.sin(0.3))])
def test_derivative_of_sine(order, expected):
    assert derivative(math.sin, 0.3, order=order) == pytest.approx(expected, abs=1e-7)


def test_mixed_derivative():
    def f(x, y):
        return math.cos(x) * math.sin(2 * y)

    expected = -math.sin(0.4) * 2 * math.cos(2 * 1.1)
    assert mixed_derivative(f, 0.4, 1.1) == pytest.approx(expected, abs=1e-7)


def test_stencil_is_exact_on_quartics():
    stencil = extrapolated_stencil(2)
    value = sum(w * (0.7 + dx) ** 4 for dx, w in stencil.items())
    assert value == pytest.approx(12 * 0.7**2, rel=1e-8)
    assert sum(stencil.values()) == pytest.approx(0.0, abs=1e-3)


def test_rejects_third_order():
    with pytest.raises(DomainError):
        extrapolated_stencil(3)


def test_array_values_are_extrapolated_elementwise():
    coarse, fine = np.array([1.04, 2.08]), np.array([1.01, 2.02])
    np.testing.assert_allclose(richardson_extrapolate([coarse, fine], p=2), [1.0, 2.0], atol=1e-12)
