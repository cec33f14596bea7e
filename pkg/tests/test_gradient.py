import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.featnet import DistanceMatrix
from src.fractal import (
    SMOOTH,
    SmoothingParams,
    ThresholdGrid,
    box_curve,
    check_ss_rate_grad,
    data_grid,
    max_relative_error,
    ss_rate,
    ss_rate_grad,
    ss_rate_value_and_grad,
)
from src.fractal.gradient import random_distance_matrix


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_analytic_matches_finite_differences(seed):
    result = check_ss_rate_grad(seed)
    assert result.checked > 0
    assert result.max_relative_error <= 1e-4
    assert result.passed


def test_gradient_is_symmetric_with_zero_diagonal():
    c = random_distance_matrix(np.random.default_rng(11), 8)
    grad = ss_rate_grad(c, data_grid(c, 16), SmoothingParams(k=20.0))
    assert_array_equal(grad, grad.T)
    assert_array_equal(np.diag(grad), 0.0)


def test_equal_distances_give_equal_entries():
    c = DistanceMatrix(np.ones((6, 6)) - np.eye(6))
    grad = ss_rate_grad(c, ThresholdGrid(0.0, 2.0, 16), SmoothingParams(k=5.0))
    off = grad[~np.eye(6, dtype=bool)]
    assert_allclose(off, off[0], rtol=1e-12)


def test_fac_scales_linearly():
    c = random_distance_matrix(np.random.default_rng(5), 7)
    grid = data_grid(c, 16)
    one = ss_rate_grad(c, grid, SmoothingParams(k=20.0, fac=1.0))
    two = ss_rate_grad(c, grid, SmoothingParams(k=20.0, fac=2.0))
    assert_allclose(two, 2.0 * one, rtol=1e-14, atol=0)


def test_value_and_grad_includes_grid_dependence():
    """Moving every pair (including the largest) matches the data-grid value."""
    c = random_distance_matrix(np.random.default_rng(9), 6)
    sp = SmoothingParams(k=20.0)
    result, pair_grad = ss_rate_value_and_grad(c, 16, sp)

    def value(matrix):
        m = DistanceMatrix(matrix)
        return ss_rate(box_curve(m, data_grid(m, 16), SMOOTH, sp)).unclamped

    assert result.value == pytest.approx(value(c.c), abs=1e-15)
    h = 1e-6
    analytic, numeric = [], []
    for i in range(6):
        for j in range(i + 1, 6):
            plus, minus = c.c.copy(), c.c.copy()
            plus[i, j] += h
            plus[j, i] += h
            minus[i, j] -= h
            minus[j, i] -= h
            numeric.append((value(plus) - value(minus)) / (2 * h))
            analytic.append(pair_grad[i, j])
    error, checked = max_relative_error(np.array(analytic), np.array(numeric), 1e-8)
    assert checked > 0
    assert error <= 1e-4


def test_max_relative_error_skips_tiny_entries():
    error, checked = max_relative_error(np.array([1.0, 1e-12]), np.array([1.0, 3e-12]), 1e-8)
    assert error == 0.0 and checked == 1
    error, checked = max_relative_error(np.array([0.0]), np.array([0.0]), 1e-8)
    assert (error, checked) == (0.0, 0)
