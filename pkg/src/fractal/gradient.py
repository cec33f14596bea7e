"""
Analytic gradient of the smooth SS_rate with respect to the distance matrix.

The chain runs through the trapezoid sum, |log N - pf|, log N, the box-count
formula and the sigmoid relaxation of the connection indicator:

    dSS/dC_ij = sum_t norm * w_t * sign(log N_t - pf_t) / N_t
                * (D - 1) / ln D * (1 - D) / (D + (1 - D) p_t)
                * (-fac * k * s_tij (1 - s_tij)) / (D (D - 1))

with s_tij = sigmoid(k (theta_t - C_ij)). The chain beyond dp/dC is a
reconstruction; only the sigmoid derivative of p is prescribed.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import expit

from src.featnet import DistanceMatrix
from src.fractal.grid import DEFAULT_GRID_COUNT, SmoothingParams, ThresholdGrid, data_grid
from src.fractal.metric import (
    BOUNDED,
    SMOOTH,
    BoxCurve,
    SsRateResult,
    box_curve,
    normalizer,
    pf_on_grid,
    ss_rate,
    trapezoid_weights,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradCheckResult:
    """Outcome of an analytic vs finite-difference comparison."""

    max_relative_error: float
    checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.max_relative_error <= self.tolerance


def _dss_dp(curve: BoxCurve, result: SsRateResult, normalizer_mode: str) -> np.ndarray:
    """dSS/dp_t for every threshold t (zero where clamping fired)."""
    d = curve.d
    if result.unclamped > 1.0:
        return np.zeros(curve.grid.count)
    pf = pf_on_grid(curve.grid, d)
    sign = np.sign(np.log(curve.n) - pf)
    arg = d + (1.0 - d) * curve.p
    dn_dp = (d - 1) / np.log(d) * (1.0 - d) / arg
    coef = (normalizer(curve.grid, d, normalizer_mode) * trapezoid_weights(curve.grid.lo)
            * sign / curve.n * dn_dp)
    if curve.clamp_count:
        logger.warning(f"Zeroing gradient at {curve.clamp_count} clamped threshold(s)")
        coef = np.where(curve.clamped, 0.0, coef)
    return coef


def _sigmoid_slopes(c: DistanceMatrix, theta: float, k: float) -> np.ndarray:
    s = expit(k * (theta - c.c))
    slope = s * (1.0 - s)
    np.fill_diagonal(slope, 0.0)
    return slope


def _entry_grad(c: DistanceMatrix, grid: ThresholdGrid, sp: SmoothingParams,
                coef: np.ndarray) -> np.ndarray:
    pairs = c.d * (c.d - 1)
    grad = np.zeros_like(c.c)
    for theta, a in zip(grid.thetas, coef):
        if a != 0.0:
            grad -= a * _sigmoid_slopes(c, theta, sp.k)
    return grad * (sp.fac * sp.k / pairs)


def ss_rate_grad(c: DistanceMatrix, grid: ThresholdGrid, sp: SmoothingParams = None,
                 normalizer_mode: str = BOUNDED) -> np.ndarray:
    """
    Gradient of smooth SS_rate on a fixed grid, entry by entry.

    Every entry C_ij is treated as an independent variable, so the result
    is symmetric with a zero diagonal; the derivative with respect to the
    unordered pair distance is g_ij + g_ji.

    Args:
        c: Distance matrix
        grid: Fixed threshold grid
        sp: Smoothing parameters (k, fac)
        normalizer_mode: "bounded" or "paper_literal"

    Returns:
        np.ndarray: D x D gradient
    """
    sp = sp or SmoothingParams()
    curve = box_curve(c, grid, SMOOTH, sp)
    coef = _dss_dp(curve, ss_rate(curve, normalizer_mode), normalizer_mode)
    return _entry_grad(c, grid, sp, coef)


def ss_rate_value_and_grad(c: DistanceMatrix, grid_count: int = DEFAULT_GRID_COUNT,
                           sp: SmoothingParams = None,
                           normalizer_mode: str = BOUNDED) -> Tuple[SsRateResult, np.ndarray]:
    """
    Smooth SS_rate on the data grid (tz = 0, tv = max C) and its pair gradient.

    The grid's upper end follows the largest distance, so the derivative of
    that pair picks up the dependence through tv as well.

    Args:
        c: Distance matrix
        grid_count: Number of thresholds
        sp: Smoothing parameters
        normalizer_mode: "bounded" or "paper_literal"

    Returns:
        tuple: (SsRateResult, symmetric D x D matrix of dSS/d(pair distance))
    """
    sp = sp or SmoothingParams()
    grid = data_grid(c, grid_count)
    curve = box_curve(c, grid, SMOOTH, sp)
    result = ss_rate(curve, normalizer_mode)
    coef = _dss_dp(curve, result, normalizer_mode)
    entry = _entry_grad(c, grid, sp, coef)
    pair_grad = entry + entry.T

    tv = c.max_off_diagonal()
    if tv > 0.0 and np.any(coef != 0.0):
        pairs = c.d * (c.d - 1)
        dtheta_dtv = (1.0 + grid.thetas) * grid.unit_positions() / (1.0 + tv)
        dp_dtheta = np.array([
            _sigmoid_slopes(c, theta, sp.k).sum() for theta in grid.thetas
        ]) * (sp.fac * sp.k / pairs)
        dss_dtv = float(np.sum(coef * dp_dtheta * dtheta_dtv))
        masked = np.where(np.eye(c.d, dtype=bool), -np.inf, c.c)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        pair_grad[i, j] += dss_dtv
        pair_grad[j, i] += dss_dtv
    return result, pair_grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float) -> Tuple[float, int]:
    """
    Largest |a - n| / max(|a|, |n|, floor) over entries with max(|a|, |n|) > floor.

    Returns:
        tuple: (max relative error, number of entries compared)
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    mask = scale > floor
    if not mask.any():
        return 0.0, 0
    rel = np.abs(analytic - numeric)[mask] / scale[mask]
    return float(rel.max()), int(mask.sum())


def random_distance_matrix(rng: np.random.Generator, d: int) -> DistanceMatrix:
    """Symmetric matrix with uniform(0.01, 1) off-diagonal entries and zero diagonal."""
    upper = np.triu(rng.uniform(0.01, 1.0, size=(d, d)), k=1)
    return DistanceMatrix(upper + upper.T)


def check_ss_rate_grad(seed: int, d: int = 8, grid_count: int = 16,
                       sp: SmoothingParams = SmoothingParams(k=20.0, fac=1.0),
                       h: float = 1e-5, normalizer_mode: str = BOUNDED,
                       tolerance: float = 1e-4, floor: float = 1e-8) -> GradCheckResult:
    """
    Compare ss_rate_grad with central finite differences on a random C.

    Each unordered pair is perturbed symmetrically (C_ij and C_ji together)
    and compared with g_ij + g_ji; the grid stays fixed.
    """
    rng = np.random.default_rng(seed)
    c = random_distance_matrix(rng, d)
    grid = data_grid(c, grid_count)
    analytic = ss_rate_grad(c, grid, sp, normalizer_mode)

    def value(matrix):
        curve = box_curve(DistanceMatrix(matrix), grid, SMOOTH, sp)
        return ss_rate(curve, normalizer_mode).unclamped

    a_list, n_list = [], []
    for i in range(d):
        for j in range(i + 1, d):
            plus, minus = c.c.copy(), c.c.copy()
            plus[i, j] += h
            plus[j, i] += h
            minus[i, j] -= h
            minus[j, i] -= h
            n_list.append((value(plus) - value(minus)) / (2.0 * h))
            a_list.append(analytic[i, j] + analytic[j, i])
    error, checked = max_relative_error(np.array(a_list), np.array(n_list), floor)
    return GradCheckResult(max_relative_error=error, checked=checked, tolerance=tolerance)
