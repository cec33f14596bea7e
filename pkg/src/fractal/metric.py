"""
Simulated box counting and the SS_rate self-similarity metric.

For a distance matrix C the connection probability p(theta) is the share
of ordered pairs i != j with C_ij <= theta (hard) or the mean of
sigmoid(k (theta - C_ij)) (smooth). The simulated box count is

    N = 1 + (D - 1) log_D(D + (1 - D) p)

and SS_rate integrates |log N - pf| over d log(1 + theta), where pf is the
straight line from log D at tz down to 0 at tv.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import expit
from scipy.stats import linregress

from src.featnet import DistanceMatrix
from src.fractal.grid import MIN_GRID_COUNT, SmoothingParams, ThresholdGrid, lo
from src.utils.errors import DegenerateInputError, ValidationError

logger = logging.getLogger(__name__)

HARD = "hard"
SMOOTH = "smooth"
MODES = (HARD, SMOOTH)

BOUNDED = "bounded"
PAPER_LITERAL = "paper_literal"
NORMALIZER_MODES = (BOUNDED, PAPER_LITERAL)

LOG_ARG_FLOOR = 1e-12
_CURVE_TOL = 1e-12


@dataclass(frozen=True)
class BoxCurve:
    """Connection probabilities and simulated box counts along a grid."""

    grid: ThresholdGrid
    p: np.ndarray
    n: np.ndarray
    d: int
    mode: str = HARD
    k: Optional[float] = None
    clamped: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        n = np.asarray(self.n, dtype=np.float64)
        if p.shape != (self.grid.count,) or n.shape != (self.grid.count,):
            raise ValidationError("Curve arrays must match the grid length")
        if self.mode not in MODES:
            raise ValidationError(f"Unknown mode '{self.mode}'")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(n))):
            raise ValidationError("Curve contains non-finite values")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValidationError("Connection probabilities must lie in [0, 1]")
        if np.any(n < 1.0 - _CURVE_TOL) or np.any(n > self.d * (1.0 + _CURVE_TOL)):
            raise ValidationError(f"Box counts must lie in [1, {self.d}]")
        if np.any(np.diff(p) < -_CURVE_TOL) or np.any(np.diff(n) > _CURVE_TOL):
            raise ValidationError("Curve is not monotone along theta")
        clamped = self.clamped
        if clamped is None:
            clamped = np.zeros(self.grid.count, dtype=bool)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "clamped", np.asarray(clamped, dtype=bool))

    @property
    def mode_label(self) -> str:
        return f"smooth({self.k:g})" if self.mode == SMOOTH else HARD

    @property
    def clamp_count(self) -> int:
        return int(self.clamped.sum())


@dataclass(frozen=True)
class SsRateResult:
    """SS_rate of one curve."""

    value: float
    raw_integral: float
    normalizer_mode: str
    unclamped: float


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of log N against log(1 + theta)."""

    d_b: float
    intercept: float
    residual: float


def _sorted_pairs(c: DistanceMatrix) -> np.ndarray:
    """
    Off-diagonal distances in ascending order.

    Summing over a sorted copy makes every probability independent of node
    labelling, bit for bit.
    """
    if c.d < 2:
        raise ValidationError(f"Connection probability needs D >= 2 nodes, got {c.d}")
    return np.sort(c.off_diagonal())


def _check_mode(mode: str, smoothing: Optional[SmoothingParams]) -> SmoothingParams:
    if mode not in MODES:
        raise ValidationError(f"Unknown mode '{mode}' (expected {' or '.join(MODES)})")
    return smoothing or SmoothingParams()


def _prob_from_pairs(pairs: np.ndarray, theta: float, mode: str, k: float) -> float:
    if mode == HARD:
        return np.searchsorted(pairs, theta, side="right") / pairs.size
    return float(np.sum(expit(k * (theta - pairs)))) / pairs.size


def connect_prob(c: DistanceMatrix, theta: float, mode: str = HARD,
                 smoothing: Optional[SmoothingParams] = None) -> float:
    """
    Share of ordered pairs i != j connected at threshold theta.

    Args:
        c: Distance matrix (D >= 2)
        theta: Threshold, >= 0
        mode: "hard" (C_ij <= theta) or "smooth" (sigmoid(k (theta - C_ij)))
        smoothing: Smoothing parameters for smooth mode

    Returns:
        float: Probability in [0, 1]
    """
    if theta < 0:
        raise ValidationError(f"theta must be >= 0, got {theta}")
    sp = _check_mode(mode, smoothing)
    return float(_prob_from_pairs(_sorted_pairs(c), theta, mode, sp.k))


def box_counts(p, d: int):
    """
    Vectorized simulated box count.

    Args:
        p: Connection probabilities
        d: Node count D >= 2

    Returns:
        tuple: (counts, clamped) where clamped flags entries whose log
        argument was raised to the floor
    """
    if d < 2:
        raise ValidationError(f"Box count needs D >= 2, got {d}")
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0.0) or np.any(p > 1.0 + 1e-9):
        raise ValidationError("Connection probability outside [0, 1]")
    arg = d + (1.0 - d) * p
    clamped = arg <= LOG_ARG_FLOOR
    arg = np.where(clamped, LOG_ARG_FLOOR, arg)
    return 1.0 + (d - 1) * np.log(arg) / np.log(d), clamped


def box_count(p: float, d: int) -> float:
    """N = 1 + (D - 1) log_D(D + (1 - D) p)."""
    counts, clamped = box_counts(np.array([p]), d)
    if clamped[0]:
        logger.warning(f"Box-count log argument clamped to {LOG_ARG_FLOOR} (p={p!r}, D={d})")
    return float(counts[0])


def box_curve(c: DistanceMatrix, grid: ThresholdGrid, mode: str = HARD,
              smoothing: Optional[SmoothingParams] = None) -> BoxCurve:
    """
    Evaluate p(theta) and N_theta at every grid threshold.

    Args:
        c: Distance matrix
        grid: Threshold grid
        mode: "hard" or "smooth"
        smoothing: Smoothing parameters for smooth mode

    Returns:
        BoxCurve
    """
    sp = _check_mode(mode, smoothing)
    pairs = _sorted_pairs(c)
    p = np.array([_prob_from_pairs(pairs, theta, mode, sp.k) for theta in grid.thetas])
    n, clamped = box_counts(p, c.d)
    if clamped.any():
        logger.warning(f"Box-count log argument clamped at {int(clamped.sum())} threshold(s)")
    return BoxCurve(grid=grid, p=p, n=n, d=c.d, mode=mode,
                    k=sp.k if mode == SMOOTH else None, clamped=clamped)


def pf(theta, grid: ThresholdGrid, d: int):
    """
    Linear reference in lo-space: log D at tz, 0 at tv.

    Args:
        theta: Threshold(s) within [tz, tv]
        grid: Grid supplying tz and tv
        d: Node count

    Returns:
        Reference value(s)
    """
    if grid.tv <= grid.tz:
        raise ValidationError("Degenerate grid: tv must exceed tz")
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta < grid.tz) or np.any(theta > grid.tv):
        raise ValidationError(f"theta outside [{grid.tz}, {grid.tv}]")
    lo_tz, lo_tv = lo(grid.tz), lo(grid.tv)
    result = (lo_tv - lo(theta)) / (lo_tv - lo_tz) * np.log(d)
    return float(result) if result.ndim == 0 else result


def pf_on_grid(grid: ThresholdGrid, d: int) -> np.ndarray:
    """pf at the grid thresholds, using the grid's exact lo spacing."""
    return (grid.lo[-1] - grid.lo) / grid.lo_range * np.log(d)


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Weights w with sum(w * y) equal to the trapezoidal integral of y over x."""
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2.0
    w[1:] += dx / 2.0
    return w


def normalizer(grid: ThresholdGrid, d: int, normalizer_mode: str = BOUNDED) -> float:
    """
    Constant multiplying the deviation integral.

    bounded: 2 / ((lo(tv) - lo(tz)) log D), so that a flat curve N = 1 scores 1.
    paper_literal: 2 / (D (lo(tv) - lo(tz))).
    """
    if normalizer_mode == BOUNDED:
        return 2.0 / (grid.lo_range * np.log(d))
    if normalizer_mode == PAPER_LITERAL:
        return 2.0 / (d * grid.lo_range)
    raise ValidationError(
        f"Unknown normalizer mode '{normalizer_mode}' (expected {' or '.join(NORMALIZER_MODES)})"
    )


def ss_rate(curve: BoxCurve, normalizer_mode: str = BOUNDED) -> SsRateResult:
    """
    Self-similarity rate of a box curve, clamped to [0, 1].

    0 means log N follows the linear reference exactly; 1 is the maximal
    deviation.
    """
    if curve.grid.count < MIN_GRID_COUNT:
        raise ValidationError(f"SS_rate needs at least {MIN_GRID_COUNT} thresholds")
    deviation = np.abs(np.log(curve.n) - pf_on_grid(curve.grid, curve.d))
    integral = float(trapezoid_weights(curve.grid.lo) @ deviation)
    scaled = normalizer(curve.grid, curve.d, normalizer_mode) * integral
    return SsRateResult(
        value=float(np.clip(scaled, 0.0, 1.0)),
        raw_integral=integral,
        normalizer_mode=normalizer_mode,
        unclamped=scaled,
    )


def fit_power_law(thetas, counts) -> PowerLawFit:
    """
    Ordinary least squares of log N against log(1 + theta).

    Args:
        thetas: Box sizes / thresholds
        counts: Box counts (> 0)

    Returns:
        PowerLawFit: d_B = -slope, intercept and RMS residual
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    if thetas.shape != counts.shape or thetas.ndim != 1:
        raise ValidationError("thetas and counts must be 1-D arrays of equal length")
    if np.any(counts <= 0) or np.any(thetas < 0):
        raise ValidationError("Box counts must be > 0 and thresholds >= 0")
    x, y = lo(thetas), np.log(counts)
    if np.unique(x).size < 2:
        raise DegenerateInputError("Power-law fit needs at least 2 distinct thresholds")
    fit = linregress(x, y)
    residual = y - (fit.intercept + fit.slope * x)
    return PowerLawFit(
        d_b=float(-fit.slope),
        intercept=float(fit.intercept),
        residual=float(np.sqrt(np.mean(residual ** 2))),
    )


def fractal_dim_fit(curve: BoxCurve) -> PowerLawFit:
    """Fit N_theta ~ (1 + theta)^(-d_B) on a box curve."""
    return fit_power_law(curve.grid.thetas, curve.n)


def curve_warnings(curve: BoxCurve) -> List[str]:
    """Human-readable warnings attached to a curve."""
    if curve.clamp_count:
        return [f"log argument clamped at {curve.clamp_count} threshold(s)"]
    return []
