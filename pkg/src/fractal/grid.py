"""
Threshold grids and smoothing parameters for the box-count sweep.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.featnet import DistanceMatrix
from src.utils.errors import ValidationError

logger = logging.getLogger(__name__)

MIN_GRID_COUNT = 8
DEFAULT_GRID_COUNT = 64
DEFAULT_K = 50.0
DEFAULT_FAC = 1.0

# tv used when every off-diagonal distance is zero.
FALLBACK_TV = 1.0


def lo(x):
    """lo(x) = log(1 + x)."""
    return np.log1p(x)


@dataclass(frozen=True)
class ThresholdGrid:
    """K thresholds between tz and tv, uniformly spaced in log(1 + theta)."""

    tz: float
    tv: float
    count: int = DEFAULT_GRID_COUNT
    lo: np.ndarray = field(init=False, repr=False, compare=False)
    thetas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tz, tv, count = float(self.tz), float(self.tv), int(self.count)
        if not (np.isfinite(tz) and np.isfinite(tv)):
            raise ValidationError(f"Grid bounds must be finite, got tz={tz}, tv={tv}")
        if tz < 0:
            raise ValidationError(f"tz must be >= 0, got {tz}")
        if tv <= tz:
            raise ValidationError(f"Degenerate grid: tv ({tv}) must exceed tz ({tz})")
        if count < MIN_GRID_COUNT:
            raise ValidationError(f"Grid needs at least {MIN_GRID_COUNT} thresholds, got {count}")
        lo_values = np.linspace(lo(tz), lo(tv), count)
        thetas = np.expm1(lo_values)
        thetas[0], thetas[-1] = tz, tv
        if np.any(np.diff(thetas) <= 0):
            raise ValidationError(f"Grid [{tz}, {tv}] too narrow for {count} distinct thresholds")
        object.__setattr__(self, "tz", tz)
        object.__setattr__(self, "tv", tv)
        object.__setattr__(self, "count", count)
        object.__setattr__(self, "lo", lo_values)
        object.__setattr__(self, "thetas", thetas)

    @property
    def lo_range(self) -> float:
        return float(self.lo[-1] - self.lo[0])

    def unit_positions(self) -> np.ndarray:
        """Position of each threshold in [0, 1] along lo-space."""
        return (self.lo - self.lo[0]) / self.lo_range


@dataclass(frozen=True)
class SmoothingParams:
    """Sigmoid smoothing factor k and gradient scaling factor fac."""

    k: float = DEFAULT_K
    fac: float = DEFAULT_FAC

    def __post_init__(self):
        for name in ("k", "fac"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f"Smoothing parameter {name} must be finite and > 0, got {value}")


def data_grid(c: DistanceMatrix, count: int = DEFAULT_GRID_COUNT) -> ThresholdGrid:
    """
    Default grid for a distance matrix: tz = 0, tv = max off-diagonal C.

    Falls back to tv = 1.0 when all distances are zero.
    """
    tv = c.max_off_diagonal()
    if tv <= 0.0:
        logger.warning(f"All pairwise distances are zero; using tv={FALLBACK_TV}")
        tv = FALLBACK_TV
    return ThresholdGrid(0.0, tv, count)
