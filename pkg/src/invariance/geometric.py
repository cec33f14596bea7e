"""
Geometric invariance of hidden layers.

Every layer's nodes are reduced to a low-dimensional point cloud, its
correlation dimension is estimated from the correlation integral, and the
relative spread of those dimensions across layers is reported.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import linregress
from tqdm import tqdm

from src.embed.mds import torgerson
from src.featnet import FeatureMatrix
from src.utils.errors import DegenerateInputError, ValidationError

logger = logging.getLogger(__name__)

PCA = "pca"
CMDS = "cmds"
REDUCERS = (PCA, CMDS)

DEFAULT_FIT_PERCENTILES = (2.0, 20.0)
DEFAULT_FIT_POINTS = 24
MIN_FIT_POINTS = 4
MIN_CORR_POINTS = 10
RECOMMENDED_CORR_POINTS = 50
_RANK_TOL = 1e-10


def _reduce(f: FeatureMatrix, target_dim: int, method: str) -> Tuple[np.ndarray, List[str]]:
    if method not in REDUCERS:
        raise ValidationError(f"Unknown reducer '{method}' (expected one of {REDUCERS})")
    if target_dim < 2 or target_dim > min(f.d, f.b):
        raise ValidationError(
            f"target_dim must satisfy 2 <= target_dim <= min(D, B) = {min(f.d, f.b)}, got {target_dim}"
        )

    if method == CMDS:
        coords, _, warnings = torgerson(squareform(pdist(f.data)), target_dim)
        return coords, list(warnings)

    centered = f.data - f.data.mean(axis=0)
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    coords = np.zeros((f.d, target_dim))
    warnings = []
    rank = int(np.count_nonzero(s > _RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    for axis in range(min(target_dim, rank)):
        vector = u[:, axis]
        if vector[np.argmax(np.abs(vector))] < 0:
            vector = -vector
        coords[:, axis] = vector * s[axis]
    if rank < target_dim:
        warnings.append(f"rank {rank} below target_dim {target_dim}; padded with zero coordinates")
    return coords, warnings


def reduce_dim(f: FeatureMatrix, target_dim: int = 2, method: str = PCA) -> np.ndarray:
    """
    Deterministic projection of the D nodes to target_dim coordinates.

    Args:
        f: Feature matrix (each row is a point)
        target_dim: Output dimension, 2 <= target_dim <= min(D, B)
        method: "pca" (centered SVD) or "cmds" (classical MDS on raw distances)

    Returns:
        np.ndarray: D x target_dim coordinates
    """
    coords, warnings = _reduce(f, target_dim, method)
    for message in warnings:
        logger.warning(message)
    return coords


@dataclass(frozen=True)
class CorrIntegralCurve:
    """Correlation integral sampled on a radius grid."""

    radii: np.ndarray
    t: np.ndarray
    fit_range: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.radii.shape != self.t.shape:
            raise ValidationError("radii and t must have the same length")
        if self.fit_range == (0, 0):
            object.__setattr__(self, "fit_range", (0, int(self.radii.size)))


@dataclass(frozen=True)
class CorrDimFit:
    d_corr: float
    intercept: float
    curve: CorrIntegralCurve
    used_points: int


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValidationError(f"Points must be an N x k array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("Points must be finite")
    return x


def _sorted_distances(x: np.ndarray) -> np.ndarray:
    if x.shape[0] < 2:
        raise ValidationError(f"Correlation integral needs at least 2 points, got {x.shape[0]}")
    if x.shape[0] < MIN_CORR_POINTS:
        logger.warning(f"Correlation integral on only {x.shape[0]} points")
    return np.sort(pdist(x))


def _integral(distances: np.ndarray, radii: np.ndarray) -> np.ndarray:
    # Closed ball: a pair at exactly distance r counts.
    return np.searchsorted(distances, radii, side="right") / distances.size


def corr_integral(x, radii: Sequence[float]) -> CorrIntegralCurve:
    """
    T(r) = (1 / (N (N - 1))) * sum_{i != j} [d_ij <= r].

    Args:
        x: N x k points (N >= 2)
        radii: Radius grid, ascending

    Returns:
        CorrIntegralCurve
    """
    radii = np.asarray(radii, dtype=np.float64).ravel()
    if radii.size == 0:
        raise ValidationError("Radius grid is empty")
    if not np.all(np.isfinite(radii)) or np.any(np.diff(radii) < 0):
        raise ValidationError("Radii must be finite and ascending")
    distances = _sorted_distances(_as_points(x))
    return CorrIntegralCurve(radii=radii, t=_integral(distances, radii))


def corr_dim_fit(x, percentiles: Tuple[float, float] = DEFAULT_FIT_PERCENTILES,
                 points: int = DEFAULT_FIT_POINTS) -> CorrDimFit:
    """
    Slope of log T(r) against log r over a percentile window of distances.

    Args:
        x: N x k points (N >= 10)
        percentiles: Lower and upper percentile of pairwise distances
        points: Number of log-spaced radii

    Returns:
        CorrDimFit
    """
    x = _as_points(x)
    if x.shape[0] < MIN_CORR_POINTS:
        raise ValidationError(f"Correlation dimension needs at least {MIN_CORR_POINTS} points, got {x.shape[0]}")
    if x.shape[0] < RECOMMENDED_CORR_POINTS:
        logger.warning(f"Correlation dimension on {x.shape[0]} points is unreliable")
    low, high = percentiles
    if not 0 <= low < high <= 100:
        raise ValidationError(f"Invalid fit percentiles {percentiles}")
    if points < MIN_FIT_POINTS:
        raise ValidationError(f"Need at least {MIN_FIT_POINTS} fit points, got {points}")

    distances = _sorted_distances(x)
    r_low, r_high = np.percentile(distances, [low, high])
    if r_low <= 0:
        positive = distances[distances > 0]
        if positive.size == 0:
            raise DegenerateInputError("All points coincide; correlation dimension undefined")
        r_low = positive[0]
    if r_high <= r_low:
        raise DegenerateInputError("Fit window collapsed: too many coincident distances")

    radii = np.geomspace(r_low, r_high, points)
    t = _integral(distances, radii)
    usable = t > 0
    if np.count_nonzero(usable) < MIN_FIT_POINTS:
        raise ValidationError(f"Only {np.count_nonzero(usable)} usable (r, T) pairs; need {MIN_FIT_POINTS}")
    log_t = np.log(t[usable])
    if np.ptp(log_t) == 0:
        raise DegenerateInputError("Correlation integral is flat over the fit window")
    fit = linregress(np.log(radii[usable]), log_t)
    first = int(np.argmax(usable))
    curve = CorrIntegralCurve(radii=radii, t=t, fit_range=(first, int(radii.size)))
    return CorrDimFit(
        d_corr=float(fit.slope),
        intercept=float(fit.intercept),
        curve=curve,
        used_points=int(np.count_nonzero(usable)),
    )


def corr_dim(x, percentiles: Tuple[float, float] = DEFAULT_FIT_PERCENTILES,
             points: int = DEFAULT_FIT_POINTS) -> float:
    """Correlation dimension of a point set."""
    return corr_dim_fit(x, percentiles, points).d_corr


def relative_spread(dims: Sequence[float]) -> float:
    """(max - min) / mean."""
    dims = np.asarray(dims, dtype=np.float64)
    mean = float(dims.mean())
    if mean <= 0:
        raise DegenerateInputError(f"Mean correlation dimension must be > 0, got {mean}")
    return float((dims.max() - dims.min()) / mean)


@dataclass(frozen=True)
class GeomInvarianceReport:
    """Per-layer correlation dimensions and their relative spread."""

    layers: Tuple[int, ...]
    dims: Tuple[float, ...]
    delta: float
    method: str
    target_dim: int
    excluded: Dict[int, str] = field(default_factory=dict)
    warnings: Dict[int, List[str]] = field(default_factory=dict)
    stage: str = "post-reduce"

    def to_dict(self) -> dict:
        per_layer = []
        dims = dict(zip(self.layers, self.dims))
        for index in sorted(set(self.layers) | set(self.excluded)):
            notes = list(self.warnings.get(index, []))
            if index in self.excluded:
                notes.append(self.excluded[index])
            per_layer.append({"layer": index, "d_corr": dims.get(index), "warnings": notes})
        return {
            "kind": "geometric",
            "stage": self.stage,
            "method": self.method,
            "target_dim": self.target_dim,
            "per_layer": per_layer,
            "delta": self.delta,
        }


def geom_invariance(layers: List[FeatureMatrix], target_dim: int = 2, method: str = PCA,
                    percentiles: Tuple[float, float] = DEFAULT_FIT_PERCENTILES,
                    points: int = DEFAULT_FIT_POINTS,
                    show_progress: bool = False) -> GeomInvarianceReport:
    """
    Reduce every layer, estimate its correlation dimension, report Delta.

    Layers whose reduction or fit is rejected are excluded with a warning.
    """
    if len(layers) < 2:
        raise ValidationError(f"Geometric invariance needs at least 2 layers, got {len(layers)}")
    if method not in REDUCERS:
        raise ValidationError(f"Unknown reducer '{method}' (expected one of {REDUCERS})")
    kept: List[int] = []
    dims: List[float] = []
    excluded: Dict[int, str] = {}
    notes: Dict[int, List[str]] = {}
    for index, layer in enumerate(tqdm(layers, desc="Correlation dims", disable=not show_progress)):
        try:
            coords, warnings = _reduce(layer, target_dim, method)
            if warnings:
                notes[index] = warnings
            dims.append(corr_dim(coords, percentiles, points))
            kept.append(index)
        except ValidationError as e:
            excluded[index] = str(e)
            logger.warning(f"Layer {index} excluded from geometric invariance: {e}")
    if len(dims) < 2:
        raise DegenerateInputError(f"Only {len(dims)} layer(s) produced a correlation dimension; need 2")
    return GeomInvarianceReport(
        layers=tuple(kept),
        dims=tuple(dims),
        delta=relative_spread(dims),
        method=method,
        target_dim=target_dim,
        excluded=excluded,
        warnings=notes,
        stage=layers[0].stage,
    )
