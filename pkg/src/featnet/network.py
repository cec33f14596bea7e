"""
Feature network construction from hidden-layer activations.

A hidden tensor is compressed to a B x D matrix, transposed to a D x B
feature matrix F (one node per channel), and turned into the normalized
distance matrix C_ij = ||F_i - F_j||_2 / sqrt(B). Thresholding C gives the
adjacency of the feature network.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from src.utils.errors import ValidationError

# Axes averaged away by reduce_mean, per layout.
LAYOUTS = {
    "BD": (),
    "BDHW": (2, 3),
    "BND": (1,),
}


def _require_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        bad = int(np.size(values) - np.count_nonzero(np.isfinite(values)))
        raise ValidationError(f"{what} contains {bad} non-finite value(s)")


@dataclass(frozen=True)
class HiddenTensor:
    """Raw activations of one hidden layer in a declared layout."""

    values: np.ndarray
    layout: str

    def __post_init__(self):
        layout = self.layout.upper()
        if layout not in LAYOUTS:
            raise ValidationError(
                f"Unsupported layout '{self.layout}' (expected one of {', '.join(LAYOUTS)})"
            )
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != len(layout):
            raise ValidationError(
                f"Layout {layout} needs {len(layout)} axes, got shape {values.shape}"
            )
        if min(values.shape) < 1:
            raise ValidationError(f"All dimensions must be >= 1, got shape {values.shape}")
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "values", values)

    @property
    def dims(self) -> dict:
        return dict(zip(self.layout, self.values.shape))

    @property
    def batch(self) -> int:
        return self.dims["B"]

    @property
    def channels(self) -> int:
        return self.dims["D"]


@dataclass(frozen=True)
class FeatureMatrix:
    """D x B matrix: D nodes, each with a B-dimensional feature vector."""

    data: np.ndarray
    stage: str = field(default="post-reduce", compare=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"Feature matrix must be 2-D, got shape {data.shape}")
        if data.shape[0] < 2:
            raise ValidationError(f"Feature matrix needs at least 2 nodes, got {data.shape[0]}")
        if data.shape[1] < 1:
            raise ValidationError("Feature matrix needs feature dimension >= 1")
        _require_finite(data, "Feature matrix")
        object.__setattr__(self, "data", data)

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def b(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric D x D matrix of normalized pairwise distances."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError(f"Distance matrix must be square, got shape {c.shape}")
        _require_finite(c, "Distance matrix")
        if not np.array_equal(c, c.T):
            raise ValidationError("Distance matrix is not exactly symmetric")
        if np.any(np.diag(c) != 0.0):
            raise ValidationError("Distance matrix must have a zero diagonal")
        if np.any(c < 0.0):
            raise ValidationError("Distance matrix has negative entries")
        object.__setattr__(self, "c", c)

    @property
    def d(self) -> int:
        return self.c.shape[0]

    def off_diagonal(self) -> np.ndarray:
        """Off-diagonal entries (ordered pairs i != j) as a flat array."""
        mask = ~np.eye(self.d, dtype=bool)
        return self.c[mask]

    def max_off_diagonal(self) -> float:
        if self.d < 2:
            return 0.0
        return float(self.off_diagonal().max())


@dataclass(frozen=True)
class Adjacency:
    """Binary adjacency of the thresholded feature network."""

    a: np.ndarray
    epsilon: float

    @property
    def edge_count(self) -> int:
        """Undirected edges, self-loops excluded."""
        return int((self.a.sum() - np.trace(self.a)) // 2)


def reduce_mean(t: HiddenTensor) -> np.ndarray:
    """
    Compress a hidden tensor to a B x D matrix.

    BDHW averages over height and width, BND over tokens, BD is copied.

    Args:
        t: Hidden tensor

    Returns:
        np.ndarray: B x D matrix
    """
    _require_finite(t.values, f"{t.layout} tensor")
    axes = LAYOUTS[t.layout]
    if not axes:
        return t.values.copy()
    return t.values.mean(axis=axes)


def to_feature_matrix(h: np.ndarray) -> FeatureMatrix:
    """Transpose a B x D matrix into the D x B feature matrix."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2:
        raise ValidationError(f"Expected a B x D matrix, got shape {h.shape}")
    return FeatureMatrix(np.ascontiguousarray(h.T))


def feature_network(t: HiddenTensor) -> FeatureMatrix:
    """Build the feature matrix of a hidden tensor (reduce, then transpose)."""
    return to_feature_matrix(reduce_mean(t))


def distance_matrix(f: FeatureMatrix) -> DistanceMatrix:
    """
    Normalized pairwise Euclidean distances between feature-matrix rows.

    Each pair is computed once (condensed form) and mirrored, so the
    result is exactly symmetric with a zero diagonal.

    Args:
        f: Feature matrix (D x B)

    Returns:
        DistanceMatrix: C_ij = ||F_i - F_j||_2 / sqrt(B)
    """
    condensed = pdist(f.data, metric="euclidean") / np.sqrt(f.b)
    return DistanceMatrix(squareform(condensed, checks=False))


def adjacency(c: DistanceMatrix, epsilon: float) -> Adjacency:
    """
    Threshold a distance matrix: A_ij = 1 iff C_ij < epsilon (strict).

    Epsilon is on the sqrt(B)-normalized distance scale.
    """
    if not np.isfinite(epsilon) or epsilon < 0:
        raise ValidationError(f"epsilon must be a finite value >= 0, got {epsilon}")
    return Adjacency((c.c < epsilon).astype(np.uint8), float(epsilon))


def distance_backward(f: FeatureMatrix, c: DistanceMatrix, g: np.ndarray) -> np.ndarray:
    """
    Vector-Jacobian product of distance_matrix.

    Args:
        f: Feature matrix the distances were computed from
        c: Its distance matrix
        g: Symmetric D x D matrix holding dL/dC for each unordered pair
           (both mirrored entries carry the same pair total)

    Returns:
        np.ndarray: dL/dF, shape D x B. Pairs at zero distance contribute zero.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.shape != c.c.shape:
        raise ValidationError(f"Gradient shape {g.shape} does not match distances {c.c.shape}")
    dist = c.c * np.sqrt(f.b)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(dist > 0.0, g / (np.sqrt(f.b) * dist), 0.0)
    np.fill_diagonal(w, 0.0)
    return w.sum(axis=1)[:, None] * f.data - w @ f.data


def permute_nodes(f: FeatureMatrix, order) -> FeatureMatrix:
    """Relabel nodes: row i of the result is row order[i] of f."""
    return FeatureMatrix(f.data[np.asarray(order)], stage=f.stage)
