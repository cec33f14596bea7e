"""
Classical (Torgerson) multidimensional scaling of distance matrices.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from src.featnet import DistanceMatrix
from src.utils.errors import ValidationError
from src.utils.file_manager import FileManager

logger = logging.getLogger(__name__)

# Eigenvalues below this fraction of the largest magnitude count as zero.
EIG_TOL = 1e-10


@dataclass(frozen=True)
class Embedding2D:
    """Low-dimensional coordinates of the nodes of a distance matrix."""

    coords: np.ndarray
    stress: float
    eigenvalues: np.ndarray = field(repr=False)
    warnings: Tuple[str, ...] = ()

    @property
    def d(self) -> int:
        return self.coords.shape[0]


def torgerson(dist: np.ndarray, dim: int) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """
    Coordinates from the top eigenpairs of -1/2 J D^2 J.

    Args:
        dist: n x n symmetric distance array
        dim: Number of output coordinates

    Returns:
        tuple: (n x dim coordinates, eigenvalues in descending order, warnings)
    """
    n = dist.shape[0]
    centering = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * centering @ (dist ** 2) @ centering
    b = (b + b.T) / 2.0

    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    warnings = []
    scale = max(float(np.abs(evals).max()), np.finfo(float).tiny)
    coords = np.zeros((n, dim))
    for axis in range(min(dim, n)):
        value = evals[axis]
        if value <= EIG_TOL * scale:
            if value < -EIG_TOL * scale:
                warnings.append(f"eigenvalue {axis} is negative ({value:.3e}); coordinate zeroed")
            continue
        vector = evecs[:, axis]
        # Fix the sign so the largest-magnitude component is positive.
        if vector[np.argmax(np.abs(vector))] < 0:
            vector = -vector
        coords[:, axis] = vector * np.sqrt(value)
    for message in warnings:
        logger.warning(message)
    return coords, evals, warnings


def classical_mds(c: DistanceMatrix, dim: int = 2) -> Embedding2D:
    """
    Embed a distance matrix with classical MDS.

    Args:
        c: Distance matrix (D >= 3)
        dim: Embedding dimension

    Returns:
        Embedding2D: coordinates plus stress
        ||embedded distances - C||_F / ||C||_F
    """
    if c.d < 3:
        raise ValidationError(f"MDS needs at least 3 nodes, got {c.d}")
    if dim < 1:
        raise ValidationError(f"Embedding dimension must be >= 1, got {dim}")
    coords, evals, warnings = torgerson(c.c, dim)
    embedded = squareform(pdist(coords))
    norm = np.linalg.norm(c.c)
    stress = float(np.linalg.norm(embedded - c.c) / norm) if norm > 0 else 0.0
    return Embedding2D(coords=coords, stress=stress, eigenvalues=evals, warnings=tuple(warnings))


def write_coordinates_csv(e: Embedding2D, path) -> Path:
    """Dump coordinates as CSV with columns node_id, x, y (further axes as x2, x3, ...)."""
    columns = {"node_id": np.arange(e.d)}
    names = ["x", "y"] + [f"x{i}" for i in range(2, e.coords.shape[1])]
    for axis, name in enumerate(names[:e.coords.shape[1]]):
        columns[name] = e.coords[:, axis]
    frame = pd.DataFrame(columns)
    return FileManager.atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))
