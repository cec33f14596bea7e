"""
Seeded synthetic data: point sets with known dimension, labeled Gaussian
blobs and small graphs.
"""

from typing import Optional

import networkx as nx
import numpy as np

from src.boxcover.graph import SimpleGraph
from src.data.tables import Dataset
from src.utils.errors import ValidationError

UNIFORM_CUBE = "uniform_cube"
SEGMENT = "segment"
CANTOR = "cantor"
POINT_KINDS = (UNIFORM_CUBE, SEGMENT, CANTOR)

RING = "ring"
PATH = "path"
STAR = "star"
RANDOM_CONNECTED = "random_connected"
GRAPH_KINDS = (RING, PATH, STAR, RANDOM_CONNECTED)


def cantor_sample(n: int, depth: int, rng: np.random.Generator) -> np.ndarray:
    """
    Points of the depth-limited middle-thirds Cantor set.

    Each point picks a ternary digit 0 or 2 at every level, then falls
    uniformly inside the remaining interval of width 3^-depth.
    """
    if depth < 1:
        raise ValidationError(f"Cantor depth must be >= 1, got {depth}")
    digits = 2 * rng.integers(0, 2, size=(n, depth))
    scales = 3.0 ** -np.arange(1, depth + 1)
    return digits @ scales + rng.random(n) * 3.0 ** -depth


def synth_points(kind: str, n: int, seed: int, dim: int = 2, depth: int = 7) -> np.ndarray:
    """
    Generate a point set.

    Args:
        kind: "uniform_cube" (unit cube in dim dimensions), "segment" or
            "cantor" (both along the first axis of a dim-dimensional space)
        n: Number of points (>= 1)
        seed: Seed
        dim: Ambient dimension
        depth: Cantor recursion depth

    Returns:
        np.ndarray: n x dim points
    """
    if kind not in POINT_KINDS:
        raise ValidationError(f"Unknown point set '{kind}' (expected one of {POINT_KINDS})")
    if n < 1 or dim < 1:
        raise ValidationError(f"n and dim must be >= 1, got n={n}, dim={dim}")
    rng = np.random.default_rng(seed)
    if kind == UNIFORM_CUBE:
        return rng.random((n, dim))
    points = np.zeros((n, dim))
    points[:, 0] = rng.random(n) if kind == SEGMENT else cantor_sample(n, depth, rng)
    return points


def blob_centers(classes: int, dim: int, separation: float, rng: np.random.Generator) -> np.ndarray:
    """Centers on a circle (a line when dim = 1) with adjacent spacing equal to separation."""
    centers = np.zeros((classes, dim))
    if dim == 1:
        centers[:, 0] = (np.arange(classes) - (classes - 1) / 2.0) * separation
        return centers
    radius = separation / (2.0 * np.sin(np.pi / classes))
    angles = rng.uniform(0.0, 2.0 * np.pi) + 2.0 * np.pi * np.arange(classes) / classes
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)
    return centers


def synth_blobs(classes: int, per_class: int, dim: int = 2, separation: float = 5.0,
                seed: int = 0, std: float = 1.0) -> Dataset:
    """
    Isotropic Gaussian clusters with unit-std noise, rows shuffled.

    Args:
        classes: Number of classes (>= 2)
        per_class: Rows per class
        dim: Feature dimension
        separation: Distance between neighbouring centers, in units of std
        seed: Seed
        std: Cluster standard deviation

    Returns:
        Dataset: classes * per_class rows
    """
    if classes < 2:
        raise ValidationError(f"Blobs need at least 2 classes, got {classes}")
    if per_class < 1 or dim < 1:
        raise ValidationError(f"per_class and dim must be >= 1, got {per_class}, {dim}")
    if separation < 0 or std <= 0:
        raise ValidationError(f"separation must be >= 0 and std > 0, got {separation}, {std}")
    rng = np.random.default_rng(seed)
    centers = blob_centers(classes, dim, separation * std, rng)
    labels = np.repeat(np.arange(classes), per_class)
    x = centers[labels] + rng.normal(0.0, std, size=(labels.size, dim))
    order = rng.permutation(labels.size)
    return Dataset(x[order], labels[order])


def synth_graph(kind: str, n: int, seed: int = 0, p: float = 0.2) -> SimpleGraph:
    """
    Small test graphs.

    Args:
        kind: "ring", "path", "star" (node 0 is the hub) or "random_connected"
            (random spanning tree plus extra edges with probability p)
        n: Number of nodes
        seed: Seed (random_connected only)
        p: Extra-edge probability

    Returns:
        SimpleGraph
    """
    if kind not in GRAPH_KINDS:
        raise ValidationError(f"Unknown graph kind '{kind}' (expected one of {GRAPH_KINDS})")
    if n < 1:
        raise ValidationError(f"Graph needs n >= 1, got {n}")
    if kind == RING:
        if n < 3:
            raise ValidationError(f"A ring needs at least 3 nodes, got {n}")
        return SimpleGraph.from_networkx(nx.cycle_graph(n))
    if kind == PATH:
        return SimpleGraph.from_networkx(nx.path_graph(n))
    if kind == STAR:
        return SimpleGraph.from_networkx(nx.star_graph(n - 1))
    return random_connected_graph(n, seed, p)


def random_connected_graph(n: int, seed: int, p: float = 0.2,
                           rng: Optional[np.random.Generator] = None) -> SimpleGraph:
    """Random spanning tree (each node joins an earlier one) plus extra edges."""
    if not 0 <= p <= 1:
        raise ValidationError(f"Edge probability must be in [0, 1], got {p}")
    rng = rng or np.random.default_rng(seed)
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for node in range(1, n):
        graph.add_edge(node, int(rng.integers(node)))
    for u in range(n):
        for v in range(u + 1, n):
            if not graph.has_edge(u, v) and rng.random() < p:
                graph.add_edge(u, v)
    return SimpleGraph.from_networkx(graph)
