"""
Simple undirected graphs, hop distances and edge-list files.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np

from src.utils.errors import ValidationError
from src.utils.file_manager import FileManager

UNREACHABLE = np.inf


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph on nodes 0..n-1 without self-loops or duplicate edges."""

    n: int
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"Graph needs at least one node, got n={self.n}")
        seen = set()
        normalized = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"Edge ({u}, {v}) has an endpoint outside [0, {self.n})")
            if u == v:
                raise ValidationError(f"Self-loop on node {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"Duplicate edge {key}")
            seen.add(key)
            normalized.append(key)
        object.__setattr__(self, "edges", tuple(normalized))

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "SimpleGraph":
        """Relabel nodes to 0..n-1 in sorted order."""
        nodes = sorted(graph.nodes())
        index = {node: i for i, node in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in graph.edges() if u != v]
        return cls(len(nodes), tuple(edges))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def components(self) -> List[List[int]]:
        """Connected components as sorted node lists, ordered by smallest node."""
        comps = [sorted(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(comps, key=lambda c: c[0])


def bfs_all_pairs(g: SimpleGraph) -> np.ndarray:
    """
    Hop distances between all node pairs.

    Args:
        g: Graph

    Returns:
        np.ndarray: n x n matrix, unreachable pairs hold UNREACHABLE (inf)
    """
    dist = np.full((g.n, g.n), UNREACHABLE)
    for source, lengths in nx.all_pairs_shortest_path_length(g.to_networkx()):
        for target, hops in lengths.items():
            dist[source, target] = hops
    return dist


def read_edge_list(path, n: Optional[int] = None) -> SimpleGraph:
    """
    Read a graph from "u v" lines (0-indexed, '#' comments).

    Args:
        path: Edge-list file
        n: Node count; defaults to a "# nodes: N" header, else the largest id + 1

    Returns:
        SimpleGraph
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Edge list not found: {path}")
    edges = []
    declared = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if raw.startswith("# nodes:"):
                declared = int(raw.split(":", 1)[1])
                continue
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'u v', got '{raw.strip()}'")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: node ids must be integers")
    if n is None:
        largest = max((max(e) for e in edges), default=0)
        n = declared if declared is not None else largest + 1
    return SimpleGraph(n, tuple(edges))


def write_edge_list(g: SimpleGraph, path, comment: Optional[str] = None) -> Path:
    """Atomically write a graph as an edge list."""
    lines: List[str] = [f"# nodes: {g.n}"]
    if comment:
        lines.append(f"# {comment}")
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return FileManager.atomic_write_text(path, "\n".join(lines) + "\n")
