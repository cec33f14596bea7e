"""
Reference box covering on explicit graphs (greedy, burning, exact oracle).
"""

from src.boxcover.cover import (
    CONVENTIONS,
    DIAMETER,
    EXACT_MAX_NODES,
    RADIUS,
    BoxCover,
    burning_box_cover,
    cover_counts,
    cover_summary,
    db_from_counts,
    exact_min_cover,
    greedy_box_cover,
)
from src.boxcover.graph import (
    UNREACHABLE,
    SimpleGraph,
    bfs_all_pairs,
    read_edge_list,
    write_edge_list,
)

__all__ = [
    "CONVENTIONS",
    "DIAMETER",
    "EXACT_MAX_NODES",
    "RADIUS",
    "UNREACHABLE",
    "BoxCover",
    "SimpleGraph",
    "bfs_all_pairs",
    "burning_box_cover",
    "cover_counts",
    "cover_summary",
    "db_from_counts",
    "exact_min_cover",
    "greedy_box_cover",
    "read_edge_list",
    "write_edge_list",
]
