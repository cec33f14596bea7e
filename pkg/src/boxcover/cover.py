"""
Classical box covering on explicit graphs.

A box of size theta is a node set whose pairwise hop distances are all
<= theta. Greedy and burning heuristics give upper bounds on the minimum
box count; exact_min_cover enumerates partitions for tiny graphs.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.boxcover.graph import SimpleGraph, bfs_all_pairs
from src.fractal.metric import PowerLawFit, fit_power_law
from src.utils.errors import ValidationError

logger = logging.getLogger(__name__)

DIAMETER = "diameter"
RADIUS = "radius"
CONVENTIONS = (DIAMETER, RADIUS)

EXACT_MAX_NODES = 12


@dataclass(frozen=True)
class BoxCover:
    """Assignment of every node to a box."""

    assignment: np.ndarray
    theta: int
    count: int
    convention: str = DIAMETER

    def boxes(self) -> List[List[int]]:
        result: List[List[int]] = [[] for _ in range(self.count)]
        for node, box in enumerate(self.assignment):
            result[int(box)].append(node)
        return result

    def max_box_diameter(self, dist: np.ndarray) -> float:
        """Largest pairwise hop distance inside any box."""
        worst = 0.0
        for members in self.boxes():
            if len(members) > 1:
                worst = max(worst, float(dist[np.ix_(members, members)].max()))
        return worst

    def is_valid(self, dist: np.ndarray) -> bool:
        """Every node assigned and every box within the diameter bound."""
        return bool(np.all(self.assignment >= 0)) and self.max_box_diameter(dist) <= self.theta


def _check_theta(theta: int) -> int:
    if int(theta) != theta or theta < 0:
        raise ValidationError(f"Box size theta must be an integer >= 0, got {theta}")
    return int(theta)


def _grow_box(seed: int, uncovered: set, dist: np.ndarray, theta: int, rank: np.ndarray) -> List[int]:
    """Add uncovered nodes nearest-first while the diameter bound holds."""
    box = [seed]
    for u in sorted(uncovered - {seed}, key=lambda u: (dist[seed, u], rank[u])):
        if dist[seed, u] > theta:
            break
        if all(dist[u, m] <= theta for m in box):
            box.append(u)
    return box


def greedy_box_cover(g: SimpleGraph, theta: int, seed: int = 0) -> BoxCover:
    """
    Repeatedly take the candidate box covering the most uncovered nodes.

    Candidates are grown from every uncovered node; ties go to the box with
    the smallest lowest-id member, then to the earliest in the seeded
    shuffle. Components are covered independently.

    Args:
        g: Graph
        theta: Box size (max hop distance inside a box)
        seed: Shuffle seed

    Returns:
        BoxCover
    """
    theta = _check_theta(theta)
    dist = bfs_all_pairs(g)
    rank = np.empty(g.n, dtype=np.int64)
    rank[np.random.default_rng(seed).permutation(g.n)] = np.arange(g.n)
    assignment = np.full(g.n, -1, dtype=np.int64)
    count = 0
    for component in g.components():
        uncovered = set(component)
        while uncovered:
            best, best_key = None, None
            for v in sorted(uncovered, key=lambda u: rank[u]):
                box = _grow_box(v, uncovered, dist, theta, rank)
                key = (-len(box), min(box))
                if best_key is None or key < best_key:
                    best, best_key = box, key
            assignment[best] = count
            count += 1
            uncovered.difference_update(best)
    return BoxCover(assignment, theta, count, DIAMETER)


def burning_box_cover(g: SimpleGraph, theta: int, seed: int = 0,
                      convention: str = DIAMETER) -> BoxCover:
    """
    Burn boxes from randomly selected seed nodes until all nodes are covered.

    convention="diameter": compact burning; a box keeps only candidates
    within theta of every node already burned, so it satisfies the diameter
    bound. convention="radius": a box is every uncovered node within
    max(theta - 1, 0) hops of the seed; the diameter bound is not enforced.

    Args:
        g: Graph
        theta: Box size
        seed: Seed for the random seed-node choice
        convention: "diameter" or "radius"

    Returns:
        BoxCover
    """
    theta = _check_theta(theta)
    if convention not in CONVENTIONS:
        raise ValidationError(f"Unknown burning convention '{convention}'")
    dist = bfs_all_pairs(g)
    rng = np.random.default_rng(seed)
    assignment = np.full(g.n, -1, dtype=np.int64)
    count = 0
    for component in g.components():
        uncovered = set(component)
        while uncovered:
            if convention == RADIUS:
                center = int(rng.choice(sorted(uncovered)))
                radius = max(theta - 1, 0)
                box = [u for u in sorted(uncovered) if dist[center, u] <= radius]
            else:
                box = []
                candidates = set(uncovered)
                while candidates:
                    burned = int(rng.choice(sorted(candidates)))
                    box.append(burned)
                    candidates.discard(burned)
                    candidates = {u for u in candidates if dist[burned, u] <= theta}
            assignment[box] = count
            count += 1
            uncovered.difference_update(box)
    return BoxCover(assignment, theta, count, convention)


def exact_min_cover(g: SimpleGraph, theta: int) -> int:
    """
    Minimum number of boxes, by branch-and-bound over set partitions.

    Only for graphs with at most 12 nodes.
    """
    theta = _check_theta(theta)
    if g.n > EXACT_MAX_NODES:
        raise ValidationError(f"exact_min_cover supports n <= {EXACT_MAX_NODES}, got {g.n}")
    compatible = bfs_all_pairs(g) <= theta
    best = [g.n]
    boxes: List[List[int]] = []

    def place(node: int):
        if len(boxes) >= best[0]:
            return
        if node == g.n:
            best[0] = len(boxes)
            return
        for box in boxes:
            if all(compatible[node, m] for m in box):
                box.append(node)
                place(node + 1)
                box.pop()
        boxes.append([node])
        place(node + 1)
        boxes.pop()

    place(0)
    return best[0]


def cover_counts(g: SimpleGraph, thetas: Sequence[int], algorithm: str = "greedy",
                 seed: int = 0) -> List[int]:
    """Box counts for several box sizes with one algorithm."""
    counts = []
    for theta in thetas:
        if algorithm == "greedy":
            counts.append(greedy_box_cover(g, theta, seed).count)
        elif algorithm == "burning":
            counts.append(burning_box_cover(g, theta, seed, DIAMETER).count)
        elif algorithm == "burning_radius":
            counts.append(burning_box_cover(g, theta, seed, RADIUS).count)
        elif algorithm == "exact":
            counts.append(exact_min_cover(g, theta))
        else:
            raise ValidationError(f"Unknown covering algorithm '{algorithm}'")
    return counts


def db_from_counts(thetas: Sequence[float], counts: Sequence[float]) -> PowerLawFit:
    """Box dimension from (theta, N(theta)) pairs: N ~ (1 + theta)^(-d_B)."""
    return fit_power_law(thetas, counts)


def cover_summary(g: SimpleGraph, theta: int, seed: int = 0) -> dict:
    """Counts from every algorithm at one box size, for reports."""
    dist = bfs_all_pairs(g)
    greedy = greedy_box_cover(g, theta, seed)
    burning = burning_box_cover(g, theta, seed, DIAMETER)
    radius = burning_box_cover(g, theta, seed, RADIUS)
    exact: Optional[int] = exact_min_cover(g, theta) if g.n <= EXACT_MAX_NODES else None
    if not radius.is_valid(dist):
        logger.info(f"Radius-convention burning exceeds the diameter bound at theta={theta}")
    return {
        "theta": int(theta),
        "greedy": greedy.count,
        "burning": burning.count,
        "burning_radius": radius.count,
        "burning_radius_valid": radius.is_valid(dist),
        "exact": exact,
    }
