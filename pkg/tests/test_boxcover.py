import networkx as nx
import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.boxcover import (
    RADIUS,
    UNREACHABLE,
    SimpleGraph,
    bfs_all_pairs,
    burning_box_cover,
    cover_counts,
    cover_summary,
    db_from_counts,
    exact_min_cover,
    greedy_box_cover,
    read_edge_list,
    write_edge_list,
)
from src.data import synth_graph
from src.utils.errors import ValidationError


def path_graph(n):
    return SimpleGraph.from_networkx(nx.path_graph(n))


def star_graph(leaves):
    return SimpleGraph.from_networkx(nx.star_graph(leaves))


class TestGraph:
    def test_path_distances(self):
        dist = bfs_all_pairs(path_graph(3))
        assert dist[0, 2] == 2

    def test_disconnected_pair(self):
        dist = bfs_all_pairs(SimpleGraph(2, ()))
        assert dist[0, 1] == UNREACHABLE

    def test_complete_graph(self):
        dist = bfs_all_pairs(SimpleGraph.from_networkx(nx.complete_graph(4)))
        assert_array_equal(dist, np.ones((4, 4)) - np.eye(4))

    def test_invalid_edges_rejected(self):
        with pytest.raises(ValidationError, match="Self-loop"):
            SimpleGraph(3, ((1, 1),))
        with pytest.raises(ValidationError, match="Duplicate"):
            SimpleGraph(3, ((0, 1), (1, 0)))
        with pytest.raises(ValidationError, match="outside"):
            SimpleGraph(2, ((0, 2),))

    def test_edge_list_round_trip(self, tmp_path):
        g = SimpleGraph(5, ((0, 1), (1, 2)))
        path = write_edge_list(g, tmp_path / "g.edgelist", comment="test")
        loaded = read_edge_list(path)
        assert loaded.n == 5
        assert loaded.edges == g.edges

    def test_edge_list_comments_and_errors(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# a comment\n0 1\n1 2  # trailing\n\n")
        assert read_edge_list(path).n == 3
        path.write_text("0 1 2\n")
        with pytest.raises(ValidationError, match="expected 'u v'"):
            read_edge_list(path)


class TestGreedy:
    def test_path_of_four(self):
        cover = greedy_box_cover(path_graph(4), 1, seed=0)
        assert cover.count == 2

    def test_theta_at_diameter_gives_one_box(self):
        g = synth_graph("random_connected", 10, seed=3)
        diameter = int(bfs_all_pairs(g).max())
        assert greedy_box_cover(g, diameter).count == 1

    def test_theta_zero_gives_singletons(self):
        g = synth_graph("ring", 9)
        assert greedy_box_cover(g, 0).count == 9

    def test_negative_theta_rejected(self):
        with pytest.raises(ValidationError):
            greedy_box_cover(path_graph(3), -1)

    def test_deterministic_given_seed(self):
        g = synth_graph("random_connected", 30, seed=1, p=0.1)
        a = greedy_box_cover(g, 2, seed=4)
        b = greedy_box_cover(g, 2, seed=4)
        assert_array_equal(a.assignment, b.assignment)

    def test_components_covered_separately(self):
        g = SimpleGraph(4, ((0, 1), (2, 3)))
        assert greedy_box_cover(g, 5).count == 2


class TestBurning:
    def test_star_theta_two(self):
        for seed in range(5):
            assert burning_box_cover(star_graph(5), 2, seed).count == 1

    def test_star_theta_one(self):
        g = star_graph(5)
        for seed in range(10):
            count = burning_box_cover(g, 1, seed).count
            assert count in (5, 6)
            assert count >= exact_min_cover(g, 1)

    def test_single_node(self):
        assert burning_box_cover(SimpleGraph(1, ()), 1).count == 1

    def test_radius_convention_uses_seed_balls(self):
        g = path_graph(5)
        cover = burning_box_cover(g, 1, seed=0, convention=RADIUS)
        # radius theta - 1 = 0: every box is a single node
        assert cover.count == 5

    def test_unknown_convention_rejected(self):
        with pytest.raises(ValidationError):
            burning_box_cover(path_graph(3), 1, convention="center")


class TestExact:
    def test_small_cases(self):
        assert exact_min_cover(path_graph(4), 1) == 2
        assert exact_min_cover(SimpleGraph.from_networkx(nx.complete_graph(4)), 1) == 1
        assert exact_min_cover(SimpleGraph(4, ((0, 1), (2, 3))), 1) == 2
        assert exact_min_cover(star_graph(5), 1) == 5

    def test_too_many_nodes_rejected(self):
        with pytest.raises(ValidationError):
            exact_min_cover(path_graph(13), 1)


@pytest.mark.slow
def test_heuristics_bounded_by_exact_oracle():
    gen = np.random.default_rng(0)
    for instance in range(100):
        n = int(gen.integers(4, 11))
        g = synth_graph("random_connected", n, seed=instance, p=0.25)
        dist = bfs_all_pairs(g)
        for theta in (1, 2, 3):
            best = exact_min_cover(g, theta)
            greedy = greedy_box_cover(g, theta, seed=instance)
            burning = burning_box_cover(g, theta, seed=instance)
            assert greedy.is_valid(dist) and burning.is_valid(dist)
            assert greedy.count >= best
            assert burning.count >= best


def test_counts_non_increasing_in_theta():
    thetas = [0, 1, 2, 3, 4, 6]
    small = synth_graph("random_connected", 10, seed=2, p=0.1)
    ring = synth_graph("ring", 30)
    for graph, algorithm in ((small, "exact"), (ring, "greedy")):
        counts = cover_counts(graph, thetas, algorithm)
        assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_ring_lattice_dimension():
    ring = synth_graph("ring", 64)
    thetas = [1, 3, 7, 15]
    counts = cover_counts(ring, thetas, "greedy")
    assert counts == [32, 16, 8, 4]
    assert db_from_counts(thetas, counts).d_b == pytest.approx(1.0, abs=0.15)


def test_cover_summary_fields():
    row = cover_summary(path_graph(6), 2, seed=0)
    assert row["theta"] == 2
    assert row["exact"] == 2
    assert row["greedy"] >= row["exact"] and row["burning"] >= row["exact"]
    assert isinstance(row["burning_radius_valid"], bool)
