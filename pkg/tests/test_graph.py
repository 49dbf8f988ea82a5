import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irir.errors import CapacityError, InvalidInputError
from irir.graph import (
    ClassEdgeTracker,
    ExplicitGraph,
    PerfectlyMixed,
    binomial_edge_band,
    class_edge_weight,
    complete_graph,
    generate_erdos_renyi,
    jumbledness_alpha,
    read_edge_list,
    two_set_deviation,
    write_edge_list,
)

PATH3 = ExplicitGraph(3, [(0, 1), (1, 2)])


def brute_alpha(n, edges, p):
    """Max over all non-empty vertex subsets of |e(H) - p C(|H|,2)| / |H|."""
    best = 0.0
    for size in range(1, n + 1):
        for H in itertools.combinations(range(n), size):
            hs = set(H)
            e = sum(1 for a, b in edges if a in hs and b in hs)
            best = max(best, abs(e - p * size * (size - 1) / 2) / size)
    return best


@st.composite
def small_graphs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return n, [pr for pr, k in zip(pairs, keep) if k]


class TestModels:
    def test_mixed_validation(self):
        with pytest.raises(InvalidInputError):
            PerfectlyMixed(10, 0.0)
        with pytest.raises(InvalidInputError):
            PerfectlyMixed(0, 0.5)
        assert PerfectlyMixed(10, 1.0).describe() == {"type": "mixed", "n": 10, "p": 1.0}

    @pytest.mark.parametrize(
        "edges",
        [[(0, 0)], [(0, 1), (1, 0)], [(0, 5)], [(0, 1, -1.0)], [(0,)]],
    )
    def test_explicit_rejects(self, edges):
        with pytest.raises(InvalidInputError):
            ExplicitGraph(3, edges)

    def test_csr_is_symmetric(self):
        g = ExplicitGraph(4, [(2, 0, 1.5), (1, 2), (3, 1, 0.0)])
        assert g.num_edges == 3
        assert g.uniform_weight is None
        nb, w = g.neighbors(2)
        assert dict(zip(nb.tolist(), w.tolist())) == {0: 1.5, 1: 1.0}
        assert sum(g.degree(v) for v in range(4)) == 2 * g.num_edges
        assert g.edges() == [(0, 2, 1.5), (1, 2, 1.0), (1, 3, 0.0)]

    def test_density(self):
        assert complete_graph(5).density == 1.0
        assert PATH3.density == pytest.approx(2 / 3)
        assert ExplicitGraph(1).density == 0.0


class TestErdosRenyi:
    def test_extremes(self):
        assert generate_erdos_renyi(5, 0.0, seed=1).num_edges == 0
        assert generate_erdos_renyi(5, 1.0, seed=1).num_edges == 10

    def test_bad_probability(self):
        with pytest.raises(InvalidInputError):
            generate_erdos_renyi(5, 1.5, seed=0)

    def test_reproducible(self):
        assert generate_erdos_renyi(200, 0.1, seed=9) == generate_erdos_renyi(200, 0.1, seed=9)
        assert generate_erdos_renyi(200, 0.1, seed=9) != generate_erdos_renyi(200, 0.1, seed=10)

    def test_edge_count_band(self):
        n, p = 2000, 0.05
        mean, half = binomial_edge_band(n, p, k=3)
        assert mean == pytest.approx(99_950)
        assert half == pytest.approx(3 * math.sqrt(p * (1 - p) * n * (n - 1) / 2))
        g = generate_erdos_renyi(n, p, seed=2024)
        assert abs(g.num_edges - mean) <= half


class TestJumbledness:
    def test_clique_is_exact(self):
        assert jumbledness_alpha(complete_graph(4), p=1.0).alpha_min == 0.0

    def test_single_vertex(self):
        assert jumbledness_alpha(ExplicitGraph(1), p=0.3).alpha_min == 0.0

    def test_path3_matches_brute_force(self):
        rep = jumbledness_alpha(PATH3, p=1 / 3)
        assert rep.alpha_min == pytest.approx(brute_alpha(3, [(0, 1), (1, 2)], 1 / 3), abs=1e-15)
        assert rep.alpha_min == pytest.approx(1 / 3)
        assert rep.samples_examined == 7

    def test_capacity(self):
        with pytest.raises(CapacityError):
            jumbledness_alpha(ExplicitGraph(21), p=0.1)

    def test_weighted_rejected(self):
        with pytest.raises(InvalidInputError):
            jumbledness_alpha(ExplicitGraph(3, [(0, 1, 2.0)]))

    @settings(max_examples=60, deadline=None)
    @given(small_graphs(), st.floats(0.0, 1.0))
    def test_exhaustive_equals_brute(self, graph, p):
        n, edges = graph
        rep = jumbledness_alpha(ExplicitGraph(n, edges), p=p)
        assert rep.alpha_min == pytest.approx(brute_alpha(n, edges, p), abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(small_graphs(), st.integers(0, 2**32))
    def test_sampled_is_lower_bound(self, graph, seed):
        n, edges = graph
        g = ExplicitGraph(n, edges)
        exact = jumbledness_alpha(g).alpha_min
        sampled = jumbledness_alpha(g, mode="sampled", sample_budget=50, seed=seed)
        assert sampled.alpha_min <= exact + 1e-12
        assert sampled.samples_examined == 50

    def test_worst_subset_attains_alpha(self):
        g = generate_erdos_renyi(12, 0.4, seed=3)
        rep = jumbledness_alpha(g)
        H = set(rep.worst_subset)
        e = sum(1 for a, b, _ in g.edges() if a in H and b in H)
        s = len(H)
        assert abs(e - rep.p * s * (s - 1) / 2) / s == pytest.approx(rep.alpha_min)


class TestTwoSets:
    def test_path_examples(self):
        assert two_set_deviation(PATH3, [0], [2], p=1 / 3) == pytest.approx(1 / 3)
        assert two_set_deviation(PATH3, [0, 2], [1], p=1 / 3) == pytest.approx(4 / 3)

    def test_clique(self):
        assert two_set_deviation(complete_graph(6), [0, 1], [2, 3, 5], p=1.0) == 0.0

    def test_errors(self):
        with pytest.raises(InvalidInputError):
            two_set_deviation(PATH3, [0, 1], [1], p=0.5)
        with pytest.raises(InvalidInputError):
            two_set_deviation(PATH3, [], [1], p=0.5)

    @settings(max_examples=40, deadline=None)
    @given(small_graphs(max_n=9), st.data())
    def test_bounded_by_jumbledness(self, graph, data):
        n, edges = graph
        if n < 2:
            return
        g = ExplicitGraph(n, edges)
        alpha = jumbledness_alpha(g).alpha_min
        side = data.draw(st.lists(st.sampled_from([0, 1, 2]), min_size=n, max_size=n))
        U = [v for v in range(n) if side[v] == 0]
        W = [v for v in range(n) if side[v] == 1]
        if U and W:
            assert two_set_deviation(g, U, W) <= 2 * alpha * (len(U) + len(W)) + 1e-9


class TestClassEdges:
    def test_examples(self):
        assert class_edge_weight(PerfectlyMixed(10, 0.5), 3, 4) == 6.0
        assert class_edge_weight(PATH3, {0, 2}, {1}) == 2.0
        assert class_edge_weight(PATH3, [], {1}) == 0.0
        assert class_edge_weight(PerfectlyMixed(10, 0.5), 0, 4) == 0.0

    def test_overlap_rejected(self):
        with pytest.raises(InvalidInputError):
            class_edge_weight(PATH3, {0, 1}, {1})

    def test_mixed_equals_weighted_clique(self):
        g = complete_graph(7, weight=0.25)
        assert class_edge_weight(g, [0, 1, 2], [4, 6]) == class_edge_weight(PerfectlyMixed(7, 0.25), 3, 2)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32))
    def test_incremental_matches_scratch(self, seed):
        rng = np.random.default_rng(seed)
        g = generate_erdos_renyi(30, 0.3, seed=seed)
        tracker = ClassEdgeTracker(g, rng.integers(0, 4, size=30), 4)
        for _ in range(200):
            tracker.move(int(rng.integers(30)), int(rng.integers(4)))
        fresh = ClassEdgeTracker.from_scratch(g, tracker.labels, 4)
        assert np.array_equal(tracker.W, fresh)
        for a in range(4):
            for b in range(4):
                if a != b:
                    A = np.flatnonzero(tracker.labels == a)
                    B = np.flatnonzero(tracker.labels == b)
                    assert tracker.between(a, b) == class_edge_weight(g, A, B)


class TestEdgeListIO:
    def test_round_trip(self, tmp_path):
        g = ExplicitGraph(6, [(0, 1, 0.1), (2, 4), (1, 3, 2.5)])
        path = tmp_path / "g.txt"
        write_edge_list(g, path)
        assert read_edge_list(path) == g

    def test_comments_and_default_weight(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# header\n0 1\n\n2 3 0.5  # trailing\n")
        g = read_edge_list(path)
        assert g.n == 4
        assert g.edges() == [(0, 1, 1.0), (2, 3, 0.5)]

    def test_bad_line(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("0 1 2 3\n")
        with pytest.raises(InvalidInputError):
            read_edge_list(path)
