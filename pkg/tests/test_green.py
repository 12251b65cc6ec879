"""Green's functions, their identities, and the pinned free field."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freewalk import (
    Exhaustion,
    SolverError,
    WeightedGraph,
    enumerate_ust,
    finite,
    gff_sample,
    green,
    kirkhoff_edge_prob,
    matrix_tree_edge_prob,
    validate_green,
    zoo_oracle,
)
from oracles import dense_green


def oracle_pair(g, root=0):
    o = finite(g, root)
    return o, Exhaustion(o)


class TestGreenValues:
    def test_frozen_path_graph_green(self):
        # Path 0-1-2 absorbed at 0. From 1 the walk dies with chance 1/2
        # per departure, so G(1,1) = 2; each stay at 1 sends it to 2
        # half the time, G(1,2) = 1; from 2 it reaches 1 surely, and
        # then 2 again before dying exactly once on average: G = [[2,1],[2,2]].
        g = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 1.0)])
        o, ex = oracle_pair(g)
        gm = green(o, ex, [0], [1, 2])
        assert np.allclose(gm.values, [[2.0, 1.0], [2.0, 2.0]], atol=1e-10)

    @given(st.integers(0, 100))
    def test_matches_dense_reference(self, salt):
        rng = np.random.default_rng(salt)
        n = int(rng.integers(4, 9))
        edges = [(int(rng.integers(0, v)), v, float(rng.uniform(0.5, 2.5)))
                 for v in range(1, n)]
        for _ in range(int(rng.integers(0, 4))):
            u, v = rng.integers(0, n, size=2)
            if u != v:
                edges.append((int(u), int(v), float(rng.uniform(0.5, 2.5))))
        g = WeightedGraph(n, edges)
        o, ex = oracle_pair(g)
        a = [0]
        w = list(range(n))
        gm = green(o, ex, a, w)
        ref = dense_green(n, g.edges(), a)
        assert np.allclose(gm.values, ref, atol=1e-9)

    def test_absorbing_rows_and_columns_vanish(self):
        g = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
        o, ex = oracle_pair(g)
        gm = green(o, ex, [0, 2], [0, 1, 2, 3])
        assert np.all(gm.values[[0, 2], :] == 0)
        assert np.all(gm.values[:, [0, 2]] == 0)

    def test_infinite_tree_window(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        gm = green(o, ex, [1], [2, 3, 4])
        rep = validate_green(gm)
        assert rep.ok()
        # Killing at the root decouples the two subtrees.
        assert gm.value(2, 3) == pytest.approx(0.0, abs=1e-10)
        assert gm.value(2, 4) > 0


class TestGreenIdentities:
    @given(st.integers(0, 60))
    def test_identities_on_random_graphs(self, salt):
        rng = np.random.default_rng(1000 + salt)
        n = int(rng.integers(4, 8))
        edges = [(int(rng.integers(0, v)), v, float(rng.uniform(0.5, 2.5)))
                 for v in range(1, n)]
        g = WeightedGraph(n, edges)
        o, ex = oracle_pair(g)
        gm = green(o, ex, [int(rng.integers(0, n))], list(range(n)))
        rep = validate_green(gm)
        assert rep.harmonicity_residual <= 1e-8
        assert rep.laplacian_residual <= 1e-8
        assert rep.symmetry_residual <= 1e-9
        assert rep.min_eigenvalue >= -1e-8 * max(rep.max_eigenvalue, 1e-300)


class TestKirkhoff:
    def test_tree_edges_are_certain(self):
        # Tree edges are never severed: each one is the only route home.
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        assert kirkhoff_edge_prob(o, ex, 1, 2) == pytest.approx(1.0, abs=1e-9)

    def test_k4_edge_probability_is_half(self):
        g = WeightedGraph(4, [(u, v, 1.0) for u in range(4)
                              for v in range(u + 1, 4)])
        o, ex = oracle_pair(g)
        p = kirkhoff_edge_prob(o, ex, 0, 1)
        assert p == pytest.approx(0.5, abs=1e-10)
        assert matrix_tree_edge_prob(g, 0, 1) == pytest.approx(0.5, abs=1e-12)

    def test_agrees_with_enumeration_on_weighted_graph(self):
        g = WeightedGraph(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.5),
                              (3, 0, 0.5), (0, 2, 1.0)])
        o, ex = oracle_pair(g)
        dist = enumerate_ust(g)
        for u, v, _ in g.edges():
            want = dist.edge_marginal(u, v)
            assert kirkhoff_edge_prob(o, ex, u, v) == pytest.approx(want, abs=1e-9)
            assert matrix_tree_edge_prob(g, u, v) == pytest.approx(want, abs=1e-12)

    def test_non_edge_rejected(self):
        g = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 1.0)])
        o, ex = oracle_pair(g)
        with pytest.raises(ValueError):
            kirkhoff_edge_prob(o, ex, 0, 2)


class TestGff:
    def test_pinned_coordinates_are_exactly_zero(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        gm = green(o, ex, [1], [1, 2, 3, 4, 5])
        out = gff_sample(gm, 500, seed=3)
        pinned = list(gm.w_keys).index(1)
        assert np.all(out.samples[:, pinned] == 0.0)

    def test_seed_determinism(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        gm = green(o, ex, [1], [2, 3, 4, 5])
        a = gff_sample(gm, 50, seed=3).samples
        b = gff_sample(gm, 50, seed=3).samples
        assert np.array_equal(a, b)

    def test_stream_offset_matches_tail(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        gm = green(o, ex, [1], [2, 3, 4, 5])
        whole = gff_sample(gm, 60, seed=3).samples
        tail = gff_sample(gm, 20, seed=3, stream_offset=40).samples
        assert np.array_equal(tail, whole[40:])

    def test_empirical_covariance_tracks_target(self):
        g = WeightedGraph(5, [(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 4, 1),
                              (4, 0, 1.5)])
        o, ex = oracle_pair(g)
        gm = green(o, ex, [0], list(range(5)))
        out = gff_sample(gm, 40_000, seed=7)
        emp = out.empirical_covariance()
        se = out.covariance_standard_error()
        dev = np.abs(emp - out.covariance)
        assert np.all(dev <= 6 * np.maximum(se, 1e-12))
