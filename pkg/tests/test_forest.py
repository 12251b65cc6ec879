"""Spanning forest samplers against exact enumeration and each other."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freewalk import (
    Exhaustion,
    WeightedGraph,
    aldous_broder_window,
    build_kernel,
    enumerate_ust,
    finite,
    loop_erase,
    matrix_tree_edge_prob,
    tree_weight,
    wilson_batch,
    wilson_sample,
    zoo_oracle,
)
from oracles import chi_square_pvalue, spanning_tree_weights


def k4():
    return WeightedGraph(4, [(u, v, 1.0) for u in range(4)
                             for v in range(u + 1, 4)])


def weighted_triangle():
    return WeightedGraph(3, [(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)])


def finite_kernel(g):
    o = finite(g)
    ex = Exhaustion(o)
    return build_kernel(o, ex, ex.smallest_level_covering(range(g.n)))


class TestLoopErase:
    @given(st.lists(st.integers(0, 6), min_size=1, max_size=40))
    def test_result_is_simple(self, keys):
        out, flags, _ = loop_erase(keys)
        assert len(set(out)) == len(out)
        assert len(flags) == len(out)
        assert out[0] == keys[0]
        assert out[-1] == keys[-1]

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=40))
    def test_consecutive_entries_were_consecutive_in_input(self, keys):
        out, _, _ = loop_erase(keys)
        pairs = set(zip(keys, keys[1:]))
        for a, b in zip(out, out[1:]):
            assert (a, b) in pairs

    def test_known_erasure(self):
        # 0 1 2 1 3: the 1-2-1 loop goes, leaving 0 1 3.
        keys, flags, escaped = loop_erase([0, 1, 2, 1, 3],
                                          [False, False, True, False, True])
        assert keys == [0, 1, 3]
        assert flags == [False, False, True]
        assert escaped

    def test_erased_loop_clears_its_flags(self):
        # The via-infinity step sits inside the erased loop, so the
        # surviving path reports no escape.
        keys, flags, escaped = loop_erase([0, 1, 2, 1, 3],
                                          [False, False, True, False, False])
        assert keys == [0, 1, 3]
        assert not escaped


class TestEnumeration:
    def test_k4_has_sixteen_trees(self):
        dist = enumerate_ust(k4())
        assert dist.n_trees == 16
        assert dist.total_weight == pytest.approx(16.0)
        assert np.allclose(dist.probs, 1 / 16)

    def test_weighted_triangle_probabilities(self):
        # Tree weights 1*2, 1*3, 2*3 over total 11.
        dist = enumerate_ust(weighted_triangle())
        assert sorted(dist.probs) == pytest.approx([2 / 11, 3 / 11, 6 / 11])

    @given(st.integers(0, 200))
    def test_matches_brute_force_on_random_graphs(self, salt):
        rng = np.random.default_rng(salt)
        n = int(rng.integers(3, 6))
        edges = [(int(rng.integers(0, v)), v, float(rng.uniform(0.5, 2)))
                 for v in range(1, n)]
        for _ in range(int(rng.integers(0, 3))):
            u, v = rng.integers(0, n, size=2)
            if u != v:
                edges.append((int(u), int(v), float(rng.uniform(0.5, 2))))
        g = WeightedGraph(n, edges)
        dist = enumerate_ust(g)
        ref = spanning_tree_weights(g.n, g.edges())
        assert dist.n_trees == len(ref)
        for tr, w in zip(dist.trees, dist.weights):
            pairs = frozenset((dist.edges[e][0], dist.edges[e][1]) for e in tr)
            assert w == pytest.approx(ref[pairs])

    def test_edge_marginals_agree_with_matrix_tree(self):
        g = weighted_triangle()
        dist = enumerate_ust(g)
        for u, v, _ in g.edges():
            assert dist.edge_marginal(u, v) == pytest.approx(
                matrix_tree_edge_prob(g, u, v), abs=1e-12)
        assert dist.edge_marginal(0, 1) == pytest.approx(5 / 11)
        assert dist.edge_marginal(0, 2) == pytest.approx(8 / 11)
        assert dist.edge_marginal(1, 2) == pytest.approx(9 / 11)

    def test_tree_weight_helper(self):
        g = weighted_triangle()
        dist = enumerate_ust(g)
        for tr, w in zip(dist.trees, dist.weights):
            assert tree_weight(g, tr) == pytest.approx(w)


class TestWilsonFinite:
    def test_forest_on_finite_graph_is_spanning_tree(self):
        kern = finite_kernel(k4())
        for r in range(10):
            f = wilson_sample(kern, seed=2, stream_index=r)
            assert f.is_connected
            assert f.n_escaped == 0
            assert len(f.edges) == 3

    def test_sampled_law_matches_enumeration(self):
        g = weighted_triangle()
        kern = finite_kernel(g)
        dist = enumerate_ust(g)
        summary = wilson_batch(kern, 20_000, seed=6, return_forests=True)
        counts = np.zeros(dist.n_trees)
        for f in summary.forests:
            counts[dist.index_of(f.edges)] += 1
        assert chi_square_pvalue(counts, dist.probs) > 0.001

    def test_window_masks_match_forests(self):
        g = k4()
        kern = finite_kernel(g)
        summary = wilson_batch(kern, 300, seed=8, return_forests=True,
                               window_keys=range(4))
        bit_of = {e: j for j, e in enumerate(summary.window_edges)}
        for f, mask in zip(summary.forests, summary.window_masks):
            expect = 0
            for u, v in f.edges:
                expect |= 1 << bit_of[(min(u, v), max(u, v))]
            assert int(mask) == expect

    def test_batch_chunking_and_offset_invariance(self):
        kern = finite_kernel(k4())
        a = wilson_batch(kern, 12, seed=7, chunk=3, return_forests=True)
        b = wilson_batch(kern, 12, seed=7, chunk=4096, return_forests=True)
        assert all(x.edges == y.edges for x, y in zip(a.forests, b.forests))
        tail = wilson_batch(kern, 4, seed=7, stream_offset=8,
                            return_forests=True)
        assert all(x.edges == y.edges
                   for x, y in zip(tail.forests, a.forests[8:]))


class TestWilsonInfinite:
    def test_tree_window_forest_is_deterministic(self):
        # On a tree every pass re-enters where it left, so loop erasure
        # removes all excursions and the forest is the tree itself.
        o = zoo_oracle("binary_tree")
        kern = build_kernel(o, Exhaustion(o), 3)
        summary = wilson_batch(kern, 50, seed=3, return_forests=True)
        want = frozenset((k, 2 * k + j) for k in range(1, 8) for j in (0, 1))
        for f in summary.forests:
            assert frozenset((min(u, v), max(u, v)) for u, v in f.edges) \
                == want
            assert f.n_escaped == 0

    def test_lattice_escapes_produce_extra_components(self):
        # Shell rows at a fixed matched truncation: lattice harmonic
        # measure converges too slowly for escalation to be sensible.
        o = zoo_oracle("lattice_zd", d=3)
        kern = build_kernel(o, Exhaustion(o), 2, hm_level=5)
        summary = wilson_batch(kern, 400, seed=5, return_forests=True)
        assert summary.escape_frequency > 0.0
        for f in summary.forests:
            assert f.n_components == 1 + len(f.via_infinity)
            if f.n_escaped:
                assert not f.is_connected


class TestAldousBroder:
    def test_law_matches_enumeration_on_finite_graph(self):
        g = weighted_triangle()
        o = finite(g)
        ex = Exhaustion(o)
        kern = build_kernel(o, ex, ex.smallest_level_covering(range(3)))
        dist = enumerate_ust(g)
        forests = aldous_broder_window(kern, 0, window_level=1,
                                       seed=10, n_replicas=20_000)
        counts = np.zeros(dist.n_trees)
        for f in forests:
            counts[dist.index_of(f.edges)] += 1
        assert chi_square_pvalue(counts, dist.probs) > 0.001

    def test_cover_level_must_contain_window_neighborhood(self):
        o = zoo_oracle("binary_tree")
        kern = build_kernel(o, Exhaustion(o), 4)
        with pytest.raises(ValueError, match="cover"):
            aldous_broder_window(kern, 1, window_level=2, cover_level=2,
                                 seed=0)

    def test_window_marginal_agrees_with_wilson_on_tree(self):
        o = zoo_oracle("binary_tree")
        kern = build_kernel(o, Exhaustion(o), 3)
        f = aldous_broder_window(kern, 1, window_level=2, seed=1)
        w = wilson_sample(kern, seed=1)
        inside = frozenset(e for e in w.edges
                           if max(e) <= 7)
        assert f.edges == inside
