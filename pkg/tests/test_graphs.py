"""Graph containers, lazy oracles, exhaustions, and truncations."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freewalk import (
    Exhaustion,
    GraphConsistencyError,
    GraphOracle,
    WeightedGraph,
    complement_components,
    finite,
    truncate,
    zoo_oracle,
)
from oracles import dense_laplacian


def path_graph(n, c=1.0):
    return WeightedGraph(n, [(i, i + 1, c) for i in range(n - 1)])


@st.composite
def connected_graphs(draw, max_n=8):
    """Random spanning tree plus extra edges, positive weights."""
    n = draw(st.integers(2, max_n))
    edges = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.append((u, v, draw(st.floats(0.25, 4.0))))
    extra = draw(st.integers(0, n))
    for _ in range(extra):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 1))
        if u != v:
            edges.append((u, v, draw(st.floats(0.25, 4.0))))
    return WeightedGraph(n, edges)


class TestWeightedGraph:
    def test_parallel_edges_merge(self):
        g = WeightedGraph(2, [(0, 1, 1.0), (1, 0, 2.5)])
        assert g.n_edges == 1
        assert g.conductance(0, 1) == pytest.approx(3.5)

    def test_self_loop_rejected(self):
        with pytest.raises(GraphConsistencyError):
            WeightedGraph(2, [(0, 1, 1.0), (1, 1, 1.0)])

    def test_disconnected_rejected(self):
        with pytest.raises(GraphConsistencyError):
            WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_conductance_rejected(self, bad):
        with pytest.raises(GraphConsistencyError):
            WeightedGraph(2, [(0, 1, bad)])

    def test_json_round_trip(self):
        g = WeightedGraph(3, [(0, 1, 1.5), (1, 2, 0.5), (0, 2, 2.0)])
        back = WeightedGraph.from_json(g.to_json())
        assert back.edges() == g.edges()

    @given(connected_graphs())
    def test_pi_matches_dense_laplacian_diagonal(self, g):
        lap = dense_laplacian(g.n, g.edges())
        assert np.allclose(g.pi, np.diag(lap))
        assert np.allclose(g.laplacian().toarray(), lap)


class TestGraphOracle:
    def test_asymmetric_adjacency_caught(self):
        # 0 claims 1 as a neighbor but 1 does not answer back; the
        # omission must be caught when 1's row arrives, even though the
        # row itself is internally fine.
        rows = {0: [(1, 1.0)], 1: [(2, 1.0)], 2: [(1, 1.0)]}
        o = GraphOracle(0, lambda k: rows[k])
        o.neighbors(0)
        with pytest.raises(GraphConsistencyError, match="asymmetric"):
            o.neighbors(1)

    def test_asymmetric_adjacency_caught_either_order(self):
        rows = {0: [(1, 1.0)], 1: [(2, 1.0)], 2: [(1, 1.0)]}
        o = GraphOracle(2, lambda k: rows[k])
        o.neighbors(1)
        with pytest.raises(GraphConsistencyError, match="asymmetric"):
            o.neighbors(0)

    def test_conductance_mismatch_caught(self):
        rows = {0: [(1, 1.0)], 1: [(0, 2.0)]}
        o = GraphOracle(0, lambda k: rows[k])
        o.neighbors(0)
        with pytest.raises(GraphConsistencyError, match="mismatch"):
            o.neighbors(1)

    def test_regular_tree_degrees(self):
        o = zoo_oracle("regular_tree", b=3)
        ex = Exhaustion(o)
        for k in ex.vertices(3):
            assert o.degree(int(k)) == 3

    def test_binary_tree_root_degree_two(self):
        o = zoo_oracle("binary_tree")
        assert o.degree(o.root) == 2
        assert o.degree(2) == 3

    def test_biased_tree_weights_grow_with_depth(self):
        # Depth-k edges carry lam**k: a depth-1 vertex sees its parent
        # edge at 1 and its b - 1 child edges at lam.
        o = zoo_oracle("biased_tree", b=3, lam=2.0)
        keys, wts = o.neighbors(o.root)
        assert np.allclose(wts, 1.0)
        child = int(keys[0])
        ck, cw = o.neighbors(child)
        assert sorted(cw) == pytest.approx([1.0, 2.0, 2.0])


class TestExhaustion:
    def test_levels_nest(self):
        o = zoo_oracle("regular_tree", b=3)
        ex = Exhaustion(o)
        for n in range(1, 5):
            small = set(int(k) for k in ex.vertices(n))
            big = set(int(k) for k in ex.vertices(n + 1))
            assert small < big

    def test_z3_ball_sizes(self):
        # |B_1| = 7 and |B_2| = 25 for the l1 ball in Z^3; the sphere
        # of radius 3 (the level-2 shell) has 4*9 + 2 = 38 points.
        o = zoo_oracle("lattice_zd", d=3)
        ex = Exhaustion(o)
        assert len(ex.vertices(1)) == 7
        assert len(ex.vertices(2)) == 25
        lg = truncate(o, ex, 2)
        assert lg.n_core == 25
        assert lg.n_shell == 38

    def test_custom_levels_must_nest(self):
        o = zoo_oracle("binary_tree")
        levels = {1: [1, 2, 3], 2: [1, 2, 4, 5]}  # drops 3: not nested
        ex = Exhaustion(o, level_fn=lambda _, n: levels[n])
        ex.vertices(1)
        with pytest.raises(GraphConsistencyError, match="nested"):
            ex.vertices(2)

    def test_custom_levels_must_connect(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o, level_fn=lambda _, n: [1, 4])  # 4 needs 2
        with pytest.raises(GraphConsistencyError, match="connected"):
            ex.vertices(1)

    def test_level_of(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        assert ex.level_of(1) == 1
        assert ex.level_of(2) == 1
        assert ex.level_of(4) == 2
        assert ex.smallest_level_covering([1, 2, 9]) == 3


class TestTruncate:
    def test_core_rows_keep_full_step_law(self):
        # pi_full on core states equals the infinite graph's pi even
        # when edges leave the core: the walk law is never truncated.
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        lg = truncate(o, ex, 2)
        for i, k in enumerate(lg.core_keys):
            assert lg.pi_full[i] == pytest.approx(o.pi(int(k)))

    def test_core_graph_is_free_truncation(self):
        # The induced subgraph drops edges leaving the core entirely;
        # its pi is strictly below the full pi at the inner boundary.
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        lg = truncate(o, ex, 2)
        leaves = [i for i, k in enumerate(lg.core_keys) if int(k) >= 4]
        for i in leaves:
            assert lg.core_graph.pi[i] < lg.pi_full[i]

    def test_shell_is_one_step_neighborhood(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        lg = truncate(o, ex, 2)
        assert sorted(int(k) for k in lg.shell_keys) == list(range(8, 16))

    def test_finite_graph_has_empty_shell_at_cover_level(self):
        g = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
        o = finite(g)
        ex = Exhaustion(o)
        lg = truncate(o, ex, ex.smallest_level_covering(range(4)))
        assert lg.n_shell == 0
        assert lg.n_core == 4


class TestComplementComponents:
    def test_binary_tree_shell_splits_per_subtree(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        cc = complement_components(o, ex, 2)
        # Eight grandchildren, each rooting its own infinite subtree.
        assert len(cc.members) == 8

    def test_one_dimensional_lattice_has_two_ends(self):
        o = zoo_oracle("lattice_zd", d=1)
        ex = Exhaustion(o)
        cc = complement_components(o, ex, 3)
        assert len(cc.members) == 2

    def test_ids_stable_under_probe_growth(self):
        o = zoo_oracle("binary_tree")
        ex = Exhaustion(o)
        a = complement_components(o, ex, 2, probe_depth=4)
        b = complement_components(o, ex, 2, probe_depth=6)
        assert a.id_of_shell == b.id_of_shell
