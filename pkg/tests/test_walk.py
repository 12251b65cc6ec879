"""Level chains: kernels, trajectories, consistency, schedules."""

import numpy as np
import pytest

from freewalk import (
    BudgetError,
    CoverSet,
    Exhaustion,
    FixedSteps,
    HitSet,
    RateSchedule,
    build_kernel,
    consistency_check,
    schedule_report,
    simulate,
    zoo_oracle,
)
from freewalk.walk import batch_first_hit, batch_visit_counts
from oracles import absorption_law


@pytest.fixture(scope="module")
def tree_kernel():
    o = zoo_oracle("binary_tree")
    return build_kernel(o, Exhaustion(o), 4)


class TestKernel:
    def test_core_rows_are_the_walk_law(self, tree_kernel):
        # A core vertex steps exactly like the infinite graph: weight
        # over pi, including moves into the shell.
        k = tree_kernel
        o = k.oracle
        mat = k.transition_matrix()
        for key in (1, 2, 7):
            s = k.state_of(key)
            nbr, wts = o.neighbors(key)
            for y, c in zip(nbr, wts):
                assert mat[s, k.state_of(int(y))] == pytest.approx(c / o.pi(key))

    def test_rows_are_stochastic(self, tree_kernel):
        mat = tree_kernel.transition_matrix()
        assert np.allclose(mat.sum(axis=1), 1.0, atol=1e-10)
        assert mat.min() >= 0

    def test_tree_shell_rows_are_point_masses(self, tree_kernel):
        # Severing one tree edge disconnects; the only way back into the
        # core from a shell vertex is its own parent edge.
        k = tree_kernel
        lg = k.level_graph
        for j, key in enumerate(lg.shell_keys):
            row = lg.shell_kernel[j]
            assert row.max() == pytest.approx(1.0)
            parent = int(key) // 2
            assert row[k.state_of(parent)] == pytest.approx(1.0)


class TestSimulate:
    def test_visits_follow_edges_or_passes(self, tree_kernel):
        o = tree_kernel.oracle
        t = simulate(tree_kernel, 1, FixedSteps(200), seed=3)
        prev, prev_was_pass = None, False
        for e in t.events:
            if hasattr(e, "key"):
                if prev is not None and not prev_was_pass:
                    assert e.key in set(int(y) for y in o.neighbors(prev)[0])
                prev, prev_was_pass = e.key, False
            else:
                prev_was_pass = True

    def test_tree_pass_reenters_where_it_left(self, tree_kernel):
        # Severing a tree edge leaves the shell vertex one way home, so
        # the re-entry law is a point mass at the exit's parent: the
        # pass returns the walk to the vertex it stepped out from.
        t = simulate(tree_kernel, 1, FixedSteps(500), seed=11)
        passes = [e for e in t.events if not hasattr(e, "key")]
        assert passes, "level-4 walk from the root should reach the shell"
        for p in passes:
            assert p.reentry_key == p.exit_key // 2

    def test_stop_rules(self, tree_kernel):
        t = simulate(tree_kernel, 4, HitSet([2, 3]), seed=5)
        visits = [e.key for e in t.events if hasattr(e, "key")]
        assert visits[-1] in (2, 3)
        assert not set(visits[:-1]) & {2, 3}

        t = simulate(tree_kernel, 1, FixedSteps(17), seed=5)
        assert t.transitions == 17

        t = simulate(tree_kernel, 1, CoverSet([1, 2, 3]), seed=5)
        assert {1, 2, 3} <= {e.key for e in t.events if hasattr(e, "key")}

    def test_start_outside_core_rejected(self, tree_kernel):
        with pytest.raises(ValueError):
            simulate(tree_kernel, 64, FixedSteps(1), seed=0)

    def test_budget_carries_partial_trajectory(self, tree_kernel):
        with pytest.raises(BudgetError) as info:
            simulate(tree_kernel, 1, HitSet([15]), seed=1, max_transitions=3)
        assert info.value.partial is not None
        assert info.value.partial.transitions == 3

    def test_holding_times_positive_and_jump_chain_rate_free(self, tree_kernel):
        # Changing the rate schedule rescales holding times but must not
        # consume different randomness for the jump chain.
        a = simulate(tree_kernel, 1, FixedSteps(100), seed=9,
                     rate=RateSchedule(1.0, 4.0))
        b = simulate(tree_kernel, 1, FixedSteps(100), seed=9,
                     rate=RateSchedule(3.0, 2.0))
        va = [e for e in a.events if hasattr(e, "key")]
        vb = [e for e in b.events if hasattr(e, "key")]
        assert [e.key for e in va] == [e.key for e in vb]
        # The terminal visit is recorded with zero holding time.
        assert all(e.holding_time > 0 for e in va[:-1])
        assert any(ea.holding_time != eb.holding_time for ea, eb in zip(va, vb))


class TestBatchRoutes:
    def test_batch_first_hit_matches_scalar_simulate(self, tree_kernel):
        hits = batch_first_hit(tree_kernel, 1, [4, 6], n_replicas=16, seed=42)
        for r in range(16):
            t = simulate(tree_kernel, 1, HitSet([4, 6]), seed=42, stream_index=r)
            last = [e for e in t.events if hasattr(e, "key")][-1]
            assert int(hits[r]) == last.key

    def test_first_hit_law_matches_linear_algebra(self, tree_kernel):
        # Dual route: empirical hits against the absorbed-chain solve of
        # the same finite transition matrix.
        k = tree_kernel
        targets = [2, 3]
        law = absorption_law(k.transition_matrix(), k.state_of(4),
                             [k.state_of(t) for t in targets])
        hits = batch_first_hit(k, 4, targets, n_replicas=20_000, seed=0)
        freq = np.array([(hits == t).mean() for t in targets])
        assert np.abs(freq - law).max() < 0.01

    def test_visit_counts_match_green_expectation(self, tree_kernel):
        # Visits to 1 before absorption at 2, started at 1: escape from
        # 1 needs the direct step to 2 (any excursion through 3's side
        # or through infinity returns), so counts are geometric with
        # mean pi(1) / c(1, 2) = 2.
        counts = batch_visit_counts(tree_kernel, 1, [2], [1],
                                    n_replicas=4000, seed=4)
        again = batch_visit_counts(tree_kernel, 1, [2], [1],
                                   n_replicas=4000, seed=4)
        assert np.array_equal(counts, again)
        assert counts.min() >= 1
        assert abs(counts.mean() - 2.0) < 0.15


class TestConsistency:
    def test_same_level_is_exact(self):
        o = zoo_oracle("binary_tree")
        rep = consistency_check(o, Exhaustion(o), 3, 3)
        assert rep.deviation == 0.0

    def test_watched_chain_matches_coarse_kernel(self):
        o = zoo_oracle("binary_tree")
        rep = consistency_check(o, Exhaustion(o), 1, 3)
        assert rep.passed(1e-10)

    def test_bad_levels_rejected(self):
        o = zoo_oracle("binary_tree")
        with pytest.raises(ValueError):
            consistency_check(o, Exhaustion(o), 3, 2)


class TestSchedule:
    def test_fast_growth_converges_on_binary_tree(self):
        o = zoo_oracle("binary_tree")
        rep = schedule_report(o, Exhaustion(o), RateSchedule(1.0, 4.0),
                              [1, 2, 3, 4, 5])
        assert rep.converging
        inc = np.abs(rep.increments)
        assert np.all(inc[1:] < inc[:-1])

    def test_return_times_increase_with_level(self):
        o = zoo_oracle("binary_tree")
        rep = schedule_report(o, Exhaustion(o), RateSchedule(1.0, 4.0),
                              [1, 2, 3])
        assert np.all(np.diff(rep.return_times) > 0)
