"""Free spanning forest samplers and exact finite references.

Two samplers produce the forest attached to the walk reflected at
infinity. The windowed first-entrance sampler records, for each window
vertex, the edge along which it was first reached while the chain runs
until it has covered a larger set; arrivals through a pass get no
parent edge. The branch sampler walks loop-erased branches from each
unvisited vertex to the current forest; a branch whose erased path
retains a step through infinity is marked escaped and contributes one
extra component. On a finite graph both reduce to the classical
samplers for the conductance-weighted spanning tree, which is what the
exact enumeration and determinant references here are for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, GraphConsistencyError
from .graphs import WeightedGraph
from .rng import uniforms
from .walk import (
    PARENT_ROOT,
    PARENT_VIA_INFINITY,
    LevelChainKernel,
    advance_states,
    batch_cover_parents,
    _stream_keys,
)

__all__ = [
    "loop_erase",
    "Forest",
    "aldous_broder_window",
    "wilson_sample",
    "wilson_batch",
    "WilsonSummary",
    "TreeDistribution",
    "enumerate_ust",
    "matrix_tree_edge_prob",
    "tree_weight",
]


def loop_erase(keys: Sequence[int], flags: Sequence[bool] | None = None
               ) -> tuple[list[int], list[bool], bool]:
    """Chronologically loop-erase a walk path carrying via-infinity flags.

    Whenever a vertex is revisited, everything after its earlier
    occurrence is dropped and that occurrence keeps its original flag.
    Returns the simple path, the retained flags, and whether any
    retained step (after the first vertex) went through infinity.
    """
    if flags is None:
        flags = [False] * len(keys)
    if len(flags) != len(keys):
        raise ValueError("flags must align with keys")
    if keys and flags[0]:
        raise ValueError("a path cannot begin with a via-infinity arrival")
    stack: list[tuple[int, bool]] = []
    pos: dict[int, int] = {}
    for k, fl in zip(keys, flags):
        k = int(k)
        if k in pos:
            cut = pos[k] + 1
            for kk, _ in stack[cut:]:
                del pos[kk]
            del stack[cut:]
        else:
            pos[k] = len(stack)
            stack.append((k, bool(fl)))
    out_keys = [k for k, _ in stack]
    out_flags = [f for _, f in stack]
    return out_keys, out_flags, any(out_flags[1:])


@dataclass(frozen=True)
class Forest:
    """A sampled forest over a window of vertices.

    `edges` holds unordered key pairs lying inside the window. `parent`
    maps each window vertex to the vertex its forest link points at
    (which may sit outside the window, in which case no edge is kept) or
    None when it has no link at all. `via_infinity` collects the
    vertices whose link was severed because the connecting step passed
    through infinity; each is a root of its own component. The component
    count of an acyclic edge set is vertices minus edges; construction
    verifies the edge set is acyclic and that the count matches the
    number of parentless-in-window vertices.
    """

    window_keys: tuple
    edges: frozenset
    parent: dict
    via_infinity: frozenset
    escaped_branches: tuple
    method: str

    def __post_init__(self):
        wset = set(self.window_keys)
        adj: dict[int, int] = {}
        rank: dict[int, int] = {}

        def find(x):
            while adj.get(x, x) != x:
                adj[x] = adj.get(adj[x], adj[x])
                x = adj[x]
            return x

        roots = 0
        for v in self.window_keys:
            p = self.parent.get(v)
            if p is None or p not in wset:
                roots += 1
        for u, v in self.edges:
            if u not in wset or v not in wset:
                raise GraphConsistencyError(f"edge ({u}, {v}) leaves the window")
            ru, rv = find(u), find(v)
            if ru == rv:
                raise GraphConsistencyError(f"edge ({u}, {v}) closes a cycle")
            adj[ru] = rv
        if len(self.window_keys) - len(self.edges) != roots:
            raise GraphConsistencyError(
                f"component count {len(self.window_keys) - len(self.edges)} "
                f"does not match {roots} roots")

    @property
    def n_components(self) -> int:
        return len(self.window_keys) - len(self.edges)

    @property
    def is_connected(self) -> bool:
        return self.n_components == 1

    @property
    def n_escaped(self) -> int:
        return sum(1 for b in self.escaped_branches if b)

    def edge_set(self) -> frozenset:
        return self.edges


def _parents_to_forest(window: np.ndarray, parents_row: np.ndarray,
                       kernel: LevelChainKernel, method: str) -> Forest:
    wset = set(int(k) for k in window)
    parent: dict[int, int | None] = {}
    via_inf = set()
    edges = set()
    for j, k in enumerate(window):
        k = int(k)
        p = int(parents_row[j])
        if p == PARENT_ROOT:
            parent[k] = None
        elif p == PARENT_VIA_INFINITY:
            parent[k] = None
            via_inf.add(k)
        else:
            pk = kernel.key_of(p)
            parent[k] = pk
            if pk in wset:
                edges.add((min(pk, k), max(pk, k)))
    return Forest(
        window_keys=tuple(int(k) for k in window),
        edges=frozenset(edges),
        parent=parent,
        via_infinity=frozenset(via_inf),
        escaped_branches=(),
        method=method,
    )


def aldous_broder_window(kernel: LevelChainKernel, start_key: int,
                         window_level: int, cover_level: int | None = None,
                         seed: int = 0, n_replicas: int = 1,
                         max_rounds: int = 10_000_000,
                         stream_offset: int = 0):
    """Windowed first-entrance forest sampler.

    The chain runs from `start_key` until it has covered the cover
    level; each window vertex records the vertex it was first entered
    from. The cover level must contain the window's one-step
    neighborhood (default: the smallest level that does), and both must
    sit inside the kernel's core. Returns one Forest, or a list when
    `n_replicas` > 1; replica r uses stream `stream_offset + r`.
    """
    ex = kernel.exhaustion
    window = ex.vertices(window_level)
    closure = set(int(k) for k in window)
    for k in window:
        closure.update(int(y) for y in kernel.oracle.neighbors(int(k))[0])
    need = ex.smallest_level_covering(closure)
    if cover_level is None:
        cover_level = need
    elif cover_level < need:
        raise ValueError(
            f"cover level {cover_level} misses the window's neighborhood; "
            f"need at least {need}")
    if cover_level > kernel.level:
        raise ValueError(f"cover level {cover_level} exceeds kernel level {kernel.level}")
    cover = ex.vertices(cover_level)
    parents, window_sorted = batch_cover_parents(
        kernel, start_key, window, cover, n_replicas, seed,
        max_rounds=max_rounds, stream_offset=stream_offset)
    forests = [_parents_to_forest(window_sorted, parents[r], kernel, "aldous_broder")
               for r in range(n_replicas)]
    return forests[0] if n_replicas == 1 else forests


def _branch_order(kernel: LevelChainKernel, order: Sequence[int] | None,
                  root_key: int | None) -> list[int]:
    if order is not None:
        states = [kernel.state_of(int(k)) for k in order]
        if sorted(states) != list(range(kernel.n_core)):
            raise ValueError("order must list every core vertex exactly once")
    else:
        core_levels = kernel.state_level[: kernel.n_core]
        core_keys = kernel.state_keys[: kernel.n_core]
        states = list(np.lexsort((core_keys, core_levels)))
    if root_key is not None:
        rs = kernel.state_of(int(root_key))
        states = [rs] + [s for s in states if s != rs]
    return [int(s) for s in states]


def wilson_sample(kernel: LevelChainKernel, seed: int, root_key: int | None = None,
                  order: Sequence[int] | None = None,
                  budget: int = 10_000_000, stream_index: int = 0) -> Forest:
    """Sample one forest over the kernel's core by loop-erased branches.

    Branches start from each core vertex in exhaustion-then-key order
    (or the order given) and walk until they meet the forest grown so
    far; the branch contributes its loop erasure. A retained step
    through infinity leaves no edge, marks the branch escaped, and
    starts a new component. The forest is connected exactly when no
    branch escaped.
    """
    summary = wilson_batch(kernel, 1, seed, root_key=root_key, order=order,
                           budget=budget, stream_offset=stream_index,
                           return_forests=True)
    return summary.forests[0]


@dataclass(frozen=True)
class WilsonSummary:
    """Per-replica outcome of a batch of branch-sampler runs.

    When the batch was asked for a window marginal, `window_edges` lists
    the induced window edges (key pairs, sorted) and bit j of
    `window_masks[r]` says whether edge j is in replica r's forest.
    """

    n_replicas: int
    escaped_any: np.ndarray
    n_escaped_branches: np.ndarray
    component_counts: np.ndarray
    forests: tuple
    window_edges: tuple = ()
    window_masks: np.ndarray | None = None

    @property
    def escape_frequency(self) -> float:
        return float(self.escaped_any.mean())


def wilson_batch(kernel: LevelChainKernel, n_replicas: int, seed: int,
                 root_key: int | None = None, order: Sequence[int] | None = None,
                 budget: int = 10_000_000, stream_offset: int = 0,
                 return_forests: bool = False, chunk: int = 4096,
                 window_keys: Sequence[int] | None = None) -> WilsonSummary:
    """Run many branch-sampler replicas in lockstep.

    Replica r consumes stream `stream_offset + r` with two counters per
    transition, exactly like the scalar sampler, so outcomes match it
    replica for replica. Forest edge sets are materialized only when
    `return_forests` is set; escape statistics are always returned.
    `window_keys` requests the marginal over the induced window edges
    (at most 64) as per-replica bitmasks, which is far cheaper than
    materializing every forest.
    """
    states_order = _branch_order(kernel, order, root_key)
    root = states_order[0]
    n = int(n_replicas)
    escaped_any = np.zeros(n, dtype=bool)
    n_escaped = np.zeros(n, dtype=np.int64)
    comp_counts = np.ones(n, dtype=np.int64)
    forests: list[Forest] = []

    window_edges: tuple = ()
    window_masks = None
    wedge_bit: dict | None = None
    if window_keys is not None:
        wstates = {int(kernel.state_of(int(k))) for k in window_keys}
        g = kernel.level_graph.core_graph
        pairs = set()
        for s in wstates:
            idx, _ = g.neighbors(s)
            for t2 in (int(v) for v in idx):
                if t2 in wstates:
                    pairs.add((min(s, t2), max(s, t2)))
        by_key = sorted(
            (tuple(sorted((kernel.key_of(a), kernel.key_of(b)))), (a, b))
            for a, b in pairs)
        if len(by_key) > 64:
            raise ValueError("window marginal supports at most 64 edges")
        window_edges = tuple(kp for kp, _ in by_key)
        wedge_bit = {}
        for j, (_, (a, b)) in enumerate(by_key):
            wedge_bit[(a, b)] = j
            wedge_bit[(b, a)] = j
        window_masks = np.zeros(n, dtype=np.uint64)

    two = np.uint64(2)
    for base in range(0, n, chunk):
        rc = min(chunk, n - base)
        keys = _stream_keys(seed, rc, stream_offset + base)
        t = np.zeros(rc, dtype=np.uint64)
        in_forest = np.zeros((rc, kernel.n_states), dtype=bool)
        in_forest[:, root] = True
        edges_per: list[list[tuple[int, int]]] = [[] for _ in range(rc)]
        flags_per: list[list[bool]] = [[] for _ in range(rc)]
        via_inf_per: list[set[int]] = [set() for _ in range(rc)]

        for b_state in states_order[1:]:
            rows = np.nonzero(~in_forest[:, b_state])[0]
            if rows.size == 0:
                continue
            cur = np.full(rows.size, b_state, dtype=np.int64)
            pending = np.zeros(rows.size, dtype=bool)
            live = np.arange(rows.size)
            cols: list[np.ndarray] = []
            fcols: list[np.ndarray] = []
            while live.size:
                rep = rows[live]
                u = uniforms(keys[rep], t[rep] * two)
                t[rep] += np.uint64(1)
                if np.any(t[rep] > budget):
                    raise BudgetError(
                        f"a branch walk exceeded {budget} transitions")
                nxt = advance_states(kernel, cur[live], u)
                cur[live] = nxt
                shell = nxt >= kernel.n_core
                col = np.full(rows.size, -1, dtype=np.int64)
                fcol = np.zeros(rows.size, dtype=bool)
                col[live] = np.where(shell, -1, nxt)
                fcol[live[~shell]] = pending[live[~shell]]
                pending[live[shell]] = True
                pending[live[~shell]] = False
                cols.append(col)
                fcols.append(fcol)
                # Shell states are never forest members, so this is False
                # for replicas still in transit through a pass.
                arrived = in_forest[rep, nxt]
                live = live[~arrived]
            if not cols:
                continue
            path_mat = np.stack(cols, axis=1)
            flag_mat = np.stack(fcols, axis=1)
            for i, r in enumerate(rows):
                steps = path_mat[i]
                good = steps >= 0
                seq = [b_state] + [int(s) for s in steps[good]]
                fl = [False] + [bool(f) for f in flag_mat[i][good]]
                le_keys, le_flags, escaped = loop_erase(seq, fl)
                in_forest[r, le_keys] = True
                if escaped:
                    escaped_any[base + r] = True
                    n_escaped[base + r] += 1
                for a, b, via in zip(le_keys, le_keys[1:], le_flags[1:]):
                    if via:
                        # Parent links point along the branch toward the
                        # forest; a pass severs the link of the step's
                        # source, which becomes a new component root.
                        comp_counts[base + r] += 1
                        via_inf_per[r].add(int(a))
                    else:
                        edges_per[r].append((int(a), int(b)))
                flags_per[r].append(escaped)

        if wedge_bit is not None:
            one = np.uint64(1)
            for i in range(rc):
                mask = np.uint64(0)
                for pair in edges_per[i]:
                    j = wedge_bit.get(pair)
                    if j is not None:
                        mask |= one << np.uint64(j)
                window_masks[base + i] = mask

        if return_forests:
            core_keys = kernel.state_keys[: kernel.n_core]
            for i in range(rc):
                edge_keys = frozenset(
                    (min(kernel.key_of(a), kernel.key_of(b)),
                     max(kernel.key_of(a), kernel.key_of(b)))
                    for a, b in edges_per[i])
                parent: dict[int, int | None] = {}
                parent[kernel.key_of(root)] = None
                for a, b in edges_per[i]:
                    # branch paths are oriented toward the forest, so b was
                    # reached from a walking backward; parent of a is b.
                    parent[kernel.key_of(a)] = kernel.key_of(b)
                for k in core_keys:
                    parent.setdefault(int(k), None)
                forests.append(Forest(
                    window_keys=tuple(int(k) for k in core_keys),
                    edges=edge_keys,
                    parent=parent,
                    via_infinity=frozenset(
                        kernel.key_of(s) for s in via_inf_per[i]),
                    escaped_branches=tuple(flags_per[i]),
                    method="wilson",
                ))

    return WilsonSummary(
        n_replicas=n,
        escaped_any=escaped_any,
        n_escaped_branches=n_escaped,
        component_counts=comp_counts,
        forests=tuple(forests),
        window_edges=window_edges,
        window_masks=window_masks,
    )


def tree_weight(graph: WeightedGraph, edge_idx: Iterable[int]) -> float:
    w = 1.0
    ed = graph.edges()
    for i in edge_idx:
        w *= ed[i][2]
    return w


@dataclass(frozen=True)
class TreeDistribution:
    """Exact law of the conductance-weighted spanning tree of a finite graph."""

    edges: tuple
    trees: tuple
    weights: np.ndarray
    probs: np.ndarray
    _by_pairs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._by_pairs:
            lookup = {}
            for i, tr in enumerate(self.trees):
                pairs = frozenset((self.edges[e][0], self.edges[e][1]) for e in tr)
                lookup[pairs] = i
            object.__setattr__(self, "_by_pairs", lookup)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def index_of(self, edge_pairs: frozenset) -> int:
        key = frozenset((min(u, v), max(u, v)) for u, v in edge_pairs)
        if key not in self._by_pairs:
            raise KeyError("edge set is not a spanning tree of this graph")
        return self._by_pairs[key]

    def edge_marginal(self, u: int, v: int) -> float:
        u, v = min(u, v), max(u, v)
        total = 0.0
        for tr, p in zip(self.trees, self.probs):
            if any((self.edges[e][0], self.edges[e][1]) == (u, v) for e in tr):
                total += p
        return total


def enumerate_ust(graph: WeightedGraph, max_trees: int = 1_000_000) -> TreeDistribution:
    """Enumerate every spanning tree with its conductance-product weight.

    Checks all (n - 1)-edge subsets with a union-find acyclicity test;
    refuses graphs whose subset count or tree count would be unreasonable.
    """
    ed = graph.edges()
    n, m = graph.n, len(ed)
    if n < 2:
        raise ValueError("need at least two vertices")
    n_subsets = math.comb(m, n - 1)
    if n_subsets > 50_000_000:
        raise ValueError(f"{n_subsets} edge subsets is too many to enumerate")
    trees = []
    weights = []
    for combo in combinations(range(m), n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for e in combo:
            u, v, _ = ed[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if not ok:
            continue
        trees.append(frozenset(combo))
        w = 1.0
        for e in combo:
            w *= ed[e][2]
        weights.append(w)
        if len(trees) > max_trees:
            raise ValueError(f"more than {max_trees} spanning trees")
    if not trees:
        raise GraphConsistencyError("graph has no spanning tree; it must be connected")
    weights = np.array(weights)
    return TreeDistribution(
        edges=tuple((u, v) for u, v, _ in ed),
        trees=tuple(trees),
        weights=weights,
        probs=weights / weights.sum(),
    )


def _reduced_laplacian_det(graph: WeightedGraph) -> float:
    lap = graph.laplacian().toarray()
    return float(np.linalg.det(lap[1:, 1:]))


def matrix_tree_edge_prob(graph: WeightedGraph, u: int, v: int) -> float:
    """P[edge (u, v) in the weighted spanning tree], by determinant ratio.

    Contracts the edge (merging parallel edges, dropping the loop) and
    returns c(u, v) * T(G/e) / T(G) with both tree weights as reduced
    Laplacian determinants.
    """
    c = graph.conductance(u, v)
    total = _reduced_laplacian_det(graph)
    if graph.n == 2:
        return c / total
    # Contract v into u, relabeling the last vertex into v's slot.
    remap = {x: x for x in range(graph.n)}
    remap[v] = u
    new_ids = {}
    nxt = 0
    for x in range(graph.n):
        if x == v:
            continue
        new_ids[x] = nxt
        nxt += 1
    edges = []
    for a, b, w in graph.edges():
        a2, b2 = remap[a], remap[b]
        if a2 == b2:
            continue
        edges.append((new_ids[a2], new_ids[b2], w))
    contracted = WeightedGraph(graph.n - 1, edges)
    return c * _reduced_laplacian_det(contracted) / total
