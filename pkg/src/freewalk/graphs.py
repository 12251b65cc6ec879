"""Weighted graphs, lazy adjacency oracles, exhaustions and truncations.

Infinite graphs are presented as oracles: a root vertex plus a pure
callback returning the weighted neighbor list of any vertex. An
exhaustion is a nested family of finite connected vertex sets covering
the graph (by default the family of graph-distance balls around the
root). Truncating at level n keeps the induced subgraph on the level
set together with its one-step shell, which is all later stages need:
harmonic quantities are always computed with the free boundary
convention, meaning edges leaving the level set are simply absent
rather than redirected or killed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import GraphConsistencyError

__all__ = [
    "WeightedGraph",
    "GraphOracle",
    "Exhaustion",
    "LevelGraph",
    "ComplementComponents",
    "EndPrefix",
    "truncate",
    "complement_components",
    "end_prefix",
    "lattice_zd",
    "lattice_key",
    "lattice_point",
    "regular_tree",
    "biased_tree",
    "binary_tree",
    "tree_depth",
    "finite",
    "zoo_oracle",
    "ZOO_NAMES",
]

_WEIGHT_RTOL = 1e-12


class WeightedGraph:
    """Finite connected undirected graph with positive edge conductances.

    Vertices are dense ids 0..n-1. Parallel edges are merged by summing
    their conductances, which leaves every walk functional unchanged.
    Self loops are rejected: they alter holding times but no harmonic
    quantity, and none of the constructions here produce them.
    """

    def __init__(self, n_vertices: int, edges: Iterable[tuple[int, int, float]]):
        n = int(n_vertices)
        if n < 1:
            raise GraphConsistencyError("graph needs at least one vertex")
        merged: dict[tuple[int, int], float] = {}
        for u, v, c in edges:
            u, v = int(u), int(v)
            c = float(c)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphConsistencyError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphConsistencyError(f"self loop at vertex {u}")
            if not (np.isfinite(c) and c > 0):
                raise GraphConsistencyError(f"conductance {c!r} on ({u}, {v}) must be positive and finite")
            key = (u, v) if u < v else (v, u)
            merged[key] = merged.get(key, 0.0) + c
        self.n = n
        self._edge_pairs = sorted(merged)
        self._edge_wts = np.array([merged[p] for p in self._edge_pairs], dtype=np.float64)

        counts = np.zeros(n, dtype=np.int64)
        for u, v in self._edge_pairs:
            counts[u] += 1
            counts[v] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = np.zeros(indptr[-1], dtype=np.int64)
        weights = np.zeros(indptr[-1], dtype=np.float64)
        cursor = indptr[:-1].copy()
        for (u, v), c in zip(self._edge_pairs, self._edge_wts):
            indices[cursor[u]] = v
            weights[cursor[u]] = c
            cursor[u] += 1
            indices[cursor[v]] = u
            weights[cursor[v]] = c
            cursor[v] += 1
        self.indptr = indptr
        self.indices = indices
        self.weights = weights
        self.pi = np.array([weights[indptr[x]:indptr[x + 1]].sum() for x in range(n)])
        if n > 1 and not self._connected():
            raise GraphConsistencyError("graph is not connected")

    def _connected(self) -> bool:
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            x = stack.pop()
            for y in self.indices[self.indptr[x]:self.indptr[x + 1]]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
        return bool(seen.all())

    def neighbors(self, x: int) -> tuple[np.ndarray, np.ndarray]:
        sl = slice(self.indptr[x], self.indptr[x + 1])
        return self.indices[sl], self.weights[sl]

    def edges(self) -> list[tuple[int, int, float]]:
        return [(u, v, float(c)) for (u, v), c in zip(self._edge_pairs, self._edge_wts)]

    @property
    def n_edges(self) -> int:
        return len(self._edge_pairs)

    def conductance(self, u: int, v: int) -> float:
        idx, wts = self.neighbors(u)
        hit = np.nonzero(idx == v)[0]
        if hit.size == 0:
            raise GraphConsistencyError(f"({u}, {v}) is not an edge")
        return float(wts[hit[0]])

    def laplacian(self) -> sp.csr_matrix:
        """Weighted graph Laplacian D - W as a sparse matrix."""
        w = sp.csr_matrix(
            (self.weights, self.indices, self.indptr), shape=(self.n, self.n)
        )
        return sp.diags(self.pi) - w

    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[u, v, c] for u, v, c in self.edges()]}

    @classmethod
    def from_json(cls, source) -> "WeightedGraph":
        """Load from a dict, a JSON string, or a path to a JSON file."""
        if isinstance(source, (str, Path)) and Path(source).exists():
            data = json.loads(Path(source).read_text())
        elif isinstance(source, str):
            data = json.loads(source)
        else:
            data = source
        return cls(data["n"], [tuple(e) for e in data["edges"]])

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, edges={self.n_edges})"


class GraphOracle:
    """Lazy adjacency source for a connected, locally finite weighted graph.

    `neighbors_fn(key)` must return the finite list of (neighbor key,
    conductance) pairs and must be symmetric. Rows are cached; whenever a
    row is first fetched it is cross-checked against every already cached
    row it touches, so an asymmetric callback is caught on first contact.
    """

    def __init__(self, root: int, neighbors_fn: Callable[[int], Sequence[tuple[int, float]]],
                 name: str = "", params: Mapping | None = None):
        self.root = int(root)
        self._fn = neighbors_fn
        self.name = name
        self.params = dict(params or {})
        self._rows: dict[int, tuple[tuple[int, ...], np.ndarray]] = {}
        # Back-edges promised by cached rows of vertices whose own row is
        # still unfetched: key -> {claimer: weight}. Checked and cleared
        # when the key's row finally arrives, so an omitted reciprocal
        # edge is caught no matter which endpoint is fetched first.
        self._claims: dict[int, dict[int, float]] = {}

    def neighbors(self, key: int) -> tuple[tuple[int, ...], np.ndarray]:
        row = self._rows.get(key)
        if row is not None:
            return row
        raw = list(self._fn(key))
        if not raw:
            raise GraphConsistencyError(f"vertex {key} has no neighbors; graph must be connected")
        keys = tuple(int(k) for k, _ in raw)
        wts = np.array([float(c) for _, c in raw], dtype=np.float64)
        if len(set(keys)) != len(keys):
            raise GraphConsistencyError(f"duplicate neighbor in row of {key}")
        if key in keys:
            raise GraphConsistencyError(f"self loop at {key}")
        if not np.all(np.isfinite(wts)) or np.any(wts <= 0):
            raise GraphConsistencyError(f"non-positive or non-finite conductance at {key}")
        here = dict(zip(keys, wts))
        for claimer, c in self._claims.pop(key, {}).items():
            back = here.get(claimer)
            if back is None:
                raise GraphConsistencyError(
                    f"asymmetric adjacency: {claimer} lists {key} but not conversely"
                )
            if abs(back - c) > _WEIGHT_RTOL * max(1.0, abs(c)):
                raise GraphConsistencyError(
                    f"conductance mismatch on ({claimer}, {key}): {c} vs {back}"
                )
        for nk, c in zip(keys, wts):
            other = self._rows.get(nk)
            if other is None:
                self._claims.setdefault(nk, {})[key] = float(c)
                continue
            ok, owts = other
            try:
                back = owts[ok.index(key)]
            except ValueError:
                raise GraphConsistencyError(
                    f"asymmetric adjacency: {key} lists {nk} but not conversely"
                ) from None
            if abs(back - c) > _WEIGHT_RTOL * max(1.0, abs(c)):
                raise GraphConsistencyError(
                    f"conductance mismatch on ({key}, {nk}): {c} vs {back}"
                )
        row = (keys, wts)
        self._rows[key] = row
        return row

    def pi(self, key: int) -> float:
        return float(self.neighbors(key)[1].sum())

    def degree(self, key: int) -> int:
        return len(self.neighbors(key)[0])


class Exhaustion:
    """Nested finite connected vertex sets exhausting an oracle's graph.

    The default is the canonical exhaustion by graph-distance balls:
    level n is the ball of radius n around the root. A custom family can
    be supplied as `level_fn(oracle, n) -> iterable of keys`; each level
    is validated for root membership, nesting and connectivity when
    first requested.
    """

    def __init__(self, oracle: GraphOracle,
                 level_fn: Callable[[GraphOracle, int], Iterable[int]] | None = None):
        self.oracle = oracle
        self._level_fn = level_fn
        self._levels: dict[int, np.ndarray] = {}
        self._level_sets: dict[int, frozenset] = {}
        if level_fn is None:
            self._depth: dict[int, int] = {oracle.root: 0}
            self._frontier: list[int] = [oracle.root]
            self._max_depth = 0
        self._cc_cache: dict[tuple[int, int], "ComplementComponents"] = {}

    @property
    def is_ball(self) -> bool:
        return self._level_fn is None

    def _grow_ball(self, depth: int) -> None:
        while self._max_depth < depth and self._frontier:
            nxt: list[int] = []
            for x in self._frontier:
                for y in self.oracle.neighbors(x)[0]:
                    if y not in self._depth:
                        self._depth[y] = self._max_depth + 1
                        nxt.append(y)
            self._frontier = nxt
            self._max_depth += 1

    def vertices(self, n: int) -> np.ndarray:
        """Sorted key array of level n (n >= 1)."""
        if n < 1:
            raise ValueError("exhaustion levels start at 1")
        got = self._levels.get(n)
        if got is not None:
            return got
        if self.is_ball:
            self._grow_ball(n)
            keys = np.array(sorted(k for k, d in self._depth.items() if d <= n), dtype=np.int64)
        else:
            keys = np.array(sorted(set(int(k) for k in self._level_fn(self.oracle, n))), dtype=np.int64)
            self._validate_custom(n, keys)
        self._levels[n] = keys
        self._level_sets[n] = frozenset(int(k) for k in keys)
        return keys

    def _validate_custom(self, n: int, keys: np.ndarray) -> None:
        kset = set(int(k) for k in keys)
        if self.oracle.root not in kset:
            raise GraphConsistencyError(f"level {n} does not contain the root")
        for m, prev in self._levels.items():
            small, big = (prev, kset) if m < n else (keys, self._level_sets[m])
            if not set(int(k) for k in small) <= set(big):
                raise GraphConsistencyError(f"levels {min(m, n)} and {max(m, n)} are not nested")
        seen = {self.oracle.root}
        stack = [self.oracle.root]
        while stack:
            x = stack.pop()
            for y in self.oracle.neighbors(x)[0]:
                if y in kset and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != kset:
            raise GraphConsistencyError(f"level {n} is not connected")

    def contains(self, key: int, n: int) -> bool:
        self.vertices(n)
        return int(key) in self._level_sets[n]

    def level_of(self, key: int, n_max: int = 64) -> int:
        """Smallest level containing `key`."""
        key = int(key)
        if self.is_ball:
            d = self._depth.get(key)
            while d is None:
                if self._max_depth >= n_max or not self._frontier:
                    raise GraphConsistencyError(f"vertex {key} not found within {n_max} levels")
                self._grow_ball(self._max_depth + 1)
                d = self._depth.get(key)
            return max(1, d)
        for n in range(1, n_max + 1):
            if self.contains(key, n):
                return n
        raise GraphConsistencyError(f"vertex {key} not found within {n_max} levels")

    def smallest_level_covering(self, keys: Iterable[int], n_max: int = 64) -> int:
        return max(self.level_of(k, n_max) for k in keys)


@dataclass(frozen=True)
class LevelGraph:
    """Level-n truncation: the core level set plus its one-step shell.

    States are indexed core first (sorted by key) then shell (sorted by
    key). Core rows carry the full oracle neighbor row, so their step
    law is exactly the infinite graph's. `core_graph` is the induced
    subgraph on the core with free boundary: edges leaving the core are
    omitted, and its vertex ids are positions in `core_keys`.

    `shell_kernel` holds one probability row per shell state over core
    states. It is produced by the walk layer (each row is a harmonic
    measure viewed from the shell vertex); a freshly truncated level has
    it unset.
    """

    level: int
    core_keys: np.ndarray
    shell_keys: np.ndarray
    core_graph: WeightedGraph
    state_nbr: tuple
    state_wts: tuple
    pi_full: np.ndarray
    shell_core_nbr: tuple
    shell_core_wts: tuple
    shell_kernel: np.ndarray | None = None
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            idx = {int(k): i for i, k in enumerate(self.core_keys)}
            for j, k in enumerate(self.shell_keys):
                idx[int(k)] = self.n_core + j
            object.__setattr__(self, "_index", idx)

    @property
    def n_core(self) -> int:
        return len(self.core_keys)

    @property
    def n_shell(self) -> int:
        return len(self.shell_keys)

    @property
    def n_states(self) -> int:
        return self.n_core + self.n_shell

    def state_of(self, key: int) -> int:
        return self._index[int(key)]

    def key_of(self, state: int) -> int:
        if state < self.n_core:
            return int(self.core_keys[state])
        return int(self.shell_keys[state - self.n_core])

    def is_shell(self, state: int) -> bool:
        return state >= self.n_core

    def attach_shell_kernel(self, kernel: np.ndarray, row_tol: float = 1e-10) -> "LevelGraph":
        """Return a copy with shell rows attached, after validating them.

        Each row must be a probability vector over core states: entries
        in [0, 1] and row sums within `row_tol` of one.
        """
        kernel = np.asarray(kernel, dtype=np.float64)
        if kernel.shape != (self.n_shell, self.n_core):
            raise ValueError(f"shell kernel must be ({self.n_shell}, {self.n_core}), got {kernel.shape}")
        if kernel.size:
            if kernel.min() < 0 or kernel.max() > 1:
                raise GraphConsistencyError("shell kernel entries outside [0, 1]")
            sums = kernel.sum(axis=1)
            worst = float(np.abs(sums - 1.0).max())
            if worst > row_tol:
                raise GraphConsistencyError(f"shell kernel row sums off by {worst:.3e} > {row_tol:.1e}")
        return replace(self, shell_kernel=kernel)


def truncate(oracle: GraphOracle, exhaustion: Exhaustion, n: int) -> LevelGraph:
    """Build the level-n truncation with its one-step shell."""
    core = exhaustion.vertices(n)
    core_set = set(int(k) for k in core)
    shell_set: set[int] = set()
    rows = {}
    for k in core:
        k = int(k)
        nbr_keys, wts = oracle.neighbors(k)
        rows[k] = (nbr_keys, wts)
        shell_set.update(y for y in nbr_keys if y not in core_set)
    shell = np.array(sorted(shell_set), dtype=np.int64)

    index = {int(k): i for i, k in enumerate(core)}
    for j, k in enumerate(shell):
        index[int(k)] = len(core) + j

    core_edges = []
    state_nbr = []
    state_wts = []
    pi_full = np.zeros(len(core) + len(shell), dtype=np.float64)
    for i, k in enumerate(core):
        nbr_keys, wts = rows[int(k)]
        state_nbr.append(np.array([index[y] for y in nbr_keys], dtype=np.int64))
        state_wts.append(np.asarray(wts, dtype=np.float64))
        pi_full[i] = wts.sum()
        for y, c in zip(nbr_keys, wts):
            if y in core_set and int(k) < y:
                core_edges.append((i, index[y], float(c)))
    shell_core_nbr = []
    shell_core_wts = []
    for j, k in enumerate(shell):
        nbr_keys, wts = oracle.neighbors(int(k))
        pi_full[len(core) + j] = wts.sum()
        mask = [y in core_set for y in nbr_keys]
        shell_core_nbr.append(np.array([index[y] for y, m in zip(nbr_keys, mask) if m], dtype=np.int64))
        shell_core_wts.append(np.array([c for c, m in zip(wts, mask) if m], dtype=np.float64))

    core_graph = WeightedGraph(len(core), core_edges) if len(core) > 1 else WeightedGraph(1, [])
    return LevelGraph(
        level=n,
        core_keys=core,
        shell_keys=shell,
        core_graph=core_graph,
        state_nbr=tuple(state_nbr),
        state_wts=tuple(state_wts),
        pi_full=pi_full,
        shell_core_nbr=tuple(shell_core_nbr),
        shell_core_wts=tuple(shell_core_wts),
    )


@dataclass(frozen=True)
class ComplementComponents:
    """Connected components of (probe window minus level set).

    Component ids are canonicalized as the minimal key among the
    component's level-shell vertices; the shell is pinned to the level,
    so ids do not move when the probe window grows.
    """

    level: int
    probe_depth: int
    id_of_shell: Mapping[int, int]
    members: Mapping[int, frozenset]

    def component_of(self, key: int) -> int | None:
        key = int(key)
        for cid, verts in self.members.items():
            if key in verts:
                return cid
        return None

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


def complement_components(oracle: GraphOracle, exhaustion: Exhaustion, n: int,
                          probe_depth: int | None = None) -> ComplementComponents:
    """Partition the level-n shell by complement component within a probe window.

    The probe window defaults to level 2n (never below n + 1). Two shell
    vertices share an id when they are connected inside the window
    without touching the level set.
    """
    probe = int(probe_depth) if probe_depth is not None else max(2 * n, n + 1)
    if probe <= n:
        raise ValueError("probe_depth must exceed the level")
    cached = exhaustion._cc_cache.get((n, probe))
    if cached is not None:
        return cached
    v_n = set(int(k) for k in exhaustion.vertices(n))
    v_probe = set(int(k) for k in exhaustion.vertices(probe))
    region = v_probe - v_n
    shell: set[int] = set()
    for k in v_n:
        for y in oracle.neighbors(k)[0]:
            if y not in v_n:
                shell.add(int(y))
    missing = shell - region
    if missing:
        raise GraphConsistencyError(
            f"shell vertices {sorted(missing)[:4]} fall outside the probe window; increase probe_depth"
        )
    comp_of: dict[int, int] = {}
    comps: list[set[int]] = []
    for s in sorted(region):
        if s in comp_of:
            continue
        cid = len(comps)
        comp = {s}
        comp_of[s] = cid
        stack = [s]
        while stack:
            x = stack.pop()
            for y in oracle.neighbors(x)[0]:
                if y in region and y not in comp_of:
                    comp_of[y] = cid
                    comp.add(int(y))
                    stack.append(int(y))
        comps.append(comp)

    id_of_shell: dict[int, int] = {}
    members: dict[int, frozenset] = {}
    for comp in comps:
        shell_here = sorted(comp & shell)
        if not shell_here:
            # Unreachable from the level set inside the window; such a piece
            # cannot be entered by the walk, so it gets no id.
            continue
        cid = shell_here[0]
        members[cid] = frozenset(comp)
        for s in shell_here:
            id_of_shell[s] = cid
    uncovered = shell - set(id_of_shell)
    if uncovered:
        raise GraphConsistencyError(f"shell vertices {sorted(uncovered)[:4]} not reached by any component")
    out = ComplementComponents(level=n, probe_depth=probe, id_of_shell=id_of_shell, members=members)
    exhaustion._cc_cache[(n, probe)] = out
    return out


@dataclass(frozen=True)
class EndPrefix:
    """Finite-resolution address of an end: one complement component id
    per level, from level 1 up to `level`."""

    level: int
    ids: tuple[int, ...]

    def __post_init__(self):
        if len(self.ids) != self.level:
            raise ValueError("need one component id per level")

    def refines(self, other: "EndPrefix") -> bool:
        """True when this prefix extends `other`."""
        return self.level >= other.level and self.ids[: other.level] == other.ids


def end_prefix(oracle: GraphOracle, exhaustion: Exhaustion, key: int, n: int,
               probe_depth: int | None = None) -> EndPrefix:
    """End prefix of the vertex `key`, which must lie outside level n."""
    key = int(key)
    key_level = exhaustion.level_of(key)
    if key_level <= n:
        raise ValueError(f"vertex {key} lies inside level {n}; it does not address an end there")
    ids = []
    for k in range(1, n + 1):
        probe = probe_depth if probe_depth is not None else max(2 * k, key_level)
        cc = complement_components(oracle, exhaustion, k, probe)
        cid = cc.component_of(key)
        if cid is None:
            raise GraphConsistencyError(f"vertex {key} not inside the level-{k} probe window")
        ids.append(cid)
    return EndPrefix(level=n, ids=tuple(ids))


# ---------------------------------------------------------------------------
# Built-in graph families.

_LATTICE_BITS = 21
_LATTICE_OFF = 1 << (_LATTICE_BITS - 1)
_LATTICE_MASK = (1 << _LATTICE_BITS) - 1


def lattice_key(point: Sequence[int]) -> int:
    """Pack lattice coordinates into a single integer key."""
    key = 0
    for i, x in enumerate(point):
        x = int(x)
        if abs(x) >= _LATTICE_OFF - 1:
            raise ValueError(f"coordinate {x} out of packable range")
        key |= (x + _LATTICE_OFF) << (_LATTICE_BITS * i)
    return key

def lattice_point(key: int, d: int) -> tuple[int, ...]:
    """Inverse of `lattice_key` for dimension d."""
    return tuple(((key >> (_LATTICE_BITS * i)) & _LATTICE_MASK) - _LATTICE_OFF for i in range(d))


def lattice_zd(d: int) -> GraphOracle:
    """Hypercubic lattice Z^d with unit conductances, 1 <= d <= 3."""
    if not 1 <= d <= 3:
        raise ValueError("lattice_zd supports d in {1, 2, 3}")

    def nbrs(key: int):
        p = lattice_point(key, d)
        out = []
        for i in range(d):
            for s in (1, -1):
                q = list(p)
                q[i] += s
                out.append((lattice_key(q), 1.0))
        return out

    return GraphOracle(lattice_key((0,) * d), nbrs, name="lattice_zd", params={"d": d})


def _tree_children(v: int, b: int) -> list[int]:
    if v == 1:
        return list(range(2, b + 2))
    m = b - 1
    base = (v - 2) * m + b + 2
    return list(range(base, base + m))


def _tree_parent(v: int, b: int) -> int:
    if v == 1:
        raise ValueError("root has no parent")
    if v <= b + 1:
        return 1
    return (v - b - 2) // (b - 1) + 2


def tree_depth(v: int, b: int | None = None) -> int:
    """Depth of a vertex key in `regular_tree(b)` keys, or in heap keys
    (children 2v, 2v+1) when b is None."""
    if b is None:
        return int(v).bit_length() - 1
    d = 0
    while v != 1:
        v = _tree_parent(v, b)
        d += 1
    return d


def regular_tree(b: int) -> GraphOracle:
    """The b-regular tree: every vertex has degree b, unit conductances."""
    if b < 2:
        raise ValueError("regular_tree needs b >= 2")

    def nbrs(v: int):
        out = [] if v == 1 else [(_tree_parent(v, b), 1.0)]
        out.extend((c, 1.0) for c in _tree_children(v, b))
        return out

    return GraphOracle(1, nbrs, name="regular_tree", params={"b": b})


def biased_tree(b: int, lam: float) -> GraphOracle:
    """b-regular tree whose depth-k edges carry conductance lam**k.

    An edge's depth is the depth of its endpoint nearer the root, so the
    root's edges have conductance 1 and conductances grow geometrically
    along every ray when lam > 1 (making escape to infinity cheap).
    """
    if b < 2:
        raise ValueError("biased_tree needs b >= 2")
    lam = float(lam)
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError("lam must be positive and finite")

    def nbrs(v: int):
        d = tree_depth(v, b)
        out = [] if v == 1 else [(_tree_parent(v, b), lam ** (d - 1))]
        out.extend((c, lam**d) for c in _tree_children(v, b))
        return out

    return GraphOracle(1, nbrs, name="biased_tree", params={"b": b, "lam": lam})


def binary_tree() -> GraphOracle:
    """Rooted binary tree in heap order: children of v are 2v and 2v + 1."""

    def nbrs(v: int):
        out = [] if v == 1 else [(v // 2, 1.0)]
        out.extend(((2 * v, 1.0), (2 * v + 1, 1.0)))
        return out

    return GraphOracle(1, nbrs, name="binary_tree", params={})


def finite(graph: WeightedGraph, root: int = 0) -> GraphOracle:
    """Wrap a finite graph as an oracle (its exhaustion saturates)."""

    def nbrs(v: int):
        idx, wts = graph.neighbors(v)
        return list(zip((int(i) for i in idx), (float(c) for c in wts)))

    return GraphOracle(root, nbrs, name="finite", params={"n": graph.n})


ZOO_NAMES = ("lattice_zd", "regular_tree", "biased_tree", "binary_tree", "finite")


def zoo_oracle(name: str, **params) -> GraphOracle:
    """Construct a built-in family by name. `finite` takes graph= or path=."""
    if name == "lattice_zd":
        return lattice_zd(int(params["d"]))
    if name == "regular_tree":
        return regular_tree(int(params["b"]))
    if name == "biased_tree":
        return biased_tree(int(params["b"]), float(params["lam"]))
    if name == "binary_tree":
        return binary_tree()
    if name == "finite":
        g = params.get("graph")
        if g is None:
            g = WeightedGraph.from_json(params["path"])
        return finite(g, root=int(params.get("root", 0)))
    raise ValueError(f"unknown graph family {name!r}; choose from {ZOO_NAMES}")
