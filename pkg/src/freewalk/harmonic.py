"""Free-boundary harmonic machinery.

Everything here works with the induced subgraph exactly as given: a
vertex on the rim of a truncation simply has fewer neighbors, and no
absorbing or reflecting state is added for the missing ones. The energy
of f is the sum of c(x, y) (f(x) - f(y))^2 over unordered edges; the
minimizer under pinned values on a set A is the unique function that is
harmonic for the subgraph walk off A. Infinite-graph quantities are
obtained by solving on an exhaustion level and escalating until two
solves a fixed stride apart agree on the requested window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, SolverError
from .graphs import Exhaustion, GraphOracle, LevelGraph, WeightedGraph, truncate

__all__ = [
    "solve_free_dirichlet",
    "Extension",
    "min_energy_extension",
    "HarmonicMeasure",
    "harmonic_measure",
    "EnergyReport",
    "energy_report",
    "OrthogonalityReport",
    "cycle_orthogonality_check",
]

_DENSE_CUTOFF = 600


def solve_free_dirichlet(graph: WeightedGraph, boundary: Mapping[int, float],
                         tol: float = 1e-8) -> np.ndarray:
    """Solve the Dirichlet problem on a finite graph with free boundary.

    `boundary` pins values on a nonempty vertex set A; the returned array
    agrees with it on A and is harmonic for the graph's own walk
    elsewhere. Values may be scalars or equal-length vectors (the solve
    is then run with one right-hand side per component). The result is
    checked a posteriori: the weighted Laplacian residual at every
    non-pinned x must be at most tol * pi(x), else SolverError.
    """
    if not boundary:
        raise ValueError("boundary set must be nonempty")
    a_idx = np.array(sorted(boundary), dtype=np.int64)
    if a_idx[0] < 0 or a_idx[-1] >= graph.n:
        raise ValueError("boundary vertex out of range")
    vals = [np.atleast_1d(np.asarray(boundary[int(a)], dtype=np.float64)) for a in a_idx]
    width = vals[0].shape[0]
    if any(v.shape != (width,) for v in vals):
        raise ValueError("boundary values must share one shape")
    phi = np.vstack(vals)
    scalar = np.isscalar(boundary[int(a_idx[0])]) or np.asarray(boundary[int(a_idx[0])]).ndim == 0

    in_a = np.zeros(graph.n, dtype=bool)
    in_a[a_idx] = True
    u_idx = np.nonzero(~in_a)[0]
    f = np.zeros((graph.n, width), dtype=np.float64)
    f[a_idx] = phi

    if u_idx.size:
        lap = graph.laplacian().tocsr()
        l_uu = lap[u_idx][:, u_idx]
        rhs = -(lap[u_idx][:, a_idx] @ phi)
        if u_idx.size <= _DENSE_CUTOFF:
            f[u_idx] = np.linalg.solve(l_uu.toarray(), rhs)
        else:
            lu = spla.splu(l_uu.tocsc())
            f[u_idx] = lu.solve(rhs)
        resid = np.abs(lap[u_idx] @ f)
        bound = tol * graph.pi[u_idx]
        worst = float((resid.max(axis=1) - bound).max()) if resid.size else 0.0
        if resid.size and np.any(resid.max(axis=1) > bound):
            raise SolverError(
                f"Dirichlet residual exceeds tol * pi by {worst:.3e}",
                residual=float(resid.max()),
            )
    return f[:, 0] if scalar else f


@dataclass(frozen=True)
class Extension:
    """Energy-minimizing extension reported on a window.

    `levels_used` is the pair of exhaustion levels whose solutions
    agreed on the window to within `achieved_tol`; `values` comes from
    the deeper of the two. The full final-level solution is kept so
    downstream consumers (energy reports, embeddings) can reuse it.
    """

    window_keys: np.ndarray
    values: np.ndarray
    boundary_keys: np.ndarray
    levels_used: tuple[int, int]
    achieved_tol: float
    level_graph: LevelGraph
    core_values: np.ndarray

    def value(self, key: int):
        pos = int(np.searchsorted(self.window_keys, key))
        if pos >= len(self.window_keys) or self.window_keys[pos] != key:
            raise KeyError(f"{key} not in window")
        return self.values[pos]


def min_energy_extension(oracle: GraphOracle, exhaustion: Exhaustion,
                         boundary: Mapping[int, float], window: Iterable[int],
                         tol: float = 1e-6, n_start: int | None = None,
                         n_max: int = 30, stride: int = 2,
                         solver_tol: float = 1e-8) -> Extension:
    """Extend boundary data harmonically with free boundary at infinity.

    Solves on exhaustion levels n, n + stride, ... and stops when two
    consecutive solves differ by less than `tol` everywhere on the
    window. Raises ConvergenceError (carrying the last two window
    iterates) if the cap `n_max` is reached first. On a finite graph the
    exhaustion saturates and the loop exits after two identical solves.
    """
    window_keys = np.array(sorted(set(int(k) for k in window)), dtype=np.int64)
    if window_keys.size == 0:
        raise ValueError("window must be nonempty")
    a_keys = np.array(sorted(int(k) for k in boundary), dtype=np.int64)
    need = exhaustion.smallest_level_covering(list(window_keys) + list(a_keys))
    n0 = max(need, n_start or 1)

    prev_vals = None
    prev_n = None
    diff = np.inf
    for n in range(n0, n_max + 1, stride):
        lg = truncate(oracle, exhaustion, n)
        pos = {int(k): i for i, k in enumerate(lg.core_keys)}
        bnd = {pos[int(k)]: boundary[int(k)] for k in a_keys}
        f = solve_free_dirichlet(lg.core_graph, bnd, tol=solver_tol)
        w_vals = np.asarray(f)[[pos[int(k)] for k in window_keys]]
        if prev_vals is not None:
            diff = float(np.abs(w_vals - prev_vals).max())
            if diff <= tol:
                return Extension(
                    window_keys=window_keys,
                    values=w_vals,
                    boundary_keys=a_keys,
                    levels_used=(prev_n, n),
                    achieved_tol=diff,
                    level_graph=lg,
                    core_values=np.asarray(f),
                )
        prev_vals, prev_n = w_vals, n
    raise ConvergenceError(
        f"window values still moving by {diff:.3e} > {tol:.1e} at level cap {n_max}",
        last_two=(prev_vals, None),
        achieved=diff,
    )


@dataclass(frozen=True)
class HarmonicMeasure:
    """Hitting law on a target set seen from one or more viewpoints.

    `probabilities[i, j]` is the chance that the walk started at
    viewpoint i, run with free boundary at infinity, first meets the
    target set at target j. Rows are reported exactly as solved, with no
    renormalization; `sum_deviation` records how far the worst row sum
    is from one.
    """

    target_keys: np.ndarray
    viewpoint_keys: np.ndarray
    probabilities: np.ndarray
    levels_used: tuple[int, int]
    achieved_tol: float
    sum_deviation: float

    def row(self, viewpoint: int) -> np.ndarray:
        pos = int(np.searchsorted(self.viewpoint_keys, viewpoint))
        if pos >= len(self.viewpoint_keys) or self.viewpoint_keys[pos] != viewpoint:
            raise KeyError(f"{viewpoint} is not a viewpoint")
        return self.probabilities[pos]

    def prob(self, viewpoint: int, target: int) -> float:
        col = int(np.searchsorted(self.target_keys, target))
        if col >= len(self.target_keys) or self.target_keys[col] != target:
            raise KeyError(f"{target} is not a target")
        return float(self.row(viewpoint)[col])


_ENTRY_SLACK = 1e-12
_SUM_ERROR = 1e-8


def harmonic_measure(oracle: GraphOracle, exhaustion: Exhaustion,
                     targets: Iterable[int], viewpoints,
                     tol: float = 1e-6, n_max: int = 30,
                     stride: int = 2) -> HarmonicMeasure:
    """Harmonic measure of a finite target set with free boundary at infinity.

    Computed as the energy-minimizing extension of indicator data on the
    targets, one column per target, read off at the viewpoints. A
    viewpoint inside the target set gets its exact point mass. Entries
    must land in [0, 1] up to 1e-12 and rows must sum to 1 within 1e-8,
    else SolverError; nothing is renormalized.
    """
    t_keys = sorted(set(int(k) for k in targets))
    if not t_keys:
        raise ValueError("target set must be nonempty")
    if np.ndim(viewpoints) == 0:
        viewpoints = [viewpoints]
    v_keys = sorted(set(int(k) for k in viewpoints))
    eye = np.eye(len(t_keys))
    bnd = {k: eye[j] for j, k in enumerate(t_keys)}
    ext = min_energy_extension(oracle, exhaustion, bnd, v_keys, tol=tol,
                               n_max=n_max, stride=stride)
    probs = np.atleast_2d(ext.values)
    lo, hi = float(probs.min()), float(probs.max())
    if lo < -_ENTRY_SLACK or hi > 1 + _ENTRY_SLACK:
        raise SolverError(f"harmonic measure entries escape [0, 1]: min {lo:.3e}, max {hi:.3e}")
    dev = float(np.abs(probs.sum(axis=1) - 1.0).max())
    if dev > _SUM_ERROR:
        raise SolverError(f"harmonic measure row sums off by {dev:.3e}")
    return HarmonicMeasure(
        target_keys=np.array(t_keys, dtype=np.int64),
        viewpoint_keys=np.array(v_keys, dtype=np.int64),
        probabilities=probs,
        levels_used=ext.levels_used,
        achieved_tol=ext.achieved_tol,
        sum_deviation=dev,
    )


@dataclass(frozen=True)
class EnergyReport:
    """Dirichlet energy of a function, with per-edge contributions.

    `edges` aligns with WeightedGraph.edges(); `gradients` holds the
    plain differences f(v) - f(u) and `contributions` the weighted
    squares c (f(v) - f(u))^2 summed over unordered edges.
    """

    energy: float
    edges: tuple
    gradients: np.ndarray
    contributions: np.ndarray


def energy_report(graph: WeightedGraph, values: np.ndarray) -> EnergyReport:
    f = np.asarray(values, dtype=np.float64)
    if f.shape != (graph.n,):
        raise ValueError(f"values must have shape ({graph.n},)")
    edges = graph.edges()
    grads = np.array([f[v] - f[u] for u, v, _ in edges])
    contrib = np.array([c for _, _, c in edges]) * grads**2
    return EnergyReport(
        energy=float(contrib.sum()),
        edges=tuple((u, v) for u, v, _ in edges),
        gradients=grads,
        contributions=contrib,
    )


@dataclass(frozen=True)
class OrthogonalityReport:
    """Certificate that a function is (or is not) the energy minimizer.

    f minimizes energy among functions with its values on A exactly when
    its gradient is orthogonal to the gradient of every function
    vanishing on A; that space is spanned by indicator gradients at
    vertices off A, so `max_vertex_product` is the decisive number, and
    equals the largest weighted Laplacian of f off A. The cycle and
    boundary-path products are evaluated on f minus the actual minimizer
    and vanish identically in exact arithmetic; they are reported as a
    roundoff check of the discrete Stokes identities.
    """

    max_vertex_product: float
    max_cycle_product: float
    max_path_product: float
    n_cycles: int
    n_paths: int

    @property
    def max_product(self) -> float:
        return max(self.max_vertex_product, self.max_cycle_product, self.max_path_product)

    def is_minimizer(self, tol: float = 1e-8) -> bool:
        return self.max_product <= tol


def _tree_path(parent: dict, u: int, v: int) -> list[tuple[int, int]]:
    """Oriented edge list along the spanning-tree path u -> v."""
    anc_u = {u: None}
    x = u
    while parent[x] is not None:
        anc_u[parent[x]] = x
        x = parent[x]
    path_v = [v]
    x = v
    while x not in anc_u:
        x = parent[x]
        path_v.append(x)
    meet = x
    up = []
    x = u
    while x != meet:
        up.append((x, parent[x]))
        x = parent[x]
    down = [(path_v[i + 1], path_v[i]) for i in range(len(path_v) - 2, -1, -1)]
    return up + down


def cycle_orthogonality_check(graph: WeightedGraph, boundary_keys: Iterable[int],
                              values: np.ndarray, solver_tol: float = 1e-8) -> OrthogonalityReport:
    """Test whether `values` minimizes energy given its values on A.

    Returns products of the gradient against the three natural test
    families: indicator gradients off A (the decisive ones), fundamental
    cycle flows, and tree paths between consecutive A vertices, the
    latter two applied to f minus the computed minimizer.
    """
    f = np.asarray(values, dtype=np.float64)
    a_keys = sorted(set(int(k) for k in boundary_keys))
    if not a_keys:
        raise ValueError("boundary set must be nonempty")
    h = solve_free_dirichlet(graph, {a: f[a] for a in a_keys}, tol=solver_tol)
    g = f - h

    in_a = np.zeros(graph.n, dtype=bool)
    in_a[a_keys] = True
    vertex_products = []
    for x in range(graph.n):
        if in_a[x]:
            continue
        idx, wts = graph.neighbors(x)
        vertex_products.append(abs(float(np.dot(wts, f[x] - f[idx]))))
    max_vertex = max(vertex_products, default=0.0)

    parent: dict[int, int | None] = {0: None}
    order = [0]
    tree_edges = set()
    qi = 0
    while qi < len(order):
        x = order[qi]
        qi += 1
        for y in graph.neighbors(x)[0]:
            y = int(y)
            if y not in parent:
                parent[y] = x
                tree_edges.add((min(x, y), max(x, y)))
                order.append(y)

    max_cycle = 0.0
    n_cycles = 0
    for u, v, _ in graph.edges():
        if (u, v) in tree_edges:
            continue
        n_cycles += 1
        total = g[v] - g[u]
        for a, b in _tree_path(parent, v, u):
            total += g[b] - g[a]
        max_cycle = max(max_cycle, abs(float(total)))

    max_path = 0.0
    n_paths = 0
    for a, b in zip(a_keys, a_keys[1:]):
        n_paths += 1
        total = 0.0
        for x, y in _tree_path(parent, a, b):
            total += g[y] - g[x]
        max_path = max(max_path, abs(float(total)))

    return OrthogonalityReport(
        max_vertex_product=max_vertex,
        max_cycle_product=max_cycle,
        max_path_product=max_path,
        n_cycles=n_cycles,
        n_paths=n_paths,
    )
