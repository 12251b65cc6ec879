"""Verification suites: every check the package promises, in one place.

Each suite exercises one advertised behavior end to end (sampler laws
against exact enumeration, identities of the Green's function, level
consistency of the walk, embedding geometry) and returns a list of
CheckResult rows. The `verify` command and the acceptance tests both
run these, so there is exactly one implementation of each check.

Statistical checks are chi-square tests at fixed seeds; their p-value
thresholds are part of the contract, not tuning knobs. Reports omit
wall-clock times so identical (suite, seed) runs serialize to identical
bytes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .forest import (
    aldous_broder_window,
    enumerate_ust,
    matrix_tree_edge_prob,
    wilson_batch,
)
from .graphs import (
    Exhaustion,
    WeightedGraph,
    binary_tree,
    finite,
    lattice_zd,
    regular_tree,
)
from .green import gff_sample, green, kirkhoff_edge_prob, validate_green
from .harmonic import harmonic_measure
from .planar import face_convexity, grid_map, tutte_embed, wheel_map
from .walk import batch_first_hit, build_kernel, consistency_check

__all__ = ["CheckResult", "VerifyReport", "SUITES", "run_suites"]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    statistic: float
    threshold: float
    comparison: str  # ">" or "<="
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] {self.suite}/{self.name}: "
                f"{self.statistic:.6g} {self.comparison} {self.threshold:g}  "
                f"({self.detail})")

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "passed": self.passed,
            "statistic": float(self.statistic),
            "threshold": float(self.threshold),
            "comparison": self.comparison,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class VerifyReport:
    seed: int
    results: tuple

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def total_seconds(self) -> float:
        return float(sum(r.seconds for r in self.results))

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "all_passed": self.all_passed,
            "results": [r.to_json() for r in self.results],
        }


def _merged_chisquare(counts: np.ndarray, expected: np.ndarray) -> float:
    """One-sample chi-square p-value, pooling cells expected below 5."""
    counts = np.asarray(counts, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    small = expected < 5.0
    if small.any():
        if (~small).sum() == 0:
            raise ValueError("all cells have expected count below 5")
        counts = np.append(counts[~small], counts[small].sum())
        expected = np.append(expected[~small], expected[small].sum())
        if expected[-1] == 0.0:
            if counts[-1] != 0.0:
                return 0.0
            counts, expected = counts[:-1], expected[:-1]
    if len(counts) < 2:
        return 1.0
    return float(stats.chisquare(counts, expected).pvalue)


def _two_sample_chisquare(c1: np.ndarray, c2: np.ndarray) -> float:
    """Two-sample chi-square p-value over shared cells, pooling small ones.

    Identical point masses (a single populated cell) are a degenerate
    agreement: p = 1.
    """
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    pooled = c1 + c2
    keep = pooled > 0
    c1, c2, pooled = c1[keep], c2[keep], pooled[keep]
    total = pooled.sum()
    # expected column mass under homogeneity, smallest row
    min_row = min(c1.sum(), c2.sum())
    exp_small = pooled * min_row / total
    small = exp_small < 5.0
    if small.any() and (~small).sum() >= 1:
        c1 = np.append(c1[~small], c1[small].sum())
        c2 = np.append(c2[~small], c2[small].sum())
    if len(c1) < 2:
        return 1.0
    res = stats.chi2_contingency(np.vstack([c1, c2]))
    return float(res.pvalue)


def _random_connected_graph(rng: np.random.Generator, n_lo: int = 4,
                            n_hi: int = 8) -> WeightedGraph:
    n = int(rng.integers(n_lo, n_hi + 1))
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < 0.4:
                edges.append((u, v))
    weights = rng.uniform(0.5, 2.5, size=len(edges))
    return WeightedGraph(n, [(u, v, float(w)) for (u, v), w in zip(edges, weights)])


def _timed(rows: list, suite: str, name: str, passed: bool, statistic: float,
           threshold: float, comparison: str, detail: str, t0: float) -> None:
    rows.append(CheckResult(suite, name, bool(passed), float(statistic),
                            float(threshold), comparison, detail,
                            time.perf_counter() - t0))


# ---------------------------------------------------------------------------
# 1. Finite-graph sampler laws against exact enumeration.

_UST_GRAPHS: list[tuple[str, Callable[[], WeightedGraph]]] = [
    ("k3", lambda: WeightedGraph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])),
    ("k4", lambda: WeightedGraph(4, [(i, j, 1.0) for i in range(4)
                                     for j in range(i + 1, 4)])),
    ("weighted-triangle", lambda: WeightedGraph(
        3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])),
    ("cycle4", lambda: WeightedGraph(4, [(0, 1, 1.0), (1, 2, 1.0),
                                         (2, 3, 1.0), (3, 0, 1.0)])),
]


def suite_finite_ust(seed: int, replicas: int = 100_000) -> list[CheckResult]:
    """Spanning-tree samplers on finite graphs match exact enumeration."""
    rows: list[CheckResult] = []
    for gi, (gname, build) in enumerate(_UST_GRAPHS):
        g = build()
        dist = enumerate_ust(g)
        oracle = finite(g)
        exh = Exhaustion(oracle)
        lvl = exh.smallest_level_covering(range(g.n))
        kern = build_kernel(oracle, exh, lvl)
        all_keys = list(range(g.n))

        t0 = time.perf_counter()
        s = wilson_batch(kern, replicas, seed=seed * 1009 + 11 + gi,
                         window_keys=all_keys)
        pair_bit = {pair: j for j, pair in enumerate(s.window_edges)}
        tree_mask = {}
        for ti, tr in enumerate(dist.trees):
            mask = 0
            for e in tr:
                u, v = dist.edges[e]
                mask |= 1 << pair_bit[(min(u, v), max(u, v))]
            tree_mask[mask] = ti
        counts = np.zeros(dist.n_trees)
        vals, cnts = np.unique(s.window_masks, return_counts=True)
        stray = 0
        for v, c in zip(vals, cnts):
            ti = tree_mask.get(int(v))
            if ti is None:
                stray += int(c)
            else:
                counts[ti] = c
        if stray:
            _timed(rows, "finite-ust", f"wilson-{gname}", False, 0.0, 0.01,
                   ">", f"{stray} samples were not spanning trees", t0)
        else:
            p = _merged_chisquare(counts, dist.probs * replicas)
            _timed(rows, "finite-ust", f"wilson-{gname}", p > 0.01, p, 0.01,
                   ">", f"{dist.n_trees} trees, {replicas} replicas", t0)

        t0 = time.perf_counter()
        forests = aldous_broder_window(kern, 0, window_level=lvl,
                                       cover_level=lvl,
                                       seed=seed * 1009 + 211 + gi,
                                       n_replicas=replicas)
        counts = np.zeros(dist.n_trees)
        stray = 0
        for f in forests:
            try:
                counts[dist.index_of(f.edges)] += 1
            except KeyError:
                stray += 1
        if stray:
            _timed(rows, "finite-ust", f"aldous-broder-{gname}", False, 0.0,
                   0.01, ">", f"{stray} samples were not spanning trees", t0)
        else:
            p = _merged_chisquare(counts, dist.probs * replicas)
            _timed(rows, "finite-ust", f"aldous-broder-{gname}", p > 0.01, p,
                   0.01, ">", f"{dist.n_trees} trees, {replicas} replicas", t0)
    return rows


# ---------------------------------------------------------------------------
# 2. Edge marginal formula against the matrix-tree determinant ratio.


def suite_kirkhoff_formula(seed: int, n_graphs: int = 100) -> list[CheckResult]:
    """c(u,v) G_v(u,u) / pi(u) equals the determinant-ratio edge marginal."""
    rng = np.random.default_rng(seed + 202)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(n_graphs):
        g = _random_connected_graph(rng)
        oracle = finite(g)
        exh = Exhaustion(oracle)
        edges = g.edges()
        u, v, _ = edges[int(rng.integers(len(edges)))]
        lhs = kirkhoff_edge_prob(oracle, exh, u, v)
        rhs = matrix_tree_edge_prob(g, u, v)
        worst = max(worst, abs(lhs - rhs))
    rows: list[CheckResult] = []
    _timed(rows, "kirkhoff-formula", "random-graphs", worst <= 1e-9, worst,
           1e-9, "<=", f"max |difference| over {n_graphs} graphs", t0)
    return rows


# ---------------------------------------------------------------------------
# 3. Level consistency of the nested chains.


def suite_level_consistency(seed: int) -> list[CheckResult]:
    """Coarse kernels equal fine chains watched on the coarse level."""
    del seed  # deterministic
    rows: list[CheckResult] = []
    for gname, make in (("binary-tree", binary_tree),
                        ("lattice-z3", lambda: lattice_zd(3))):
        oracle = make()
        exh = Exhaustion(oracle)
        for m, n in ((1, 3), (2, 4)):
            t0 = time.perf_counter()
            rep = consistency_check(oracle, exh, m, n)
            _timed(rows, "level-consistency", f"{gname}-{m}-{n}",
                   rep.deviation <= 1e-6, rep.deviation, 1e-6, "<=",
                   f"core {rep.core_deviation:.2e}, shell {rep.shell_deviation:.2e}, "
                   f"shared truncation {rep.hm_truncation}", t0)
    return rows


# ---------------------------------------------------------------------------
# 4. First-hit law of the simulated walk vs harmonic measure.


def suite_hitting_law(seed: int, replicas: int = 100_000) -> list[CheckResult]:
    """Empirical first hits match the energy-minimizing harmonic measure."""
    t0 = time.perf_counter()
    oracle = regular_tree(3)
    exh = Exhaustion(oracle)
    kern = build_kernel(oracle, exh, 6)
    targets = (2, 3, 9)
    start = 4
    hm = harmonic_measure(oracle, exh, targets, [start], tol=1e-8)
    row = hm.row(start)
    probs = row / row.sum()
    hits = batch_first_hit(kern, start, targets, replicas,
                           seed=seed * 1009 + 404)
    counts = np.array([(hits == t).sum() for t in hm.target_keys])
    p = _merged_chisquare(counts, probs * replicas)
    rows: list[CheckResult] = []
    _timed(rows, "hitting-law", "tree-level6", p > 0.01, p, 0.01, ">",
           f"targets {targets} from {start}, law "
           + "/".join(f"{q:.4f}" for q in probs), t0)
    return rows


# ---------------------------------------------------------------------------
# 5. Green's function identities.


def suite_green_identities(seed: int, n_graphs: int = 50) -> list[CheckResult]:
    """Symmetry, Laplacian identity, harmonicity, positive spectrum."""
    rng = np.random.default_rng(seed + 505)
    rows: list[CheckResult] = []
    t0 = time.perf_counter()
    sym = lap = harm = eig = 0.0
    for _ in range(n_graphs):
        g = _random_connected_graph(rng)
        oracle = finite(g)
        exh = Exhaustion(oracle)
        a = int(rng.integers(g.n))
        gm = green(oracle, exh, [a], range(g.n))
        rep = validate_green(gm)
        sym = max(sym, rep.symmetry_residual)
        lap = max(lap, rep.laplacian_residual)
        harm = max(harm, rep.harmonicity_residual)
        eig = min(eig, rep.min_eigenvalue / max(rep.max_eigenvalue, 1e-300))
    detail = f"over {n_graphs} random graphs"
    _timed(rows, "green-identities", "random-symmetry", sym <= 1e-9, sym,
           1e-9, "<=", detail, t0)
    t0 = time.perf_counter()
    _timed(rows, "green-identities", "random-laplacian",
           max(lap, harm) <= 1e-8, max(lap, harm), 1e-8, "<=", detail, t0)
    t0 = time.perf_counter()
    _timed(rows, "green-identities", "random-spectrum", eig >= -1e-8, eig,
           -1e-8, ">", detail + " (min eig / max eig)", t0)

    oracle = regular_tree(3)
    exh = Exhaustion(oracle)
    w2 = [int(k) for k in exh.vertices(2)]
    for a in (1, 4):
        t0 = time.perf_counter()
        gm = green(oracle, exh, [a], w2, tol=1e-8)
        rep = validate_green(gm)
        ok = rep.ok(harmonicity=1e-8, laplacian=1e-8, symmetry=1e-9,
                    eig_slack=1e-8)
        worst = max(rep.symmetry_residual, rep.laplacian_residual,
                    rep.harmonicity_residual)
        _timed(rows, "green-identities", f"tree-window-a{a}", ok, worst, 1e-8,
               "<=", f"levels {gm.levels_used}, min eig {rep.min_eigenvalue:.2e}",
               t0)
    return rows


# ---------------------------------------------------------------------------
# 6. Field samples against the covariance they were drawn from.


def suite_gff_covariance(seed: int, replicas: int = 100_000) -> list[CheckResult]:
    """Empirical covariance within 5 standard errors; pinned set exactly 0."""
    t0 = time.perf_counter()
    oracle = regular_tree(3)
    exh = Exhaustion(oracle)
    w2 = [int(k) for k in exh.vertices(2)]
    gm = green(oracle, exh, [1], w2, tol=1e-8)
    samples = gff_sample(gm, replicas, seed=seed * 1009 + 606)
    emp = samples.empirical_covariance()
    se = samples.covariance_standard_error()
    diff = np.abs(emp - samples.covariance)
    live = se > 0
    max_z = float((diff[live] / se[live]).max())
    exact_zero = bool(np.all(diff[~live] == 0.0))
    rows: list[CheckResult] = []
    _timed(rows, "gff-covariance", "window-5se", max_z <= 5.0 and exact_zero,
           max_z, 5.0, "<=",
           f"{len(w2)}-vertex window, {replicas} replicas, max |z|", t0)
    t0 = time.perf_counter()
    pin = int(np.where(samples.w_keys == 1)[0][0])
    pinned_max = float(np.abs(samples.samples[:, pin]).max())
    _timed(rows, "gff-covariance", "pinned-exact-zero", pinned_max == 0.0,
           pinned_max, 0.0, "<=", "samples at the pinned vertex", t0)
    return rows


# ---------------------------------------------------------------------------
# 7. Embedding geometry.


def suite_tutte_embedding(seed: int) -> list[CheckResult]:
    """Wheel at roots of unity, convex faces, measure recoverable from angles."""
    del seed  # deterministic
    rows: list[CheckResult] = []
    t0 = time.perf_counter()
    emb = tutte_embed(wheel_map(8))
    roots = np.exp(2j * np.pi * np.arange(1, 9) / 8)
    rim = np.array([emb.positions[k] for k in range(1, 9)])
    rim_err = float(np.abs(rim - roots).max())
    _timed(rows, "tutte-embedding", "wheel8-roots-of-unity", rim_err <= 1e-10,
           rim_err, 1e-10, "<=", "rim vs 8th roots of unity", t0)
    t0 = time.perf_counter()
    hub = abs(emb.positions[0])
    _timed(rows, "tutte-embedding", "wheel8-center", hub <= 1e-10, hub, 1e-10,
           "<=", "hub distance from origin", t0)
    t0 = time.perf_counter()
    emb_g = tutte_embed(grid_map(3, 3))
    defect = max(face_convexity(emb).max_violation,
                 face_convexity(emb_g).max_violation)
    _timed(rows, "tutte-embedding", "face-convexity", defect <= 1e-9, defect,
           1e-9, "<=", "worst inward defect, wheel8 and 3x3 grid", t0)
    t0 = time.perf_counter()
    rec = float(np.abs(emb.measure_from_angles() - emb.boundary_measure).max())
    rec_g = float(np.abs(emb_g.measure_from_angles()
                         - emb_g.boundary_measure).max())
    rec = max(rec, rec_g)
    _timed(rows, "tutte-embedding", "measure-from-angles", rec <= 1e-12, rec,
           1e-12, "<=", "boundary measure reconstructed from angles", t0)
    return rows


# ---------------------------------------------------------------------------
# 8. Window marginal stability across sampling levels.


def suite_fsf_stability(seed: int, replicas: int = 50_000) -> list[CheckResult]:
    """Forest window marginals agree between two sampling levels."""
    t0 = time.perf_counter()
    oracle = regular_tree(3)
    exh = Exhaustion(oracle)
    w2 = [int(k) for k in exh.vertices(2)]
    masks = {}
    edges_seen = {}
    for lvl in (4, 6):
        kern = build_kernel(oracle, exh, lvl)
        s = wilson_batch(kern, replicas, seed=seed * 1009 + 808 + lvl,
                         window_keys=w2)
        masks[lvl] = s.window_masks
        edges_seen[lvl] = s.window_edges
    if edges_seen[4] != edges_seen[6]:
        raise RuntimeError("window edge lists differ between levels")
    vals = np.unique(np.concatenate([masks[4], masks[6]]))
    c4 = np.array([(masks[4] == v).sum() for v in vals])
    c6 = np.array([(masks[6] == v).sum() for v in vals])
    p = _two_sample_chisquare(c4, c6)
    degenerate = " (single shared configuration)" if len(vals) == 1 else ""
    rows: list[CheckResult] = []
    _timed(rows, "fsf-stability", "tree-window-levels-4-6", p > 0.01, p, 0.01,
           ">", f"{len(vals)} configurations over {len(edges_seen[4])} window "
           f"edges, {replicas} replicas per level{degenerate}", t0)
    return rows


# ---------------------------------------------------------------------------
# 9. Escaped branches at finite resolution.


def suite_wilson_escape(seed: int, runs: int = 10_000) -> list[CheckResult]:
    """Count runs whose loop erasure keeps a pass through infinity."""
    t0 = time.perf_counter()
    oracle = regular_tree(3)
    exh = Exhaustion(oracle)
    kern = build_kernel(oracle, exh, 6)
    s = wilson_batch(kern, runs, seed=seed * 1009 + 909)
    events = int(s.escaped_any.sum())
    detail = f"{events} of {runs} runs kept a pass"
    if events == 0:
        detail += ("; on a tree the shell re-entry law is a point mass at the"
                   " exit vertex, so loop erasure removes every pass and"
                   " escapes cannot occur at any finite level")
    rows: list[CheckResult] = []
    _timed(rows, "wilson-escape", "tree-level6-positive-frequency",
           events >= 10, events, 10, ">=", detail, t0)
    return rows


SUITES: dict[str, Callable[[int], list[CheckResult]]] = {
    "finite-ust": suite_finite_ust,
    "kirkhoff-formula": suite_kirkhoff_formula,
    "level-consistency": suite_level_consistency,
    "hitting-law": suite_hitting_law,
    "green-identities": suite_green_identities,
    "gff-covariance": suite_gff_covariance,
    "tutte-embedding": suite_tutte_embedding,
    "fsf-stability": suite_fsf_stability,
    "wilson-escape": suite_wilson_escape,
}


def run_suites(names: Sequence[str] | None = None, seed: int = 0,
               echo: Callable[[str], None] | None = None) -> VerifyReport:
    """Run the named suites (all by default) and collect their rows."""
    chosen = list(SUITES) if not names else list(names)
    unknown = [n for n in chosen if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites: {unknown}; known: {list(SUITES)}")
    results: list[CheckResult] = []
    for name in chosen:
        for row in SUITES[name](seed):
            results.append(row)
            if echo is not None:
                echo(row.line())
    return VerifyReport(seed=int(seed), results=tuple(results))
