"""Green's functions of the reflected walk, and the Gaussian field they drive.

G_A(x, y) is the expected number of visits to y strictly before hitting
the set A. Each exhaustion level contributes the fundamental matrix of
the level's free-boundary subgraph walk absorbed at A, and levels
escalate until the requested window stops moving. On trees the trace of
a deeper walk on a ball is exactly the ball's own subgraph walk, so the
escalation terminates immediately with zero movement.

The discrete Gaussian free field pinned on A with free boundary at
infinity has covariance G_A(x, y) / pi(y); `gff_sample` factors that
matrix and draws replicas from counter streams.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConvergenceError, SolverError
from .graphs import Exhaustion, GraphOracle, LevelGraph, truncate
from .rng import normals, stream_key

__all__ = [
    "GreenMatrix",
    "green",
    "GreenReport",
    "validate_green",
    "kirkhoff_edge_prob",
    "GffSamples",
    "gff_sample",
]


@dataclass(frozen=True)
class GreenMatrix:
    """Green's function of the reflected walk killed on A, on a window W.

    `values[i, j]` is G_A(w_i, w_j); rows and columns of vertices inside
    A are identically zero. The final level's full columns and subgraph
    are retained for validation.
    """

    a_keys: np.ndarray
    w_keys: np.ndarray
    values: np.ndarray
    levels_used: tuple
    achieved_tol: float
    level_graph: LevelGraph
    full_columns: np.ndarray
    pi_window: np.ndarray

    def value(self, x_key: int, y_key: int) -> float:
        i = int(np.searchsorted(self.w_keys, int(x_key)))
        j = int(np.searchsorted(self.w_keys, int(y_key)))
        if i >= len(self.w_keys) or self.w_keys[i] != x_key:
            raise KeyError(f"{x_key} not in window")
        if j >= len(self.w_keys) or self.w_keys[j] != y_key:
            raise KeyError(f"{y_key} not in window")
        return float(self.values[i, j])

    def covariance(self) -> np.ndarray:
        """GFF covariance G(x, y) / pi(y), symmetrized."""
        with np.errstate(divide="ignore", invalid="ignore"):
            sigma = self.values / self.pi_window[None, :]
        sigma = np.where(np.isfinite(sigma), sigma, 0.0)
        return 0.5 * (sigma + sigma.T)


def _green_at_level(oracle: GraphOracle, exhaustion: Exhaustion, n: int,
                    a_keys: np.ndarray, w_keys: np.ndarray):
    lg = truncate(oracle, exhaustion, n)
    pos = {int(k): i for i, k in enumerate(lg.core_keys)}
    missing = [int(k) for k in np.concatenate([a_keys, w_keys]) if int(k) not in pos]
    if missing:
        raise ValueError(f"vertices {missing[:4]} not inside level {n}")
    g = lg.core_graph
    a_idx = np.array([pos[int(k)] for k in a_keys])
    w_idx = np.array([pos[int(k)] for k in w_keys])
    in_a = np.zeros(g.n, dtype=bool)
    in_a[a_idx] = True
    t_idx = np.nonzero(~in_a)[0]
    t_pos = {int(x): i for i, x in enumerate(t_idx)}

    lap = g.laplacian().tocsr()
    l_tt = lap[t_idx][:, t_idx].toarray()
    cols = np.zeros((g.n, len(w_keys)))
    live = [j for j, wi in enumerate(w_idx) if not in_a[wi]]
    if live:
        rhs = np.zeros((t_idx.size, len(live)))
        for col, j in enumerate(live):
            wi = int(w_idx[j])
            rhs[t_pos[wi], col] = g.pi[wi]
        sol = np.linalg.solve(l_tt, rhs)
        for col, j in enumerate(live):
            cols[t_idx, j] = sol[:, col]
    w_vals = cols[w_idx]
    return lg, cols, w_vals, g.pi[w_idx]


def green(oracle: GraphOracle, exhaustion: Exhaustion, a: Iterable[int],
          w: Iterable[int], tol: float = 1e-6, n_start: int | None = None,
          n_max: int = 30, stride: int = 2) -> GreenMatrix:
    """Green's function G_A on the window W, escalated until stable.

    At each level the free-boundary subgraph walk is absorbed on A and
    its fundamental matrix solved column by column (as a symmetric
    Laplacian system); escalation stops when the window block moves by
    at most `tol` between two levels a stride apart. Entries with either
    vertex in A are zero.
    """
    a_keys = np.array(sorted(set(int(k) for k in a)), dtype=np.int64)
    w_keys = np.array(sorted(set(int(k) for k in w)), dtype=np.int64)
    if a_keys.size == 0:
        raise ValueError("killing set A must be nonempty")
    if w_keys.size == 0:
        raise ValueError("window must be nonempty")
    need = exhaustion.smallest_level_covering(list(a_keys) + list(w_keys))
    n0 = max(need, n_start or 1)

    prev = None
    prev_n = None
    diff = np.inf
    for n in range(n0, n_max + 1, stride):
        lg, cols, w_vals, pi_w = _green_at_level(oracle, exhaustion, n, a_keys, w_keys)
        if prev is not None:
            diff = float(np.abs(w_vals - prev).max())
            if diff <= tol:
                return GreenMatrix(
                    a_keys=a_keys,
                    w_keys=w_keys,
                    values=w_vals,
                    levels_used=(prev_n, n),
                    achieved_tol=diff,
                    level_graph=lg,
                    full_columns=cols,
                    pi_window=pi_w,
                )
        prev, prev_n = w_vals, n
    raise ConvergenceError(
        f"Green window still moving by {diff:.3e} > {tol:.1e} at level cap {n_max}",
        last_two=(prev, None), achieved=diff)


@dataclass(frozen=True)
class GreenReport:
    """Residuals of the identities a Green's function must satisfy.

    Harmonicity: each column is harmonic for the subgraph walk away from
    A and its own vertex. Row identity: the weighted Laplacian of the
    column at its own vertex equals minus pi. Symmetry: G(x, y) / pi(y)
    is a symmetric matrix. The covariance minimum eigenvalue certifies
    positive semidefiniteness up to roundoff.
    """

    harmonicity_residual: float
    laplacian_residual: float
    symmetry_residual: float
    min_eigenvalue: float
    max_eigenvalue: float
    levels_used: tuple

    def ok(self, harmonicity: float = 1e-8, laplacian: float = 1e-8,
           symmetry: float = 1e-9, eig_slack: float = 1e-8) -> bool:
        return (self.harmonicity_residual <= harmonicity
                and self.laplacian_residual <= laplacian
                and self.symmetry_residual <= symmetry
                and self.min_eigenvalue >= -eig_slack * max(self.max_eigenvalue, 1e-300))


def validate_green(gm: GreenMatrix) -> GreenReport:
    """Check the defining identities on the stored final level.

    Requires the window to be closed under one step inside the level
    core (so the window's pi is unambiguous); raises ValueError if a
    window vertex has a neighbor outside the core.
    """
    lg = gm.level_graph
    g = lg.core_graph
    pos = {int(k): i for i, k in enumerate(lg.core_keys)}
    core_set = set(pos)
    for k in gm.w_keys:
        for y in (int(t) for t in _oracle_row(gm, int(k))):
            if y not in core_set:
                raise ValueError(
                    f"window vertex {int(k)} has neighbor {y} outside the core; "
                    "the window must be closed under one step")

    a_idx = {pos[int(k)] for k in gm.a_keys}
    harm = 0.0
    lap_res = 0.0
    for j, yk in enumerate(gm.w_keys):
        yi = pos[int(yk)]
        col = gm.full_columns[:, j]
        if yi in a_idx:
            continue
        for x in range(g.n):
            idx, wts = g.neighbors(x)
            val = float(np.dot(wts, col[idx] - col[x]))
            if x == yi:
                lap_res = max(lap_res, abs(val + g.pi[yi]))
            elif x not in a_idx:
                harm = max(harm, abs(val))

    sigma_raw = gm.values / gm.pi_window[None, :]
    sym = float(np.abs(sigma_raw - sigma_raw.T).max())
    sigma = 0.5 * (sigma_raw + sigma_raw.T)
    eigs = np.linalg.eigvalsh(sigma)
    return GreenReport(
        harmonicity_residual=harm,
        laplacian_residual=lap_res,
        symmetry_residual=sym,
        min_eigenvalue=float(eigs.min()),
        max_eigenvalue=float(eigs.max()),
        levels_used=gm.levels_used,
    )


def _oracle_row(gm: GreenMatrix, key: int):
    # The level graph caches full rows for core vertices; use them to test
    # window closure without re-consulting the oracle.
    lg = gm.level_graph
    state = lg.state_of(key)
    nbr_states = lg.state_nbr[state]
    all_keys = np.concatenate([lg.core_keys, lg.shell_keys]) if lg.n_shell \
        else lg.core_keys
    return [int(all_keys[s]) for s in nbr_states]


def kirkhoff_edge_prob(oracle: GraphOracle, exhaustion: Exhaustion,
                       u: int, v: int, tol: float = 1e-6,
                       n_max: int = 30) -> float:
    """Probability that edge (u, v) belongs to the free spanning forest.

    Equals c(u, v) * G_{v}(u, u) / pi(u): conductance times effective
    resistance computed from the reflected walk's Green's function. The
    result must land in [0, 1] up to 1e-12, else SolverError.
    """
    u, v = int(u), int(v)
    nbr_keys, wts = oracle.neighbors(u)
    try:
        c = float(wts[list(nbr_keys).index(v)])
    except ValueError:
        raise ValueError(f"({u}, {v}) is not an edge") from None
    gm = green(oracle, exhaustion, a=[v], w=[u], tol=tol, n_max=n_max)
    p = c * gm.value(u, u) / oracle.pi(u)
    if not -1e-12 <= p <= 1 + 1e-12:
        raise SolverError(f"edge probability {p} escapes [0, 1]")
    return float(min(max(p, 0.0), 1.0))


@dataclass(frozen=True)
class GffSamples:
    """Replicas of the pinned Gaussian free field on a window.

    Each row of `samples` is one field configuration; coordinates on the
    pinned set are exactly zero. `covariance` is the target matrix the
    factorization reproduced.
    """

    w_keys: np.ndarray
    a_keys: np.ndarray
    samples: np.ndarray
    covariance: np.ndarray
    seed: int
    clipped_eigenvalues: int

    def empirical_covariance(self) -> np.ndarray:
        # The field has mean zero by construction, so no centering.
        r = self.samples.shape[0]
        return self.samples.T @ self.samples / r

    def covariance_standard_error(self) -> np.ndarray:
        """Asymptotic standard error of each empirical covariance entry."""
        r = self.samples.shape[0]
        s = self.covariance
        var = np.outer(np.diag(s), np.diag(s)) + s**2
        return np.sqrt(var / r)


_EIG_DENSE_CUTOFF = 200
_PSD_SLACK = 1e-8


def gff_sample(gm: GreenMatrix, n_replicas: int, seed: int,
               stream_offset: int = 0) -> GffSamples:
    """Draw replicas of the Gaussian free field with covariance G / pi.

    The covariance is symmetrized, then factored by eigendecomposition
    (small windows) or Cholesky with escalating jitter. Eigenvalues
    below -1e-8 times the largest are an error; negatives inside that
    band are clipped to zero. Replica r draws its normals from stream
    `stream_offset + r`, one counter pair per coordinate.
    """
    sigma = gm.covariance()
    d = sigma.shape[0]
    a_set = set(int(k) for k in gm.a_keys)
    a_pos = [i for i, k in enumerate(gm.w_keys) if int(k) in a_set]
    sigma[a_pos, :] = 0.0
    sigma[:, a_pos] = 0.0

    clipped = 0
    if d <= _EIG_DENSE_CUTOFF:
        lam, u = np.linalg.eigh(sigma)
        top = float(lam.max(initial=0.0))
        floor = -_PSD_SLACK * max(top, 1e-300)
        if float(lam.min(initial=0.0)) < floor:
            raise SolverError(
                f"covariance has eigenvalue {lam.min():.3e} below {floor:.3e}; not PSD")
        neg = lam < 0
        clipped = int(neg.sum())
        lam = np.where(neg, 0.0, lam)
        factor = u * np.sqrt(lam)[None, :]
    else:
        top = float(np.diag(sigma).max(initial=0.0))
        factor = None
        for jitter in (0.0, 1e-12, 1e-10, 1e-8):
            try:
                factor = np.linalg.cholesky(sigma + jitter * top * np.eye(d))
                break
            except np.linalg.LinAlgError:
                continue
        if factor is None:
            raise SolverError("covariance failed Cholesky even with jitter")

    r = int(n_replicas)
    keys = stream_key(seed, np.arange(stream_offset, stream_offset + r, dtype=np.uint64))
    z = normals(keys[:, None], np.arange(d, dtype=np.uint64)[None, :])
    samples = z @ factor.T
    if a_pos:
        samples[:, a_pos] = 0.0
    return GffSamples(
        w_keys=gm.w_keys,
        a_keys=gm.a_keys,
        samples=samples,
        covariance=sigma,
        seed=seed,
        clipped_eigenvalues=clipped,
    )
