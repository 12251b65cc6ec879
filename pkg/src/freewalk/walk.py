"""Level chains: the walk reflected at infinity, one truncation at a time.

The level-n chain lives on the level set plus its one-step shell. At a
core vertex it steps exactly like the walk on the whole graph, shell
vertices included as targets. Arriving at a shell vertex means the walk
has left the level: the chain records a pass through infinity (tagged
with the shell vertex's end prefix) and jumps back into the core in one
move, distributed as the harmonic measure of the level set seen from
that shell vertex. Those shell rows are themselves computed with free
boundary at a deeper truncation, escalated until they stop moving.

Draw discipline: every transition consumes exactly two uniforms from
the replica's counter stream, one for the step and one for the holding
time, whether or not holding times are wanted. Vertex sequences are
therefore identical between the scalar and vectorized engines and do
not depend on the rate schedule, batching, or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import BudgetError, ConvergenceError, GraphConsistencyError
from .graphs import (
    ComplementComponents,
    EndPrefix,
    Exhaustion,
    GraphOracle,
    LevelGraph,
    complement_components,
    truncate,
)
from .harmonic import solve_free_dirichlet
from .rng import stream_key, uniforms

__all__ = [
    "RateSchedule",
    "HitSet",
    "FixedSteps",
    "CoverSet",
    "StopRule",
    "VertexVisit",
    "InfinityPass",
    "Trajectory",
    "LevelChainKernel",
    "build_kernel",
    "simulate",
    "advance_states",
    "batch_first_hit",
    "batch_cover_parents",
    "batch_visit_counts",
    "ConsistencyReport",
    "consistency_check",
    "expected_excursion_time",
    "ScheduleReport",
    "schedule_report",
]


@dataclass(frozen=True)
class RateSchedule:
    """Holding rates w(x) = base * growth ** level(x).

    level(x) is the exhaustion level of x, so rates grow along the
    exhaustion. Faster growth shortens the time spent far out; whether
    the expected excursion time converges as levels increase can be
    checked with `schedule_report`.
    """

    base: float = 1.0
    growth: float = 4.0

    def __post_init__(self):
        if not (self.base > 0 and np.isfinite(self.base)):
            raise ValueError("base rate must be positive")
        if not (self.growth > 0 and np.isfinite(self.growth)):
            raise ValueError("growth must be positive")

    def rate(self, level):
        return self.base * self.growth ** np.asarray(level, dtype=np.float64)


@dataclass(frozen=True)
class HitSet:
    """Stop when the chain first sits at one of these vertices (start counts)."""

    keys: frozenset

    def __init__(self, keys: Iterable[int]):
        object.__setattr__(self, "keys", frozenset(int(k) for k in keys))
        if not self.keys:
            raise ValueError("hit set must be nonempty")


@dataclass(frozen=True)
class FixedSteps:
    """Stop after this many chain transitions; a pending pass is completed
    first so trajectories always end at a vertex."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("step count must be nonnegative")


@dataclass(frozen=True)
class CoverSet:
    """Stop once every one of these vertices has been visited."""

    keys: frozenset

    def __init__(self, keys: Iterable[int]):
        object.__setattr__(self, "keys", frozenset(int(k) for k in keys))
        if not self.keys:
            raise ValueError("cover set must be nonempty")


StopRule = Union[HitSet, FixedSteps, CoverSet]


@dataclass(frozen=True)
class VertexVisit:
    key: int
    holding_time: float


@dataclass(frozen=True)
class InfinityPass:
    """One excursion beyond the level, compressed to an instant.

    `end` addresses which end of the graph the walk escaped through, at
    the resolution of the kernel's level; `exit_key` is the shell vertex
    it left by and `reentry_key` the core vertex it came back to.
    """

    end: EndPrefix
    exit_key: int
    reentry_key: int


@dataclass(frozen=True)
class Trajectory:
    level: int
    start_key: int
    seed: int
    stream_index: int
    events: tuple
    stopped: str
    transitions: int
    elapsed: float

    def vertex_keys(self) -> list[int]:
        return [e.key for e in self.events if isinstance(e, VertexVisit)]

    def passes(self) -> list[InfinityPass]:
        return [e for e in self.events if isinstance(e, InfinityPass)]

    def sequence(self) -> tuple[list[int], list[bool]]:
        """Visited vertices with a flag marking arrivals via infinity."""
        keys: list[int] = []
        flags: list[bool] = []
        pending = False
        for e in self.events:
            if isinstance(e, InfinityPass):
                pending = True
            else:
                keys.append(e.key)
                flags.append(pending)
                pending = False
        return keys, flags

    def json_events(self) -> list[dict]:
        out = []
        for e in self.events:
            if isinstance(e, VertexVisit):
                out.append({"type": "visit", "key": e.key, "holding_time": e.holding_time})
            else:
                out.append({
                    "type": "pass",
                    "end_level": e.end.level,
                    "end_ids": list(e.end.ids),
                    "exit_key": e.exit_key,
                    "reentry_key": e.reentry_key,
                })
        return out


@dataclass(frozen=True)
class LevelChainKernel:
    """Transition kernel of the level-n chain in padded sparse form.

    States are core vertices (sorted by key) followed by shell vertices
    (sorted by key). Row i transitions to `nbr[i, j]` where j is the
    number of entries of `cum[i]` at most the step uniform; rows are
    renormalized so the last real cumulative entry is exactly one.
    """

    level: int
    level_graph: LevelGraph
    oracle: GraphOracle
    exhaustion: Exhaustion
    state_keys: np.ndarray
    n_core: int
    nbr: np.ndarray
    prob: np.ndarray
    cum: np.ndarray
    row_len: np.ndarray
    pi_full: np.ndarray
    state_level: np.ndarray
    end_prefixes: tuple
    hm_truncation: int
    hm_levels_used: tuple
    hm_achieved: float

    @property
    def n_states(self) -> int:
        return len(self.state_keys)

    @property
    def n_shell(self) -> int:
        return self.n_states - self.n_core

    def state_of(self, key: int) -> int:
        return self.level_graph.state_of(key)

    def key_of(self, state: int) -> int:
        return int(self.state_keys[state])

    def is_shell_state(self, state: int) -> bool:
        return state >= self.n_core

    def core_key_set(self) -> frozenset:
        return frozenset(int(k) for k in self.state_keys[: self.n_core])

    def transition_matrix(self) -> np.ndarray:
        """Dense row-stochastic matrix of the chain (states x states)."""
        p = np.zeros((self.n_states, self.n_states))
        for i in range(self.n_states):
            k = int(self.row_len[i])
            p[i, self.nbr[i, :k]] = self.prob[i, :k]
        return p

    def mean_holding(self, rate: RateSchedule) -> np.ndarray:
        """Expected holding time per state; passes are instantaneous."""
        m = np.zeros(self.n_states)
        m[: self.n_core] = 1.0 / rate.rate(self.state_level[: self.n_core])
        return m


def _padded_rows(rows: list[tuple[np.ndarray, np.ndarray]]):
    width = max(len(t) for t, _ in rows)
    s = len(rows)
    nbr = np.zeros((s, width), dtype=np.int64)
    prob = np.zeros((s, width), dtype=np.float64)
    cum = np.ones((s, width), dtype=np.float64)
    row_len = np.zeros(s, dtype=np.int64)
    for i, (targets, probs) in enumerate(rows):
        k = len(targets)
        if k == 0:
            raise GraphConsistencyError("a chain state has no transitions")
        total = probs.sum()
        p = probs / total
        c = np.cumsum(p)
        c[-1] = 1.0
        nbr[i, :k] = targets
        nbr[i, k:] = targets[-1]
        prob[i, :k] = p
        cum[i, :k] = c
        row_len[i] = k
    return nbr, prob, cum, row_len


def _shell_rows(oracle: GraphOracle, exhaustion: Exhaustion, lg: LevelGraph,
                hm_tol: float, hm_level: int | None, stride: int,
                n_max: int) -> tuple[np.ndarray, int, tuple, float]:
    """Harmonic-measure rows for every shell vertex, all from one deep solve.

    Solves the free-boundary Dirichlet problem with identity data on the
    whole level set at a deeper truncation and reads the rows off at the
    shell vertices. With `hm_level` fixed the rows come from exactly that
    truncation; otherwise truncations escalate until rows move by less
    than `hm_tol`.
    """
    n = lg.level

    def rows_at(big: int) -> np.ndarray:
        lg_big = truncate(oracle, exhaustion, big)
        pos = {int(k): i for i, k in enumerate(lg_big.core_keys)}
        missing = [int(k) for k in lg.shell_keys if int(k) not in pos]
        if missing:
            raise GraphConsistencyError(
                f"shell vertices {missing[:4]} not inside truncation level {big}")
        eye = np.eye(lg.n_core)
        bnd = {pos[int(k)]: eye[j] for j, k in enumerate(lg.core_keys)}
        f = solve_free_dirichlet(lg_big.core_graph, bnd)
        return np.asarray(f)[[pos[int(k)] for k in lg.shell_keys]]

    if hm_level is not None:
        if hm_level <= n:
            raise ValueError("hm_level must exceed the kernel level")
        rows = rows_at(hm_level)
        return rows, hm_level, (hm_level, hm_level), 0.0

    prev = None
    prev_level = None
    diff = np.inf
    for big in range(n + stride, n_max + 1, stride):
        rows = rows_at(big)
        if prev is not None:
            diff = float(np.abs(rows - prev).max())
            if diff <= hm_tol:
                return rows, big, (prev_level, big), diff
        prev, prev_level = rows, big
    raise ConvergenceError(
        f"shell rows still moving by {diff:.3e} at truncation cap {n_max}",
        achieved=diff,
    )


def build_kernel(oracle: GraphOracle, exhaustion: Exhaustion, n: int,
                 hm_tol: float = 1e-6, hm_level: int | None = None,
                 hm_stride: int = 2, hm_max: int = 40,
                 probe_depth: int | None = None) -> LevelChainKernel:
    """Assemble the level-n chain kernel.

    Shell rows are harmonic measures of the level set seen from each
    shell vertex, solved at truncation `hm_level` when given, otherwise
    escalated until they settle to within `hm_tol`. Each shell vertex is
    also tagged with its end prefix so simulated passes know which end
    they went through. A finite graph eventually has an empty shell and
    the kernel degenerates to the plain walk.
    """
    lg = truncate(oracle, exhaustion, n)
    if lg.n_shell:
        raw, hm_trunc, hm_levels, hm_achieved = _shell_rows(
            oracle, exhaustion, lg, hm_tol, hm_level, hm_stride, hm_max)
        if raw.min() < -1e-12 or raw.max() > 1 + 1e-12:
            raise GraphConsistencyError(
                f"shell rows escape [0, 1]: min {raw.min():.3e}, max {raw.max():.3e}")
        clipped = np.clip(raw, 0.0, None)
        lg = lg.attach_shell_kernel(clipped)
        kernel_rows = clipped / clipped.sum(axis=1, keepdims=True)
    else:
        hm_trunc, hm_levels, hm_achieved = n, (n, n), 0.0
        lg = lg.attach_shell_kernel(np.zeros((0, lg.n_core)))
        kernel_rows = lg.shell_kernel

    rows: list[tuple[np.ndarray, np.ndarray]] = []
    for i in range(lg.n_core):
        rows.append((lg.state_nbr[i], lg.state_wts[i]))
    for j in range(lg.n_shell):
        nz = np.nonzero(kernel_rows[j] > 0)[0]
        rows.append((nz, kernel_rows[j][nz]))
    nbr, prob, cum, row_len = _padded_rows(rows)

    state_keys = np.concatenate([lg.core_keys, lg.shell_keys]) if lg.n_shell \
        else lg.core_keys.copy()
    state_level = np.array([exhaustion.level_of(int(k)) for k in state_keys],
                           dtype=np.int64)

    prefixes: list[EndPrefix | None] = [None] * lg.n_core
    if lg.n_shell:
        ccs: list[ComplementComponents] = []
        for k in range(1, n + 1):
            probe = probe_depth if probe_depth is not None else max(2 * k, n + 1)
            ccs.append(complement_components(oracle, exhaustion, k, probe))
        for key in lg.shell_keys:
            ids = []
            for cc in ccs:
                cid = cc.component_of(int(key))
                if cid is None:
                    raise GraphConsistencyError(
                        f"shell vertex {int(key)} missing from level-{cc.level} probe window")
                ids.append(cid)
            prefixes.append(EndPrefix(level=n, ids=tuple(ids)))

    return LevelChainKernel(
        level=n,
        level_graph=lg,
        oracle=oracle,
        exhaustion=exhaustion,
        state_keys=state_keys,
        n_core=lg.n_core,
        nbr=nbr,
        prob=prob,
        cum=cum,
        row_len=row_len,
        pi_full=lg.pi_full,
        state_level=state_level,
        end_prefixes=tuple(prefixes),
        hm_truncation=hm_trunc,
        hm_levels_used=hm_levels,
        hm_achieved=hm_achieved,
    )


def advance_states(kernel: LevelChainKernel, states: np.ndarray,
                   u: np.ndarray) -> np.ndarray:
    """One lockstep transition for a vector of states given step uniforms."""
    idx = (kernel.cum[states] <= u[:, None]).sum(axis=1)
    return kernel.nbr[states, idx]


def simulate(kernel: LevelChainKernel, start_key: int, stop: StopRule,
             seed: int, rate: RateSchedule = RateSchedule(),
             max_transitions: int = 10_000_000,
             stream_index: int = 0) -> Trajectory:
    """Run one trajectory of the level chain.

    The trajectory alternates vertex visits (with exponential holding
    times under the rate schedule) and passes through infinity. Stop
    rules: HitSet ends on first arrival in the set (a start inside
    counts), FixedSteps after that many transitions, CoverSet once every
    listed vertex has been seen. Exceeding `max_transitions` raises
    BudgetError with the partial trajectory attached.
    """
    core = kernel.core_key_set()
    start_key = int(start_key)
    if start_key not in core:
        raise ValueError(f"start vertex {start_key} is not in the level core")
    if isinstance(stop, (HitSet, CoverSet)) and not stop.keys <= core:
        raise ValueError("stop vertices must lie in the level core")

    key = stream_key(seed, stream_index)
    rates = rate.rate(kernel.state_level)
    state = kernel.state_of(start_key)
    events: list = []
    covered: set[int] = set()
    elapsed = 0.0
    t = 0
    stopped = None
    pending_exit: int | None = None

    def stop_now(vkey: int) -> str | None:
        if isinstance(stop, HitSet) and vkey in stop.keys:
            return "hit"
        if isinstance(stop, CoverSet):
            covered.add(vkey)
            if stop.keys <= covered:
                return "cover"
        if isinstance(stop, FixedSteps) and t >= stop.n:
            return "steps"
        return None

    vkey = start_key
    while True:
        reason = stop_now(vkey)
        if reason is not None:
            events.append(VertexVisit(vkey, 0.0))
            stopped = reason
            break
        if t >= max_transitions:
            partial = Trajectory(kernel.level, start_key, seed, stream_index,
                                 tuple(events), "budget", t, elapsed)
            raise BudgetError(f"exceeded {max_transitions} transitions", partial=partial)
        u_step = float(uniforms(key, 2 * t))
        u_hold = float(uniforms(key, 2 * t + 1))
        hold = -float(np.log1p(-u_hold)) / float(rates[state])
        events.append(VertexVisit(vkey, hold))
        elapsed += hold
        # Transition, completing a pass in full if the step exits the level.
        idx = int(np.sum(kernel.cum[state] <= u_step))
        state = int(kernel.nbr[state, idx])
        t += 1
        while kernel.is_shell_state(state):
            pending_exit = kernel.key_of(state)
            u_step = float(uniforms(key, 2 * t))
            # Holding uniform consumed for the shell state too; passes are
            # instantaneous so its value is unused.
            idx = int(np.sum(kernel.cum[state] <= u_step))
            nxt = int(kernel.nbr[state, idx])
            prefix = kernel.end_prefixes[kernel.state_of(pending_exit)]
            events.append(InfinityPass(prefix, pending_exit, kernel.key_of(nxt)))
            state = nxt
            t += 1
        vkey = kernel.key_of(state)

    return Trajectory(kernel.level, start_key, seed, stream_index,
                      tuple(events), stopped, t, elapsed)


def _stream_keys(seed: int, n_replicas: int, offset: int) -> np.ndarray:
    return stream_key(seed, np.arange(offset, offset + n_replicas, dtype=np.uint64))


def batch_first_hit(kernel: LevelChainKernel, start_key: int,
                    target_keys: Iterable[int], n_replicas: int, seed: int,
                    max_rounds: int = 1_000_000,
                    stream_offset: int = 0) -> np.ndarray:
    """First-hit vertex of a target set, one entry per replica.

    Replica r follows the same stream as `simulate(..., stream_index =
    stream_offset + r)`, so scalar and vectorized runs agree path for
    path.
    """
    targets = sorted(set(int(k) for k in target_keys))
    core = kernel.core_key_set()
    if not set(targets) <= core:
        raise ValueError("targets must lie in the level core")
    is_target = np.zeros(kernel.n_states, dtype=bool)
    for k in targets:
        is_target[kernel.state_of(k)] = True

    r = int(n_replicas)
    keys = _stream_keys(seed, r, stream_offset)
    states = np.full(r, kernel.state_of(int(start_key)), dtype=np.int64)
    t = np.zeros(r, dtype=np.uint64)
    out = np.full(r, -1, dtype=np.int64)
    act = np.arange(r)
    if is_target[states[0]]:
        return np.full(r, int(start_key), dtype=np.int64)

    two = np.uint64(2)
    for _ in range(max_rounds):
        u = uniforms(keys[act], t[act] * two)
        states[act] = advance_states(kernel, states[act], u)
        t[act] += np.uint64(1)
        hit = is_target[states[act]]
        if hit.any():
            done = act[hit]
            out[done] = kernel.state_keys[states[done]]
            act = act[~hit]
            if act.size == 0:
                return out
    raise BudgetError(f"{act.size} replicas unresolved after {max_rounds} rounds",
                      partial=out)


_PARENT_UNSET = -9
PARENT_ROOT = -1
PARENT_VIA_INFINITY = -2


def batch_cover_parents(kernel: LevelChainKernel, start_key: int,
                        window_keys: Iterable[int], cover_keys: Iterable[int],
                        n_replicas: int, seed: int,
                        max_rounds: int = 10_000_000,
                        stream_offset: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """First-entrance parents over a window, running until a cover set is seen.

    Returns (parents, window_keys_sorted): parents[r, j] is the state
    index of the vertex from which replica r first reached window vertex
    j, PARENT_ROOT for the start vertex, PARENT_VIA_INFINITY when the
    first arrival came through a pass.
    """
    window = np.array(sorted(set(int(k) for k in window_keys)), dtype=np.int64)
    cover = sorted(set(int(k) for k in cover_keys))
    core = kernel.core_key_set()
    if not set(int(k) for k in window) <= core or not set(cover) <= core:
        raise ValueError("window and cover must lie in the level core")
    if not set(int(k) for k in window) <= set(cover):
        raise ValueError("cover must contain the window")

    wpos = np.full(kernel.n_states, -1, dtype=np.int64)
    for j, k in enumerate(window):
        wpos[kernel.state_of(int(k))] = j
    in_cover = np.zeros(kernel.n_states, dtype=bool)
    for k in cover:
        in_cover[kernel.state_of(k)] = True

    r = int(n_replicas)
    keys = _stream_keys(seed, r, stream_offset)
    start_state = kernel.state_of(int(start_key))
    states = np.full(r, start_state, dtype=np.int64)
    t = np.zeros(r, dtype=np.uint64)
    parents = np.full((r, len(window)), _PARENT_UNSET, dtype=np.int64)
    visited = np.zeros((r, kernel.n_states), dtype=bool)
    visited[:, start_state] = True
    remaining = np.full(r, len(cover) - int(in_cover[start_state]), dtype=np.int64)
    if wpos[start_state] >= 0:
        parents[:, wpos[start_state]] = PARENT_ROOT
    prev_core = states.copy()
    pending_inf = np.zeros(r, dtype=bool)
    act = np.nonzero(remaining > 0)[0]

    two = np.uint64(2)
    for _ in range(max_rounds):
        if act.size == 0:
            return parents, window
        u = uniforms(keys[act], t[act] * two)
        nxt = advance_states(kernel, states[act], u)
        states[act] = nxt
        t[act] += np.uint64(1)

        shell = nxt >= kernel.n_core
        if shell.any():
            pending_inf[act[shell]] = True
        core_rows = act[~shell]
        if core_rows.size:
            cs = nxt[~shell]
            fresh = ~visited[core_rows, cs]
            if fresh.any():
                fr, fs = core_rows[fresh], cs[fresh]
                visited[fr, fs] = True
                remaining[fr] -= in_cover[fs]
                w = wpos[fs]
                has_w = w >= 0
                if has_w.any():
                    rows, cols = fr[has_w], w[has_w]
                    val = np.where(pending_inf[rows], PARENT_VIA_INFINITY,
                                   prev_core[rows])
                    parents[rows, cols] = val
            pending_inf[core_rows] = False
            prev_core[core_rows] = cs
        done = remaining[act] == 0
        if done.any():
            act = act[~done]
    raise BudgetError(f"{act.size} replicas did not finish covering "
                      f"after {max_rounds} rounds", partial=parents)


def batch_visit_counts(kernel: LevelChainKernel, start_key: int,
                       absorb_keys: Iterable[int], count_keys: Iterable[int],
                       n_replicas: int, seed: int, max_rounds: int = 1_000_000,
                       stream_offset: int = 0) -> np.ndarray:
    """Visits to each count vertex strictly before absorption, per replica."""
    absorb = sorted(set(int(k) for k in absorb_keys))
    count = sorted(set(int(k) for k in count_keys))
    core = kernel.core_key_set()
    if not set(absorb) <= core or not set(count) <= core:
        raise ValueError("absorb and count vertices must lie in the level core")
    is_abs = np.zeros(kernel.n_states, dtype=bool)
    for k in absorb:
        is_abs[kernel.state_of(k)] = True
    cpos = np.full(kernel.n_states, -1, dtype=np.int64)
    for j, k in enumerate(count):
        cpos[kernel.state_of(k)] = j

    r = int(n_replicas)
    keys = _stream_keys(seed, r, stream_offset)
    states = np.full(r, kernel.state_of(int(start_key)), dtype=np.int64)
    t = np.zeros(r, dtype=np.uint64)
    counts = np.zeros((r, len(count)), dtype=np.int64)
    act = np.arange(r)
    if is_abs[states[0]]:
        return counts
    j0 = cpos[states[0]]
    if j0 >= 0:
        counts[:, j0] += 1

    two = np.uint64(2)
    for _ in range(max_rounds):
        u = uniforms(keys[act], t[act] * two)
        nxt = advance_states(kernel, states[act], u)
        states[act] = nxt
        t[act] += np.uint64(1)
        absorbed = is_abs[nxt]
        live = ~absorbed
        rows = act[live]
        if rows.size:
            c = cpos[nxt[live]]
            has = c >= 0
            if has.any():
                np.add.at(counts, (rows[has], c[has]), 1)
        act = rows
        if act.size == 0:
            return counts
    raise BudgetError(f"{act.size} replicas unabsorbed after {max_rounds} rounds",
                      partial=counts)


@dataclass(frozen=True)
class ConsistencyReport:
    """How far the level-n chain watched on the level-m state space is
    from the level-m chain itself."""

    level_m: int
    level_n: int
    hm_truncation: int
    core_deviation: float
    shell_deviation: float

    @property
    def deviation(self) -> float:
        return max(self.core_deviation, self.shell_deviation)

    def passed(self, tol: float = 1e-6) -> bool:
        return self.deviation <= tol


def consistency_check(oracle: GraphOracle, exhaustion: Exhaustion, m: int, n: int,
                      tol: float = 1e-6, hm_level: int | None = None) -> ConsistencyReport:
    """Compare the level-m kernel with the level-n chain watched on it.

    Both kernels are built with shell rows from one common truncation
    (default n + 2) so the comparison isolates the watching identity.
    The watched chain's shell rows are computed exactly: the level-n
    chain is absorbed on the level-m vertex set by linear algebra, and
    its first-hit law from each level-m shell vertex is read off.
    """
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    common = hm_level if hm_level is not None else n + 2
    k_m = build_kernel(oracle, exhaustion, m, hm_level=common)
    if m == n:
        return ConsistencyReport(m, n, common, 0.0, 0.0)
    k_n = build_kernel(oracle, exhaustion, n, hm_level=common)

    core_n = k_n.core_key_set()
    missing = [int(k) for k in k_m.state_keys if int(k) not in core_n]
    if missing:
        raise GraphConsistencyError(
            f"level-{m} states {missing[:4]} outside the level-{n} core; "
            "increase n")

    p_n = k_n.transition_matrix()
    m_states_in_n = np.array([k_n.state_of(int(k)) for k in k_m.state_keys])

    # Core rows: one step of either chain is the plain walk step.
    core_dev = 0.0
    p_m = k_m.transition_matrix()
    key_to_mstate = {int(k): i for i, k in enumerate(k_m.state_keys)}
    for i in range(k_m.n_core):
        sn = m_states_in_n[i]
        row_n = p_n[sn]
        row_m_in_n = np.zeros(k_n.n_states)
        for j, pr in enumerate(p_m[i]):
            if pr:
                row_m_in_n[k_n.state_of(int(k_m.state_keys[j]))] = pr
        core_dev = max(core_dev, float(np.abs(row_n - row_m_in_n).max()))

    # Shell rows: absorb the level-n chain on the level-m vertex set and
    # compare its first-hit law with the level-m shell kernel.
    absorb = np.zeros(k_n.n_states, dtype=bool)
    absorb[m_states_in_n[: k_m.n_core]] = True
    trans = np.nonzero(~absorb)[0]
    absd = np.nonzero(absorb)[0]
    q = p_n[np.ix_(trans, absd)]
    h = np.linalg.solve(np.eye(trans.size) - p_n[np.ix_(trans, trans)], q)
    tpos = {int(s): i for i, s in enumerate(trans)}
    apos = {int(s): j for j, s in enumerate(absd)}

    shell_dev = 0.0
    for j in range(k_m.n_shell):
        ms = k_m.n_core + j
        sn = int(m_states_in_n[ms])
        induced = np.zeros(k_m.n_core)
        for i in range(k_m.n_core):
            induced[i] = h[tpos[sn], apos[int(m_states_in_n[i])]]
        shell_dev = max(shell_dev, float(
            np.abs(induced - k_m.level_graph.shell_kernel[j]).max()))

    report = ConsistencyReport(m, n, common, core_dev, shell_dev)
    return report


def expected_excursion_time(kernel: LevelChainKernel, rate: RateSchedule,
                            start_key: int) -> float:
    """Exact expected return time to `start_key` in continuous time.

    Computed by one linear solve on the level chain: holding times are
    exponential with the schedule's rates at core states and zero at
    shell states (a pass is instantaneous).
    """
    s = kernel.state_of(int(start_key))
    if kernel.is_shell_state(s):
        raise ValueError("start must be a core vertex")
    p = kernel.transition_matrix()
    m = kernel.mean_holding(rate)
    others = np.array([i for i in range(kernel.n_states) if i != s])
    a = np.eye(others.size) - p[np.ix_(others, others)]
    k = np.linalg.solve(a, m[others])
    return float(m[s] + p[s, others] @ k)


@dataclass(frozen=True)
class ScheduleReport:
    """Expected return times across levels under one rate schedule.

    Shrinking increments indicate the schedule grows fast enough for the
    continuous-time chain to stay finite in the limit.
    """

    levels: tuple
    return_times: np.ndarray
    increments: np.ndarray

    @property
    def converging(self) -> bool:
        if len(self.increments) < 2:
            return False
        tail = np.abs(self.increments[-2:])
        return bool(tail[1] < tail[0])


def schedule_report(oracle: GraphOracle, exhaustion: Exhaustion,
                    rate: RateSchedule, levels: Iterable[int],
                    start_key: int | None = None,
                    hm_tol: float = 1e-8) -> ScheduleReport:
    levels = tuple(sorted(set(int(n) for n in levels)))
    start = oracle.root if start_key is None else int(start_key)
    times = []
    for n in levels:
        kern = build_kernel(oracle, exhaustion, n, hm_tol=hm_tol)
        times.append(expected_excursion_time(kern, rate, start))
    times = np.array(times)
    return ScheduleReport(levels=levels, return_times=times,
                          increments=np.diff(times))
