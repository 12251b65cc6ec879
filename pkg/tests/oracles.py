"""Slow reference implementations the tests check the library against.

Everything here works directly from definitions with dense numpy or
brute-force enumeration, sharing no code path with the library, so a
defect inside the library's sparse or incremental routines cannot hide
in its own mirror image.
"""

import itertools

import numpy as np


def dense_laplacian(n, edges):
    """Weighted graph Laplacian as a dense array. edges: (u, v, c) triples."""
    lap = np.zeros((n, n))
    for u, v, c in edges:
        lap[u, u] += c
        lap[v, v] += c
        lap[u, v] -= c
        lap[v, u] -= c
    return lap


def dense_free_dirichlet(n, edges, boundary):
    """Solve the Dirichlet problem on the listed vertices by one dense solve.

    `boundary` maps vertex to value. Rows of missing vertices simply do
    not exist: a vertex only balances against the neighbors the edge
    list retains, which is the free boundary condition.
    """
    lap = dense_laplacian(n, edges)
    fixed = sorted(boundary)
    free = [i for i in range(n) if i not in boundary]
    out = np.zeros(n)
    for k, val in boundary.items():
        out[k] = val
    if free:
        rhs = -lap[np.ix_(free, fixed)] @ np.array([boundary[k] for k in fixed])
        out[free] = np.linalg.solve(lap[np.ix_(free, free)], rhs)
    return out


def spanning_tree_weights(n, edges):
    """Every spanning tree of the graph, by brute force.

    Returns {frozenset of (u, v) pairs: product of conductances} over
    all edge subsets of size n - 1 that connect without a cycle.
    """
    out = {}
    for combo in itertools.combinations(range(len(edges)), n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for e in combo:
            u, v, _ = edges[e]
            ru, rv = find(int(u)), find(int(v))
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if not ok:
            continue
        pairs = frozenset((min(int(edges[e][0]), int(edges[e][1])),
                           max(int(edges[e][0]), int(edges[e][1]))) for e in combo)
        out[pairs] = float(np.prod([edges[e][2] for e in combo]))
    return out


def dense_green(n, edges, absorbing):
    """Green's function of the walk on the listed vertices killed on a set.

    G(x, y) is the expected number of visits to y before absorption,
    computed as pi(y) times the inverse of the Laplacian restricted to
    the surviving vertices. Absorbed rows and columns are zero.
    """
    lap = dense_laplacian(n, edges)
    pi = np.diag(lap).copy()
    alive = [i for i in range(n) if i not in set(absorbing)]
    inv = np.linalg.inv(lap[np.ix_(alive, alive)])
    out = np.zeros((n, n))
    for a, x in enumerate(alive):
        for b, y in enumerate(alive):
            out[x, y] = inv[a, b] * pi[y]
    return out


def absorption_law(transition, start, targets):
    """Exact first-hit law of a finite Markov chain by linear algebra.

    `transition` is a dense stochastic matrix; the law of the first
    visited target starting from `start` comes from one solve of the
    absorbed system.
    """
    targets = sorted(targets)
    t_set = set(targets)
    if start in t_set:
        return np.array([1.0 if t == start else 0.0 for t in targets])
    alive = [i for i in range(transition.shape[0]) if i not in t_set]
    q = transition[np.ix_(alive, alive)]
    r = transition[np.ix_(alive, targets)]
    law = np.linalg.solve(np.eye(len(alive)) - q, r)
    return law[alive.index(start)]


def chi_square_pvalue(counts, probs):
    """Pearson goodness-of-fit p-value with cells pooled below expectation 5."""
    from scipy import stats

    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(probs, dtype=float) * counts.sum()
    order = np.argsort(expected)
    merged_c, merged_e = [], []
    acc_c = acc_e = 0.0
    for i in order:
        acc_c += counts[i]
        acc_e += expected[i]
        if acc_e >= 5:
            merged_c.append(acc_c)
            merged_e.append(acc_e)
            acc_c = acc_e = 0.0
    if acc_e > 0 and merged_e:
        merged_c[-1] += acc_c
        merged_e[-1] += acc_e
    if len(merged_e) < 2:
        return 1.0
    stat = float(np.sum((np.array(merged_c) - np.array(merged_e)) ** 2
                        / np.array(merged_e)))
    return float(stats.chi2.sf(stat, len(merged_e) - 1))
