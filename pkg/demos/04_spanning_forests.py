"""
Sampling spanning forests, with and without escapes
===================================================

Two samplers produce the uniform (weighted) spanning tree of a finite
graph: loop-erased branches grown one vertex at a time, and the
first-entrance edges of a single covering walk.  Run on a level chain
of an infinite graph, the same loop-erased sampler yields forests:
a branch that slips through infinity and survives erasure starts a
separate component, attached to an end rather than to the root.
"""

import collections

import freewalk as fw

# Exact enumeration on a weighted triangle, as ground truth.
tri = fw.WeightedGraph(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])
dist = fw.enumerate_ust(tri)
# dist.trees holds index sets into dist.edges
print("triangle spanning trees (weight / probability):")
for tree, weight, p in zip(dist.trees, dist.weights, dist.probs):
    label = sorted(dist.edges[i] for i in tree)
    print(f"  {label}  {weight:.0f} / {p:.4f}")

# The loop-erased sampler reproduces that law.
o = fw.zoo_oracle("finite", graph=tri)
ex = fw.Exhaustion(o)
kern = fw.build_kernel(o, ex, ex.smallest_level_covering(range(tri.n)))
counts = collections.Counter()
summary = fw.wilson_batch(kern, 6000, seed=21, return_forests=True)
for forest in summary.forests:
    counts[dist.index_of(forest.edges)] += 1
print("\nsampled frequencies over 6000 runs:")
for i, (tree, p) in enumerate(zip(dist.trees, dist.probs)):
    label = sorted(dist.edges[j] for j in tree)
    print(f"  {label}  {counts[i] / 6000:.4f} (expect {p:.4f})")

# Single-edge marginals have a closed form through the Green matrix;
# the enumeration agrees to machine precision.
prob = fw.matrix_tree_edge_prob(tri, 1, 2)
print(f"\nedge (1,2) marginal: {prob:.6f} (exact 8/11 = {8 / 11:.6f})")

# On the binary tree the level-3 chain is transient but loop erasure
# swallows every pass: re-entry lands exactly where the walker left,
# so the sampled object is the full spanning tree of the ball.
oracle = fw.zoo_oracle("binary_tree")
ex = fw.Exhaustion(oracle)
tree_kernel = fw.build_kernel(oracle, ex, 3)
ws = fw.wilson_batch(tree_kernel, 50, seed=4, return_forests=True)
print(f"\nbinary tree level 3: escape frequency {ws.escape_frequency:.3f}, "
      f"every forest connected: "
      f"{all(f.is_connected for f in ws.forests)}")

# On Z^3 the re-entry law is spread out, erasure can miss a pass, and
# forests with several components appear.
cube = fw.zoo_oracle("lattice_zd", d=3)
cex = fw.Exhaustion(cube)
cube_kernel = fw.build_kernel(cube, cex, 2, hm_level=5)
cs = fw.wilson_batch(cube_kernel, 400, seed=4, return_forests=True)
split = [f for f in cs.forests if not f.is_connected]
print(f"Z^3 level 2: escape frequency {cs.escape_frequency:.3f}, "
      f"{len(split)} of 400 forests have a component hanging off an end")
f = split[0]
print(f"  example: {f.n_components} components, "
      f"escaped branch count {f.n_escaped}")

# The covering-walk sampler agrees with the loop-erased one on the
# window marginal it is designed for: the edges each sample keeps
# inside the level-2 ball.
ab = fw.aldous_broder_window(tree_kernel, start_key=1, window_level=2,
                             cover_level=3, seed=9, n_replicas=20)
window = {int(k) for k in ex.vertices(2)}
spanning = all(
    {v for e in f.edges for v in e if v in window} == window for f in ab)
print(f"\ncovering-walk sampler, window level 2: {len(ab)} replicas, "
      f"every sample spans the window: {spanning}")
