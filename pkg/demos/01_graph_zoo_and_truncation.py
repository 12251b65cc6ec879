"""
Graph families, exhaustions, and free-boundary truncation
=========================================================

Every infinite graph in the package is served lazily by an oracle:
rows of the adjacency structure are fetched on demand and checked for
symmetry as they arrive.  An exhaustion organizes the vertices into
nested balls around the root, and truncating at level n keeps the ball
as-is (free boundary: absent neighbors are simply omitted, nothing is
killed).
"""

import freewalk as fw

# The built-in families.
print("families:", ", ".join(sorted(fw.ZOO_NAMES)))

# A 3-regular tree: the root has 3 children, everyone else has 2.
oracle = fw.zoo_oracle("regular_tree", b=3)
ex = fw.Exhaustion(oracle)
for level in range(1, 5):
    print(f"ball of radius {level}: {len(ex.vertices(level))} vertices")

# Truncation at level 2.  Core vertices keep their full stationary
# weight from the infinite graph; the induced subgraph sees less at the
# rim because rows lost their outward edges.
lg = fw.truncate(oracle, ex, 2)
print(f"\nlevel-2 truncation: {lg.n_core} core + {lg.n_shell} shell states")
# core_graph numbers its vertices by position in core_keys
for vid, key in enumerate(lg.core_keys):
    full = lg.pi_full[vid]
    free = lg.core_graph.pi[vid]
    tag = "rim" if free < full else "   "
    print(f"  vertex {key:3d}  pi_full={full:4.1f}  pi_free={free:4.1f}  {tag}")

# The same machinery works on Z^3.
cube = fw.zoo_oracle("lattice_zd", d=3)
cex = fw.Exhaustion(cube)
sizes = [len(cex.vertices(n)) for n in range(1, 4)]
print(f"\nZ^3 ball sizes: {sizes}")

# Beyond any finite ball the complement may split into several pieces,
# one per end of the graph.  A tree has many; Z^3 has one.
cc = fw.complement_components(oracle, ex, 2)
print(f"tree complement beyond level 2 splits into {len(cc.members)} pieces")
cc3 = fw.complement_components(cube, cex, 2)
print(f"Z^3 complement beyond level 2 is {len(cc3.members)} piece(s)")
