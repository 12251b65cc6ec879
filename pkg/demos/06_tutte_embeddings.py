"""
Tutte embeddings, from wheels to maps with infinite ends
========================================================

A planar map with every boundary vertex pinned to a convex polygon and
every interior vertex at the average of its neighbors has no crossing
edges and only convex faces.  For an infinite map the boundary circle
positions come from harmonic measure seen from far away, so each end
of the map condenses to a limit point on the circle.
"""

import math

import freewalk as fw
from freewalk.graphs import end_prefix

# A finite wheel: 8 rim vertices around a hub.
emb = fw.tutte_embed(fw.wheel_map(8))
rim = list(emb.boundary_keys)
hub = next(k for k in emb.pmap.vertex_keys if k not in emb.boundary_keys)
print("wheel W_8:")
hx, hy = (round(c, 12) + 0.0 for c in emb.pos(hub))
print(f"  hub at ({hx:+.6f}, {hy:+.6f})")
radii = [math.hypot(*emb.pos(v)) for v in rim]
print(f"  rim radii: min {min(radii):.6f}, max {max(radii):.6f}")
conv = fw.face_convexity(emb)
print(f"  worst face-convexity violation: {conv.max_violation:.2e}")

# Scalable vector output, deterministic bytes.
svg = fw.export_svg(emb)
print(f"  SVG: {len(svg)} characters, "
      f"{svg.count('<circle')} vertices, {svg.count('<line')} edges")

# A one-ended infinite map: ring upon ring of a tree glued into a
# triangulated cylinder that narrows geometrically.  Truncations give
# growing finite submaps.
mo = fw.ring_tree_map()
for n in (1, 2):
    sub = mo.submap(n)
    print(f"\nring tree submap at level {n}: {sub.n_vertices} vertices, "
          f"{sub.n_edges} edges, {len(sub.faces())} faces")

# Embed it.  The tree has many ends; each end occupies an arc of the
# boundary circle, and refining the end prefix shrinks the arc.
emb2 = fw.tutte_embed(mo)
anchor = sorted(mo.exhaustion.vertices(3))[-1]
p1 = end_prefix(mo.oracle, mo.exhaustion, anchor, 1)
p2 = end_prefix(mo.oracle, mo.exhaustion, anchor, 2)
img1 = fw.end_image(mo, emb2, p1)
img2 = fw.end_image(mo, emb2, p2)
print(f"\nend prefix at level 1 maps into an arc of diameter "
      f"{img1.diameter:.6f}")
print(f"refined to level 2 the arc shrinks to {img2.diameter:.6f}")
print(f"p2 refines p1: {p2.refines(p1)}")

# A single-ended map: a half-infinite triangulated cylinder whose
# rings narrow geometrically.  Its one end condenses to a single
# limit point, so refining the prefix pinches the arc toward zero.
cyl = fw.cylinder_map()
cemb = fw.tutte_embed(cyl, tol=1e-4)
anchor = int(cyl.exhaustion.vertices(4)[-1])
diams = [fw.end_image(cyl, cemb,
                      end_prefix(cyl.oracle, cyl.exhaustion, anchor, n)
                      ).diameter
         for n in (1, 2, 3)]
print("\ncylinder end, arc diameter by prefix depth: "
      + ", ".join(f"{d:.5f}" for d in diams))
