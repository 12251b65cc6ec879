"""Planar maps, boundary traces, and Tutte embeddings at infinity.

A planar map is a rotation system on half-edges: `twin` reverses a
half-edge, `next` is the successor counterclockwise around the origin
vertex, and faces are the orbits of h -> prev(twin(h)), which turns as
far clockwise as possible at each step. With counterclockwise rotations
an internal face's orbit runs counterclockwise (positive signed area in
any straight-line drawing) and the external face's orbit runs
clockwise.

The embedding drawn here places the external face on the unit circle,
spacing boundary vertices by the harmonic measure seen from a marked
interior vertex, and extends harmonically inside. On an infinite map
the interior solves use the free boundary convention and exhaust the
map level by level until positions settle, so ends of the map pinch
down to points of the closed disk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ConvergenceError, GraphConsistencyError
from .graphs import (
    ComplementComponents,
    EndPrefix,
    Exhaustion,
    GraphOracle,
    WeightedGraph,
    complement_components,
)
from .harmonic import solve_free_dirichlet

__all__ = [
    "PlanarMap",
    "MapOracle",
    "boundary_trace",
    "Embedding",
    "tutte_embed",
    "ConvexityReport",
    "face_convexity",
    "EndImage",
    "end_image",
    "export_svg",
    "wheel_map",
    "grid_map",
    "pendant_map",
    "ring_tree_map",
    "cylinder_map",
]


class PlanarMap:
    """Finite planar map with conductances, as a half-edge rotation system.

    Half-edge 2i runs along edge i from its first endpoint, 2i + 1 back.
    `next_he[h]` is the next half-edge counterclockwise around the
    origin of h. Construction validates that the face orbits close up to
    a sphere: V - E + F must equal 2.
    """

    def __init__(self, origins: Sequence[int], twins: Sequence[int],
                 next_he: Sequence[int], conductances: Sequence[float],
                 external_half_edge: int,
                 marks: Mapping[str, int] | None = None,
                 layout: Mapping[int, tuple] | None = None):
        self.origin = np.asarray(origins, dtype=np.int64)
        self.twin = np.asarray(twins, dtype=np.int64)
        self.next_he = np.asarray(next_he, dtype=np.int64)
        self.conductance = np.asarray(conductances, dtype=np.float64)
        self.marks = dict(marks or {})
        self.layout = dict(layout) if layout else None
        h = len(self.origin)
        if h % 2 or h == 0:
            raise GraphConsistencyError("need a positive even number of half-edges")
        if not (len(self.twin) == len(self.next_he) == len(self.conductance) == h):
            raise GraphConsistencyError("half-edge arrays must share one length")
        if np.any(self.twin[self.twin] != np.arange(h)) or np.any(self.twin == np.arange(h)):
            raise GraphConsistencyError("twin must be a fixed-point-free involution")
        if sorted(self.next_he) != list(range(h)):
            raise GraphConsistencyError("next must be a permutation of the half-edges")
        if np.any(self.origin[self.next_he] != self.origin):
            raise GraphConsistencyError("next must preserve the origin vertex")
        if np.any(self.conductance <= 0) or not np.all(np.isfinite(self.conductance)):
            raise GraphConsistencyError("conductances must be positive and finite")
        if np.any(self.conductance != self.conductance[self.twin]):
            raise GraphConsistencyError("twin half-edges must share a conductance")
        self.prev_he = np.empty_like(self.next_he)
        self.prev_he[self.next_he] = np.arange(h)

        self.vertex_keys = tuple(sorted(set(int(v) for v in self.origin)))
        self._faces = self._orbits()
        self._face_of = np.zeros(h, dtype=np.int64)
        for fi, orbit in enumerate(self._faces):
            for he in orbit:
                self._face_of[he] = fi
        v = len(self.vertex_keys)
        e = h // 2
        f = len(self._faces)
        if v - e + f != 2:
            raise GraphConsistencyError(
                f"rotation system is not planar: V - E + F = {v} - {e} + {f} != 2")
        ext = int(external_half_edge)
        if not 0 <= ext < h:
            raise GraphConsistencyError("external half-edge out of range")
        self.external_face = int(self._face_of[ext])

    def _orbits(self) -> tuple:
        h = len(self.origin)
        seen = np.zeros(h, dtype=bool)
        orbits = []
        for start in range(h):
            if seen[start]:
                continue
            orbit = []
            cur = start
            while not seen[cur]:
                seen[cur] = True
                orbit.append(cur)
                cur = int(self.prev_he[self.twin[cur]])
            if cur != start:
                raise GraphConsistencyError("face orbit does not close")
            orbits.append(tuple(orbit))
        return tuple(orbits)

    @property
    def n_half_edges(self) -> int:
        return len(self.origin)

    @property
    def n_edges(self) -> int:
        return len(self.origin) // 2

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_keys)

    def faces(self) -> tuple:
        return self._faces

    def internal_faces(self) -> list[int]:
        return [i for i in range(len(self._faces)) if i != self.external_face]

    def face_vertices(self, face_index: int) -> list[int]:
        return [int(self.origin[he]) for he in self._faces[face_index]]

    def head(self, he: int) -> int:
        return int(self.origin[self.twin[he]])

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for he in range(0, self.n_half_edges, 2):
            u, v = int(self.origin[he]), self.head(he)
            out.append((min(u, v), max(u, v), float(self.conductance[he])))
        return out

    def graph(self) -> tuple[WeightedGraph, dict]:
        """Underlying weighted graph with dense ids; returns (graph, key_to_id)."""
        ids = {k: i for i, k in enumerate(self.vertex_keys)}
        edges = [(ids[u], ids[v], c) for u, v, c in self.edges()]
        return WeightedGraph(len(ids), edges), ids

    def to_json(self) -> dict:
        return {
            "origin": [int(v) for v in self.origin],
            "twin": [int(v) for v in self.twin],
            "next": [int(v) for v in self.next_he],
            "conductance": [float(c) for c in self.conductance],
            "external_half_edge": int(self._faces[self.external_face][0]),
            "marks": {k: int(v) for k, v in self.marks.items()},
        }

    @classmethod
    def from_json(cls, source) -> "PlanarMap":
        if isinstance(source, (str, Path)) and Path(str(source)).exists():
            data = json.loads(Path(source).read_text())
        elif isinstance(source, str):
            data = json.loads(source)
        else:
            data = source
        return cls(data["origin"], data["twin"], data["next"], data["conductance"],
                   data["external_half_edge"], marks=data.get("marks"))

    @classmethod
    def from_embedding(cls, positions: Mapping[int, tuple],
                       edges: Iterable[tuple[int, int, float]],
                       marks: Mapping[str, int] | None = None) -> "PlanarMap":
        """Build the rotation system of a straight-line drawing.

        Neighbors are sorted counterclockwise by angle at each vertex and
        the external face is recognized as the unique orbit of negative
        signed area. The drawing must be crossing-free; a crossing shows
        up as a failed Euler count.
        """
        edges = [(int(u), int(v), float(c)) for u, v, c in edges]
        origins = []
        twins = []
        conduct = []
        for i, (u, v, c) in enumerate(edges):
            if u == v:
                raise GraphConsistencyError("maps here have no loops")
            origins += [u, v]
            twins += [2 * i + 1, 2 * i]
            conduct += [c, c]
        by_vertex: dict[int, list[int]] = {}
        for he, o in enumerate(origins):
            by_vertex.setdefault(o, []).append(he)
        next_he = [0] * len(origins)
        for v, hes in by_vertex.items():
            px, py = positions[v]

            def angle(he):
                hx, hy = positions[origins[2 * (he // 2) + (1 - he % 2)]]
                return math.atan2(hy - py, hx - px)

            hes_sorted = sorted(hes, key=angle)
            for a, b in zip(hes_sorted, hes_sorted[1:] + hes_sorted[:1]):
                next_he[a] = b

        # Identify the external face by signed area before constructing.
        prev_he = [0] * len(origins)
        for a, b in enumerate(next_he):
            prev_he[b] = a

        def orbit_area(start):
            area = 0.0
            cur = start
            while True:
                x1, y1 = positions[origins[cur]]
                x2, y2 = positions[origins[twins[cur]]]
                area += x1 * y2 - x2 * y1
                cur = prev_he[twins[cur]]
                if cur == start:
                    return area / 2.0

        seen = set()
        negatives = []
        for start in range(len(origins)):
            if start in seen:
                continue
            cur = start
            while cur not in seen:
                seen.add(cur)
                cur = prev_he[twins[cur]]
            a = orbit_area(start)
            if a < 0:
                negatives.append((start, a))
        if len(negatives) != 1:
            raise GraphConsistencyError(
                f"expected exactly one clockwise face, found {len(negatives)}; "
                "the drawing is crossed or disconnected")
        return cls(origins, twins, next_he, conduct, negatives[0][0],
                   marks=marks, layout=positions)

    def __repr__(self) -> str:
        return (f"PlanarMap(V={self.n_vertices}, E={self.n_edges}, "
                f"F={len(self._faces)})")


@dataclass(frozen=True)
class MapOracle:
    """Infinite planar map presented by its finite submaps.

    `submap(n)` returns the level-n truncation as a PlanarMap whose
    frontier holes are finite faces; every level shares the same
    external face vertices and marks. `oracle`/`exhaustion` expose the
    underlying weighted graph with level sets matching the submaps.
    """

    name: str
    oracle: GraphOracle
    exhaustion: Exhaustion
    submap_fn: Callable[[int], PlanarMap]
    marks: dict
    params: dict
    _cache: dict = field(default_factory=dict, repr=False)

    def submap(self, n: int) -> PlanarMap:
        if n not in self._cache:
            self._cache[n] = self.submap_fn(n)
        return self._cache[n]

    def boundary_keys(self) -> list[int]:
        return boundary_trace(self.submap(1))


def boundary_trace(pmap: PlanarMap) -> list[int]:
    """Boundary vertices counterclockwise, deduplicated, ending at the mark.

    Walks the external face orbit against its own (clockwise) direction,
    keeps the last visit of each vertex, and rotates the result so the
    marked boundary vertex comes last. Needs the `y_hat` mark on the
    external face.
    """
    y_hat = pmap.marks.get("y_hat")
    if y_hat is None:
        raise ValueError("map has no y_hat mark")
    orbit = pmap.faces()[pmap.external_face]
    walk = [int(pmap.origin[he]) for he in orbit][::-1]
    if y_hat not in walk:
        raise ValueError(f"y_hat mark {y_hat} is not on the external face")
    # Rotate the cyclic walk to end at an occurrence of y_hat.
    cut = max(i for i, v in enumerate(walk) if v == y_hat)
    walk = walk[cut + 1:] + walk[: cut + 1]
    last = {v: i for i, v in enumerate(walk)}
    return [v for i, v in enumerate(walk) if last[v] == i]


@dataclass(frozen=True)
class Embedding:
    """Positions in the closed unit disk realizing a Tutte drawing.

    Boundary vertices sit on the circle at angles given by cumulative
    harmonic measure from the marked interior vertex; those cumulative
    sums are stored so the measure can be reconstructed exactly from the
    angles. Interior positions are the free-boundary harmonic extension
    of the boundary positions at the final exhaustion level.
    """

    pmap: PlanarMap
    positions: dict
    boundary_keys: tuple
    boundary_measure: np.ndarray
    cumulative_measure: np.ndarray
    levels_used: tuple
    achieved_tol: float

    def pos(self, key: int) -> tuple[float, float]:
        z = self.positions[int(key)]
        return (float(z.real), float(z.imag))

    def measure_from_angles(self) -> np.ndarray:
        """Recover the boundary measure from the stored cumulative sums."""
        return np.diff(np.concatenate([[0.0], self.cumulative_measure]))


def _tutte_positions(graph: WeightedGraph, ids: Mapping[int, int],
                     boundary: Sequence[int], x_hat: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve one Tutte drawing on a finite graph; returns (z, measure, cum)."""
    m = len(boundary)
    eye = np.eye(m)
    bnd_idx = {ids[int(b)]: eye[j] for j, b in enumerate(boundary)}
    hm = solve_free_dirichlet(graph, bnd_idx)
    row = np.asarray(hm)[ids[int(x_hat)]]
    total = row.sum()
    if not 0.999999 <= total <= 1.000001:
        raise GraphConsistencyError(f"harmonic measure row sums to {total}")
    cum = np.cumsum(row)
    cum[-1] = total
    angles = 2.0 * np.pi * cum / total
    z_bnd = np.exp(1j * angles)
    bx = {int(b): float(z_bnd[j].real) for j, b in enumerate(boundary)}
    by = {int(b): float(z_bnd[j].imag) for j, b in enumerate(boundary)}
    fx = solve_free_dirichlet(graph, {ids[k]: v for k, v in bx.items()})
    fy = solve_free_dirichlet(graph, {ids[k]: v for k, v in by.items()})
    return fx + 1j * fy, row, cum


def tutte_embed(target, tol: float = 1e-6, n_max: int = 30,
                stride: int = 1) -> Embedding:
    """Tutte embedding with the external face on the unit circle.

    `target` is a finite PlanarMap or a MapOracle. Boundary vertices are
    spaced by harmonic measure seen from the marked interior vertex
    `x_hat` (computed with free boundary on infinite maps), then the
    interior is extended harmonically. Infinite maps escalate submap
    levels until every level-1 position moves less than `tol`. Errors:
    fewer than three boundary vertices, or `x_hat` missing or on the
    boundary.
    """
    if isinstance(target, PlanarMap):
        boundary = boundary_trace(target)
        x_hat = target.marks.get("x_hat")
        if x_hat is None:
            raise ValueError("map has no x_hat mark")
        if len(boundary) < 3:
            raise ValueError(f"boundary has {len(boundary)} vertices; need at least 3")
        if x_hat in set(boundary):
            raise ValueError("x_hat must be an interior vertex")
        graph, ids = target.graph()
        z, row, cum = _tutte_positions(graph, ids, boundary, x_hat)
        positions = {int(k): complex(z[ids[int(k)]]) for k in target.vertex_keys}
        return Embedding(
            pmap=target,
            positions=positions,
            boundary_keys=tuple(boundary),
            boundary_measure=row,
            cumulative_measure=cum,
            levels_used=(1, 1),
            achieved_tol=0.0,
        )

    if not isinstance(target, MapOracle):
        raise TypeError("target must be a PlanarMap or MapOracle")
    first = target.submap(1)
    boundary = boundary_trace(first)
    x_hat = first.marks.get("x_hat")
    if x_hat is None:
        raise ValueError("map has no x_hat mark")
    if len(boundary) < 3:
        raise ValueError(f"boundary has {len(boundary)} vertices; need at least 3")
    if x_hat in set(boundary):
        raise ValueError("x_hat must be an interior vertex")
    window = [int(k) for k in first.vertex_keys]

    prev = None
    prev_n = None
    diff = np.inf
    for n in range(1, n_max + 1, stride):
        pm = target.submap(n)
        graph, ids = pm.graph()
        z, row, cum = _tutte_positions(graph, ids, boundary, x_hat)
        w_vals = np.array([z[ids[k]] for k in window])
        if prev is not None:
            diff = float(np.abs(w_vals - prev).max())
            if diff <= tol:
                positions = {int(k): complex(z[ids[int(k)]]) for k in pm.vertex_keys}
                return Embedding(
                    pmap=pm,
                    positions=positions,
                    boundary_keys=tuple(boundary),
                    boundary_measure=row,
                    cumulative_measure=cum,
                    levels_used=(prev_n, n),
                    achieved_tol=diff,
                )
        prev, prev_n = w_vals, n
    raise ConvergenceError(
        f"embedding window still moving by {diff:.3e} at level cap {n_max}",
        achieved=diff)


@dataclass(frozen=True)
class ConvexityReport:
    """Worst inward dent of each internal face of a drawing.

    Internal face orbits run counterclockwise, so every cross product of
    consecutive edge vectors should be nonnegative; the violation is how
    negative the worst one gets. Degenerate faces (repeated vertices,
    collinear corners) contribute zero, not a violation.
    """

    face_violations: tuple
    max_violation: float
    worst_face: int

    def ok(self, tol: float = 1e-9) -> bool:
        return self.max_violation <= tol


def face_convexity(embedding: Embedding) -> ConvexityReport:
    pmap = embedding.pmap
    violations = []
    for fi in pmap.internal_faces():
        verts = pmap.face_vertices(fi)
        pts = [embedding.positions[v] for v in verts]
        k = len(pts)
        worst = 0.0
        for i in range(k):
            a, b, c = pts[i], pts[(i + 1) % k], pts[(i + 2) % k]
            u = b - a
            w = c - b
            cross = u.real * w.imag - u.imag * w.real
            worst = max(worst, -cross)
        violations.append((fi, worst))
    if not violations:
        return ConvexityReport(face_violations=(), max_violation=0.0, worst_face=-1)
    worst_face, max_v = max(violations, key=lambda t: t[1])
    return ConvexityReport(
        face_violations=tuple(violations),
        max_violation=float(max_v),
        worst_face=int(worst_face),
    )


@dataclass(frozen=True)
class EndImage:
    """Image of one end of the map inside the disk, at a finite resolution.

    `polygons` are the drawn faces lying entirely inside the end's
    complement component; `diameter` is the largest distance between any
    two of their corners. Deeper prefixes of a genuine end give nested
    images with shrinking diameters.
    """

    prefix: EndPrefix
    polygons: tuple
    diameter: float
    n_faces: int


def end_image(map_oracle: MapOracle, embedding: Embedding,
              prefix: EndPrefix) -> EndImage:
    """Faces of the embedding inside the end's component at the prefix level."""
    n = prefix.level
    probe = max(2 * n, embedding.levels_used[1])
    cc = complement_components(map_oracle.oracle, map_oracle.exhaustion, n, probe)
    cid = prefix.ids[-1]
    if cid not in cc.members:
        raise ValueError(f"no component with id {cid} at level {n}")
    inside = cc.members[cid]
    pmap = embedding.pmap
    polys = []
    corners = []
    for fi in pmap.internal_faces():
        verts = pmap.face_vertices(fi)
        if all(v in inside for v in verts):
            poly = tuple(embedding.pos(v) for v in verts)
            polys.append(poly)
            corners.extend(embedding.positions[v] for v in verts)
    diam = 0.0
    if corners:
        arr = np.array(corners)
        diam = float(np.abs(arr[:, None] - arr[None, :]).max())
    return EndImage(prefix=prefix, polygons=tuple(polys),
                    diameter=diam, n_faces=len(polys))


_SVG_STYLE = (
    "  <style>line{stroke:#23436b;stroke-width:0.006;}"
    "circle.v{fill:#d1495b;}circle.b{fill:#23436b;}"
    "circle.disk{fill:none;stroke:#bbbbbb;stroke-width:0.004;}</style>\n"
)


def export_svg(embedding: Embedding, path: str | Path | None = None,
               size: int = 640) -> str:
    """Render the embedding as a byte-stable SVG string (optionally saved).

    Elements appear in a fixed order (disk, edges sorted by endpoint
    keys, interior vertices, then boundary vertices) with coordinates
    printed to six decimals, so identical embeddings always produce
    identical bytes.
    """
    pmap = embedding.pmap

    def fmt(x: float) -> str:
        v = f"{x:.6f}"
        return "0.000000" if v == "-0.000000" else v

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        'viewBox="-1.1 -1.1 2.2 2.2">\n',
        _SVG_STYLE,
        '  <circle class="disk" cx="0" cy="0" r="1"/>\n',
    ]
    for u, v, _ in sorted(pmap.edges()):
        x1, y1 = embedding.pos(u)
        x2, y2 = embedding.pos(v)
        # SVG's y axis points down; flip so the drawing matches the math.
        lines.append(f'  <line x1="{fmt(x1)}" y1="{fmt(-y1)}" '
                     f'x2="{fmt(x2)}" y2="{fmt(-y2)}"/>\n')
    bset = set(embedding.boundary_keys)
    for k in sorted(pmap.vertex_keys):
        if k in bset:
            continue
        x, y = embedding.pos(k)
        lines.append(f'  <circle class="v" cx="{fmt(x)}" cy="{fmt(-y)}" r="0.015"/>\n')
    for k in embedding.boundary_keys:
        x, y = embedding.pos(k)
        lines.append(f'  <circle class="b" cx="{fmt(x)}" cy="{fmt(-y)}" r="0.02"/>\n')
    lines.append("</svg>\n")
    svg = "".join(lines)
    if path is not None:
        Path(path).write_bytes(svg.encode("ascii"))
    return svg


# ---------------------------------------------------------------------------
# Finite map zoo.


def wheel_map(m: int) -> PlanarMap:
    """Wheel with m rim vertices (keys 1..m counterclockwise) and hub 0."""
    if m < 3:
        raise ValueError("a wheel needs at least 3 rim vertices")
    pos = {0: (0.0, 0.0)}
    for k in range(1, m + 1):
        ang = 2 * math.pi * k / m
        pos[k] = (math.cos(ang), math.sin(ang))
    edges = [(0, k, 1.0) for k in range(1, m + 1)]
    edges += [(k, k % m + 1, 1.0) for k in range(1, m + 1)]
    return PlanarMap.from_embedding(pos, edges, marks={"x_hat": 0, "y_hat": m})


def grid_map(rows: int, cols: int) -> PlanarMap:
    """Grid with unit conductances; key of cell (i, j) is i * cols + j."""
    if rows < 2 or cols < 2:
        raise ValueError("grid needs at least 2 x 2 vertices")
    pos = {}
    edges = []
    for i in range(rows):
        for j in range(cols):
            pos[i * cols + j] = (float(j), float(rows - 1 - i))
            if j + 1 < cols:
                edges.append((i * cols + j, i * cols + j + 1, 1.0))
            if i + 1 < rows:
                edges.append((i * cols + j, (i + 1) * cols + j, 1.0))
    marks = {"x_hat": (rows // 2) * cols + cols // 2, "y_hat": 0}
    return PlanarMap.from_embedding(pos, edges, marks=marks)


def pendant_map() -> PlanarMap:
    """Square with hub, plus a pendant vertex hanging into the external face.

    The pendant's base is visited twice by the external face orbit, which
    is what the boundary trace's last-visit rule is for.
    """
    pos = {0: (0.0, 0.0), 1: (1.0, 0.0), 2: (1.0, 1.0), 3: (0.0, 1.0),
           4: (0.5, 0.5), 5: (-0.7, -0.3)}
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0),
             (0, 4, 1.0), (1, 4, 1.0), (2, 4, 1.0), (3, 4, 1.0),
             (0, 5, 1.0)]
    return PlanarMap.from_embedding(pos, edges, marks={"x_hat": 4, "y_hat": 1})


# ---------------------------------------------------------------------------
# Infinite map zoo: a two-ended-per-level tree of triangular pieces, and a
# one-ended cylinder.

_OUTER = [(math.cos(a), math.sin(a)) for a in
          (math.pi / 2, math.pi * 7 / 6, math.pi * 11 / 6)]
_HOLE_R = 0.18
_HOLE_CENTERS = ((-0.32, -0.04), (0.32, -0.04))


def _pants_template():
    """Nine template points and their triangulation, computed once.

    Points 0..2 are the outer triangle, 3..5 the left hole, 6..8 the
    right hole. The Delaunay triangulation of the nine points keeps both
    hole triangles as simplices (their circumcircles are empty), so the
    template's edge set triangulates the outer triangle with the two
    holes as faces.
    """
    from scipy.spatial import Delaunay

    pts = list(_OUTER)
    for cx, cy in _HOLE_CENTERS:
        for a in (math.pi / 2, math.pi * 7 / 6, math.pi * 11 / 6):
            pts.append((cx + _HOLE_R * math.cos(a), cy + _HOLE_R * math.sin(a)))
    arr = np.array(pts)
    tri = Delaunay(arr)
    simplices = {frozenset(int(i) for i in s) for s in tri.simplices}
    for hole in (frozenset({3, 4, 5}), frozenset({6, 7, 8})):
        if hole not in simplices:
            raise RuntimeError("template holes were triangulated away")
    edges = set()
    for s in simplices:
        a, b, c = sorted(s)
        edges.update({(a, b), (a, c), (b, c)})
    return arr, tuple(sorted(edges))


_TEMPLATE_PTS, _TEMPLATE_EDGES = None, None


def _template():
    global _TEMPLATE_PTS, _TEMPLATE_EDGES
    if _TEMPLATE_PTS is None:
        _TEMPLATE_PTS, _TEMPLATE_EDGES = _pants_template()
    return _TEMPLATE_PTS, _TEMPLATE_EDGES


def _hole_affine(hole: int) -> np.ndarray:
    """Homogeneous 3x3 map sending the outer triangle onto a hole triangle."""
    pts, _ = _template()
    src = np.vstack([pts[:3].T, np.ones(3)])
    dst_idx = (3, 4, 5) if hole == 0 else (6, 7, 8)
    dst = np.vstack([pts[list(dst_idx)].T, np.ones(3)])
    return dst @ np.linalg.inv(src)


# Vertex keys: path * 16 + point index, where path is 1 for the root piece
# and path * 2 + bit for the child glued into hole `bit`. A child's outer
# point is canonically the parent's hole point, so shared vertices have one
# key.


def _canonical(path: int, idx: int) -> tuple[int, int]:
    while idx < 3 and path > 1:
        bit = path & 1
        path >>= 1
        idx = (3, 4, 5)[idx] if bit == 0 else (6, 7, 8)[idx]
    return path, idx


def _rt_key(path: int, idx: int) -> int:
    path, idx = _canonical(path, idx)
    return path * 16 + idx


def _rt_depth(path: int) -> int:
    return path.bit_length() - 1


def ring_tree_map(lam: float = 4.0, name: str = "ring_tree") -> MapOracle:
    """Infinite binary tree of triangular pieces, one new end per hole.

    Each piece is an outer triangle triangulated around two triangular
    holes; a child piece is glued into each hole, sharing its vertices.
    Edges belonging to a depth-d piece carry conductance lam**d (a hole
    edge belongs to the shallower piece), so lam > 1 pushes the walk
    outward and makes the map transient with every end distinct.
    """
    lam = float(lam)
    if not (lam > 0 and np.isfinite(lam)):
        raise ValueError("lam must be positive and finite")
    pts, edges = _template()

    def frame(path: int) -> np.ndarray:
        f = np.eye(3)
        for bit in bin(path)[3:]:
            f = f @ _hole_affine(int(bit))
        return f

    def position(key: int) -> tuple[float, float]:
        path, idx = key // 16, key % 16
        p = frame(path) @ np.array([pts[idx][0], pts[idx][1], 1.0])
        return (float(p[0]), float(p[1]))

    adj: dict[int, list[int]] = {i: [] for i in range(9)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)

    def neighbors(key: int):
        path, idx = key // 16, key % 16
        roles = [(path, idx)]
        if idx >= 3:
            bit = 0 if idx < 6 else 1
            roles.append((path * 2 + bit, idx - 3 if idx < 6 else idx - 6))
        out: dict[int, float] = {}
        for q, j in roles:
            d = _rt_depth(q)
            for j2 in adj[j]:
                # A template edge between two outer points of a non-root
                # piece is the parent's hole edge, owned one level up.
                owner = d - 1 if (j < 3 and j2 < 3 and q > 1) else d
                nk = _rt_key(q, j2)
                c = lam**owner
                if nk in out and abs(out[nk] - c) > 1e-12 * c:
                    raise GraphConsistencyError("conflicting edge ownership")
                out[nk] = c
        return sorted(out.items())

    oracle = GraphOracle(_rt_key(1, 0), neighbors, name=name,
                         params={"lam": lam})

    def level_vertices(_oracle, n: int):
        keys = []
        for depth in range(n):
            for path in range(1 << depth, 2 << depth):
                for idx in range(9):
                    keys.append(_rt_key(path, idx))
        return keys

    exhaustion = Exhaustion(oracle, level_fn=level_vertices)

    def submap(n: int) -> PlanarMap:
        keys = set(int(k) for k in exhaustion.vertices(n))
        pos = {k: position(k) for k in keys}
        edge_list = []
        seen = set()
        for k in sorted(keys):
            for nk, c in neighbors(k):
                if nk in keys:
                    pair = (min(k, nk), max(k, nk))
                    if pair not in seen:
                        seen.add(pair)
                        edge_list.append((pair[0], pair[1], c))
        return PlanarMap.from_embedding(
            pos, edge_list,
            marks={"x_hat": _rt_key(1, 3), "y_hat": _rt_key(1, 0)})

    return MapOracle(name=name, oracle=oracle, exhaustion=exhaustion,
                     submap_fn=submap, marks={"x_hat": _rt_key(1, 3),
                                              "y_hat": _rt_key(1, 0)},
                     params={"lam": lam})


def cylinder_map(m: int = 6, lam: float = 2.0, name: str = "cylinder") -> MapOracle:
    """One-ended triangulated cylinder: m vertices per ring, rings inward.

    Ring k sits at radius 0.62**k; edges touching ring k carry
    conductance lam**k, so lam > 1 makes the single end transient. Key
    of ring-k vertex j is k * m + j + 1. Level n spans rings 0..n, so
    the first submap already has an interior ring for the mark.
    """
    if m < 3:
        raise ValueError("cylinder needs at least 3 vertices per ring")
    lam = float(lam)
    if not (lam > 0 and np.isfinite(lam)):
        raise ValueError("lam must be positive and finite")

    def key(k: int, j: int) -> int:
        return k * m + (j % m) + 1

    def ring_of(kk: int) -> tuple[int, int]:
        return (kk - 1) // m, (kk - 1) % m

    def neighbors(kk: int):
        k, j = ring_of(kk)
        out = [
            (key(k, j + 1), lam**k),
            (key(k, j - 1), lam**k),
            (key(k + 1, j), lam**k),
            (key(k + 1, j - 1), lam**k),
        ]
        if k > 0:
            out += [(key(k - 1, j), lam ** (k - 1)),
                    (key(k - 1, j + 1), lam ** (k - 1))]
        return sorted(set(out))

    oracle = GraphOracle(key(0, 0), neighbors, name=name, params={"m": m, "lam": lam})

    def level_vertices(_oracle, n: int):
        return [key(k, j) for k in range(n + 1) for j in range(m)]

    exhaustion = Exhaustion(oracle, level_fn=level_vertices)

    def position(kk: int) -> tuple[float, float]:
        k, j = ring_of(kk)
        r = 0.62**k
        ang = 2 * math.pi * (j + 0.5 * k) / m
        return (r * math.cos(ang), r * math.sin(ang))

    def submap(n: int) -> PlanarMap:
        keys = set(int(k) for k in exhaustion.vertices(n))
        pos = {k: position(k) for k in keys}
        edge_list = []
        seen = set()
        for kk in sorted(keys):
            for nk, c in neighbors(kk):
                if nk in keys:
                    pair = (min(kk, nk), max(kk, nk))
                    if pair not in seen:
                        seen.add(pair)
                        edge_list.append((pair[0], pair[1], c))
        return PlanarMap.from_embedding(
            pos, edge_list, marks={"x_hat": key(1, 0), "y_hat": key(0, 0)})

    return MapOracle(name=name, oracle=oracle, exhaustion=exhaustion,
                     submap_fn=submap,
                     marks={"x_hat": key(1, 0), "y_hat": key(0, 0)},
                     params={"m": m, "lam": lam})
