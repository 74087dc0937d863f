"""Indexed triangle meshes: adjacency, local topology edits, validation.

The mesh value type is a plain indexed (vertices, faces) pair.  Local edits
(split / collapse / flip) go through :class:`EditableMesh`, a working copy
with incremental adjacency that the remeshing loop mutates in place; the
public per-edge operations wrap it for one-shot use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import MeshStructureError

# Faces below this area (world units squared) count as degenerate.  Default
# sits well below one pixel at every supported raster resolution.
DEGENERATE_AREA_EPS = 1e-12


@dataclass
class TriangleMesh:
    """Indexed triangle surface with optional per-vertex colors and freeze flags.

    positions: (V, 3) float64 world coordinates.
    faces: (F, 3) int32 vertex indices, counter-clockwise = outward normal.
    vertex_colors: optional (V, 3) float64 RGB in [0, 1].
    vertex_flags: optional (V,) bool, True marks a frozen vertex.
    """

    positions: np.ndarray
    faces: np.ndarray
    vertex_colors: Optional[np.ndarray] = None
    vertex_flags: Optional[np.ndarray] = None

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int32).reshape(-1, 3)
        if self.vertex_colors is not None:
            self.vertex_colors = np.ascontiguousarray(self.vertex_colors, dtype=np.float64).reshape(-1, 3)
        if self.vertex_flags is not None:
            self.vertex_flags = np.ascontiguousarray(self.vertex_flags, dtype=bool).reshape(-1)

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def copy(self) -> "TriangleMesh":
        return TriangleMesh(
            self.positions.copy(),
            self.faces.copy(),
            None if self.vertex_colors is None else self.vertex_colors.copy(),
            None if self.vertex_flags is None else self.vertex_flags.copy(),
        )

    def frozen_mask(self) -> np.ndarray:
        if self.vertex_flags is None:
            return np.zeros(self.n_vertices, dtype=bool)
        return self.vertex_flags

    def bounding_box(self) -> np.ndarray:
        """(2, 3) [min; max] over vertices; zeros for an empty mesh."""
        if self.n_vertices == 0:
            return np.zeros((2, 3))
        return np.stack([self.positions.min(axis=0), self.positions.max(axis=0)])

    def bbox_diagonal(self) -> float:
        box = self.bounding_box()
        return float(np.linalg.norm(box[1] - box[0]))

    def check_indices(self):
        """Raise MeshStructureError on out-of-range or repeated face indices."""
        if self.n_faces == 0:
            return
        f = self.faces
        if f.min(initial=0) < 0 or f.max(initial=-1) >= self.n_vertices:
            raise MeshStructureError("face index out of range")
        repeated = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
        if repeated.any():
            raise MeshStructureError(f"face {int(np.argmax(repeated))} repeats a vertex index")


def empty_mesh() -> TriangleMesh:
    return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))


def concatenate(a: TriangleMesh, b: TriangleMesh) -> TriangleMesh:
    """Append b to a as an independent connected component."""
    positions = np.concatenate([a.positions, b.positions])
    faces = np.concatenate([a.faces, b.faces + a.n_vertices]).astype(np.int32)
    colors = None
    if a.vertex_colors is not None or b.vertex_colors is not None:
        ca = a.vertex_colors if a.vertex_colors is not None else np.ones((a.n_vertices, 3))
        cb = b.vertex_colors if b.vertex_colors is not None else np.ones((b.n_vertices, 3))
        colors = np.concatenate([ca, cb])
    flags = None
    if a.vertex_flags is not None or b.vertex_flags is not None:
        flags = np.concatenate([a.frozen_mask(), b.frozen_mask()])
    return TriangleMesh(positions, faces, colors, flags)


# ---------------------------------------------------------------------------
# Adjacency


@dataclass
class AdjacencyInfo:
    """Static adjacency tables for a fixed face list.

    vertex_faces: vertex -> incident face ids.
    edge_faces: (min u, max v) -> tuple of adjacent face ids.
    one_ring: vertex -> neighbouring vertex ids (sorted arrays).
    """

    vertex_faces: list
    edge_faces: dict
    one_ring: list
    # CSR view of one_ring used by vectorized Laplacian code
    ring_offsets: np.ndarray = field(repr=False, default=None)
    ring_indices: np.ndarray = field(repr=False, default=None)


def build_adjacency(mesh: TriangleMesh) -> AdjacencyInfo:
    """Build vertex/edge/one-ring adjacency for a structurally valid mesh."""
    mesh.check_indices()
    nv = mesh.n_vertices
    faces = mesh.faces

    vertex_faces = [[] for _ in range(nv)]
    edge_faces: dict = {}
    for fi, (a, b, c) in enumerate(faces):
        a, b, c = int(a), int(b), int(c)
        vertex_faces[a].append(fi)
        vertex_faces[b].append(fi)
        vertex_faces[c].append(fi)
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            edge_faces.setdefault(key, []).append(fi)
    edge_faces = {k: tuple(v) for k, v in edge_faces.items()}

    ring_sets = [set() for _ in range(nv)]
    for u, v in edge_faces:
        ring_sets[u].add(v)
        ring_sets[v].add(u)
    one_ring = [np.array(sorted(s), dtype=np.int64) for s in ring_sets]

    offsets = np.zeros(nv + 1, dtype=np.int64)
    for i, ring in enumerate(one_ring):
        offsets[i + 1] = offsets[i] + len(ring)
    indices = np.concatenate(one_ring) if nv else np.zeros(0, dtype=np.int64)

    return AdjacencyInfo(
        vertex_faces=[np.array(v, dtype=np.int64) for v in vertex_faces],
        edge_faces=edge_faces,
        one_ring=one_ring,
        ring_offsets=offsets,
        ring_indices=indices,
    )


def uniform_laplacian(mesh: TriangleMesh, adjacency: AdjacencyInfo) -> np.ndarray:
    """Umbrella Laplacian: mean of one-ring positions minus the vertex.

    Isolated vertices get a zero vector; boundary vertices use their
    partial ring.
    """
    nv = mesh.n_vertices
    out = np.zeros((nv, 3))
    if nv == 0:
        return out
    offsets, indices = adjacency.ring_offsets, adjacency.ring_indices
    degrees = np.diff(offsets)
    sums = np.add.reduceat(
        mesh.positions[indices], offsets[:-1].clip(max=max(len(indices) - 1, 0)), axis=0
    ) if len(indices) else np.zeros((nv, 3))
    # reduceat yields garbage rows for empty segments; mask them out
    nonzero = degrees > 0
    out[nonzero] = sums[nonzero] / degrees[nonzero, None] - mesh.positions[nonzero]
    return out


def face_areas(positions: np.ndarray, faces: np.ndarray) -> np.ndarray:
    p = positions[faces]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def face_normals(positions: np.ndarray, faces: np.ndarray, normalize: bool = True) -> np.ndarray:
    p = positions[faces]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    if normalize:
        lens = np.linalg.norm(n, axis=1, keepdims=True)
        n = n / np.maximum(lens, 1e-300)
    return n


# ---------------------------------------------------------------------------
# Icosphere


_ICO_T = (1.0 + 5.0**0.5) / 2.0

_ICO_VERTS = np.array(
    [
        (-1, _ICO_T, 0), (1, _ICO_T, 0), (-1, -_ICO_T, 0), (1, -_ICO_T, 0),
        (0, -1, _ICO_T), (0, 1, _ICO_T), (0, -1, -_ICO_T), (0, 1, -_ICO_T),
        (_ICO_T, 0, -1), (_ICO_T, 0, 1), (-_ICO_T, 0, -1), (-_ICO_T, 0, 1),
    ],
    dtype=np.float64,
)

_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ],
    dtype=np.int32,
)


def icosphere(center, radius: float, level: int = 2) -> TriangleMesh:
    """Subdivided icosahedron projected onto the sphere (outward faces).

    level 0 is the raw icosahedron (12 vertices, 20 faces); each level
    quadruples the face count.  level must be <= 7.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not 0 <= level <= 7:
        raise ValueError("level must be in [0, 7]")
    verts = _ICO_VERTS / np.linalg.norm(_ICO_VERTS[0])
    faces = _ICO_FACES
    for _ in range(level):
        verts, faces = _subdivide_once(verts, faces)
        verts = verts / np.linalg.norm(verts, axis=1, keepdims=True)
    positions = np.asarray(center, dtype=np.float64) + radius * verts
    return TriangleMesh(positions, faces)


def _subdivide_once(verts, faces):
    midpoint_cache: dict = {}
    verts = list(map(tuple, verts))

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        idx = midpoint_cache.get(key)
        if idx is None:
            pa, pb = verts[a], verts[b]
            verts.append(tuple((np.array(pa) + np.array(pb)) / 2.0))
            idx = len(verts) - 1
            midpoint_cache[key] = idx
        return idx

    new_faces = []
    for a, b, c in faces:
        a, b, c = int(a), int(b), int(c)
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        new_faces.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return np.array(verts, dtype=np.float64), np.array(new_faces, dtype=np.int32)


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ValidationReport:
    n_vertices: int
    n_faces: int
    index_violations: list
    nonmanifold_edges: list
    boundary_edges: int
    degenerate_faces: list
    nan_vertices: list
    components: list  # (n_vertices, n_faces, euler_characteristic, watertight)

    @property
    def edge_manifold(self) -> bool:
        return not self.nonmanifold_edges

    @property
    def watertight(self) -> bool:
        return bool(self.components) and all(c[3] for c in self.components)

    @property
    def ok(self) -> bool:
        return (
            not self.index_violations
            and not self.nonmanifold_edges
            and not self.degenerate_faces
            and not self.nan_vertices
        )


def validate(mesh: TriangleMesh, area_eps: float = DEGENERATE_AREA_EPS) -> ValidationReport:
    """Structural report: indices, manifoldness, degeneracy, Euler counts."""
    nv, nf = mesh.n_vertices, mesh.n_faces
    index_violations = []
    f = mesh.faces
    if nf:
        bad = (f < 0).any(axis=1) | (f >= nv).any(axis=1)
        for fi in np.nonzero(bad)[0]:
            index_violations.append((int(fi), "out-of-range"))
        ok_rows = ~bad
        rep = ok_rows & ((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2]))
        for fi in np.nonzero(rep)[0]:
            index_violations.append((int(fi), "repeated-index"))

    nan_vertices = [int(i) for i in np.nonzero(~np.isfinite(mesh.positions).all(axis=1))[0]]

    usable = np.ones(nf, dtype=bool)
    for fi, _ in index_violations:
        usable[fi] = False

    edge_count: dict = {}
    for fi in np.nonzero(usable)[0]:
        a, b, c = (int(x) for x in f[fi])
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            edge_count[key] = edge_count.get(key, 0) + 1
    nonmanifold_edges = [e for e, n in edge_count.items() if n > 2]
    boundary_edges = sum(1 for n in edge_count.values() if n == 1)

    degenerate_faces = []
    if nf and not nan_vertices:
        areas = face_areas(mesh.positions, np.where(usable[:, None], f, 0))
        for fi in np.nonzero(usable & (areas < area_eps))[0]:
            degenerate_faces.append(int(fi))

    components = _connected_components(nv, f[usable], edge_count)
    return ValidationReport(
        n_vertices=nv,
        n_faces=nf,
        index_violations=index_violations,
        nonmanifold_edges=nonmanifold_edges,
        boundary_edges=boundary_edges,
        degenerate_faces=degenerate_faces,
        nan_vertices=nan_vertices,
        components=components,
    )


def _connected_components(nv, faces, edge_count):
    if len(faces) == 0:
        return []
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, c in faces:
        ra, rb, rc = find(int(a)), find(int(b)), find(int(c))
        parent[rb] = ra
        parent[find(rc)] = ra

    comp_vertices: dict = {}
    referenced = np.zeros(nv, dtype=bool)
    referenced[faces.ravel()] = True
    for v in np.nonzero(referenced)[0]:
        comp_vertices.setdefault(find(int(v)), set()).add(int(v))

    comp_faces: dict = {}
    for fi, (a, b, c) in enumerate(faces):
        comp_faces.setdefault(find(int(a)), []).append(fi)

    comp_edges: dict = {}
    comp_open: dict = {}
    for (u, v), n in edge_count.items():
        root = find(u)
        comp_edges[root] = comp_edges.get(root, 0) + 1
        if n != 2:
            comp_open[root] = True

    out = []
    for root in sorted(comp_vertices):
        v = len(comp_vertices[root])
        fcount = len(comp_faces.get(root, []))
        e = comp_edges.get(root, 0)
        euler = v - e + fcount
        watertight = not comp_open.get(root, False)
        out.append((v, fcount, euler, watertight))
    return out


# ---------------------------------------------------------------------------
# Editable mesh with local topology operations


class EditableMesh:
    """Working copy supporting edge split/collapse/flip with live adjacency.

    Vertices carry an optional payload matrix (e.g. optimizer moments)
    that is transported through edits: split midpoints average their
    parents' rows, collapse survivors keep their own row.  Frozen
    vertices are never moved or deleted, and an edge whose endpoints are
    both frozen is never edited.
    """

    def __init__(self, mesh: TriangleMesh, payload: Optional[np.ndarray] = None):
        mesh.check_indices()
        self.positions = [np.array(p) for p in mesh.positions]
        self.colors = None if mesh.vertex_colors is None else [np.array(c) for c in mesh.vertex_colors]
        self.frozen = list(mesh.frozen_mask())
        self.payload = None if payload is None else [np.array(r) for r in payload]
        self.faces: dict = {}
        self._next_face = 0
        self.vertex_faces: dict = {i: set() for i in range(len(self.positions))}
        self.edge_faces: dict = {}
        for tri in mesh.faces:
            self._add_face(tuple(int(x) for x in tri))

    # -- bookkeeping

    def _add_face(self, tri):
        fid = self._next_face
        self._next_face += 1
        self.faces[fid] = tri
        for v in tri:
            self.vertex_faces[v].add(fid)
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            self.edge_faces.setdefault(_ekey(u, v), set()).add(fid)
        return fid

    def _remove_face(self, fid):
        tri = self.faces.pop(fid)
        for v in tri:
            self.vertex_faces[v].discard(fid)
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = _ekey(u, v)
            s = self.edge_faces.get(key)
            if s is not None:
                s.discard(fid)
                if not s:
                    del self.edge_faces[key]
        return tri

    def _new_vertex(self, pos, color, frozen, payload_row):
        vid = len(self.positions)
        self.positions.append(np.asarray(pos, dtype=np.float64))
        if self.colors is not None:
            self.colors.append(np.asarray(color, dtype=np.float64))
        self.frozen.append(bool(frozen))
        if self.payload is not None:
            self.payload.append(np.asarray(payload_row, dtype=np.float64))
        self.vertex_faces[vid] = set()
        return vid

    def edge_exists(self, u, v) -> bool:
        return _ekey(u, v) in self.edge_faces

    def edges(self):
        return list(self.edge_faces.keys())

    def one_ring(self, v):
        ring = set()
        for fid in self.vertex_faces[v]:
            ring.update(self.faces[fid])
        ring.discard(v)
        return ring

    # -- operations

    def split(self, u, v):
        """Insert a midpoint on edge (u, v) and retriangulate incident faces.

        Returns the new vertex id, or None if the edge is missing or
        fully frozen.
        """
        key = _ekey(u, v)
        fids = self.edge_faces.get(key)
        if not fids:
            return None
        if self.frozen[u] and self.frozen[v]:
            return None
        mid_pos = (self.positions[u] + self.positions[v]) / 2.0
        mid_col = None
        if self.colors is not None:
            mid_col = (self.colors[u] + self.colors[v]) / 2.0
        mid_payload = None
        if self.payload is not None:
            mid_payload = (self.payload[u] + self.payload[v]) / 2.0
        m = self._new_vertex(mid_pos, mid_col, False, mid_payload)
        for fid in sorted(fids):
            a, b, c = self.faces[fid]
            self._remove_face(fid)
            # rotate so the split edge is (a, b)
            if _ekey(a, b) != key:
                if _ekey(b, c) == key:
                    a, b, c = b, c, a
                else:
                    a, b, c = c, a, b
            self._add_face((a, m, c))
            self._add_face((m, b, c))
        return m

    def collapse_legal(self, u, v):
        """Check the link condition and freeze rules for collapsing (u, v)."""
        key = _ekey(u, v)
        fids = self.edge_faces.get(key)
        if not fids or len(fids) > 2:
            return False
        if self.frozen[u] and self.frozen[v]:
            return False
        opposite = set()
        for fid in fids:
            for w in self.faces[fid]:
                if w != u and w != v:
                    opposite.add(w)
        # link condition: shared ring must be exactly the opposite vertices
        if self.one_ring(u) & self.one_ring(v) != opposite:
            return False
        # the surviving faces must not duplicate each other (tetrahedron case)
        remaining = (self.vertex_faces[u] | self.vertex_faces[v]) - set(fids)
        seen = set()
        for fid in remaining:
            tri = frozenset((u if x == v else x) for x in self.faces[fid])
            if len(tri) < 3 or tri in seen:
                return False
            seen.add(tri)
        return True

    def collapse(self, u, v):
        """Collapse edge (u, v) into one vertex at the midpoint.

        A frozen endpoint survives at its own position.  Returns the
        surviving vertex id or None when the collapse is rejected.
        """
        if not self.collapse_legal(u, v):
            return None
        if self.frozen[v] and not self.frozen[u]:
            u, v = v, u  # keep the frozen endpoint
        # u survives, v is removed
        if self.frozen[u]:
            new_pos = self.positions[u]
            new_col = None if self.colors is None else self.colors[u]
        else:
            new_pos = (self.positions[u] + self.positions[v]) / 2.0
            new_col = None if self.colors is None else (self.colors[u] + self.colors[v]) / 2.0
        dying = sorted(self.edge_faces[_ekey(u, v)])
        for fid in dying:
            self._remove_face(fid)
        for fid in sorted(self.vertex_faces[v]):
            tri = self._remove_face(fid)
            self._add_face(tuple(u if w == v else w for w in tri))
        self.positions[u] = np.asarray(new_pos, dtype=np.float64)
        if self.colors is not None:
            self.colors[u] = np.asarray(new_col, dtype=np.float64)
        # payload of the removed vertex is discarded; survivor keeps its own
        return u

    def flip(self, u, v, require_gain: bool = False):
        """Rotate the diagonal of the two faces sharing (u, v).

        Rejects flips that would break edge-manifoldness, create
        degenerate or folded faces, touch a fully frozen quad, or (with
        require_gain) fail to reduce squared valence-6 deviation.
        Returns True when applied.
        """
        key = _ekey(u, v)
        fids = self.edge_faces.get(key)
        if not fids or len(fids) != 2:
            return False
        f1, f2 = sorted(fids)
        c = _opposite_vertex(self.faces[f1], u, v)
        d = _opposite_vertex(self.faces[f2], u, v)
        if c is None or d is None or c == d:
            return False
        if self.edge_exists(c, d):
            return False
        if self.frozen[u] and self.frozen[v] and self.frozen[c] and self.frozen[d]:
            return False
        # orient: f1 must wind u->v
        if not _winds(self.faces[f1], u, v):
            u, v = v, u
            c, d = _opposite_vertex(self.faces[f1], u, v), _opposite_vertex(self.faces[f2], u, v)
        pu, pv, pc, pd = (self.positions[x] for x in (u, v, c, d))
        n_old = np.cross(pv - pu, pc - pu) + np.cross(pu - pv, pd - pv)
        new1 = np.cross(pd - pu, pc - pd)  # face (u, d, c)
        new2 = np.cross(pc - pv, pd - pc)  # face (v, c, d)
        if np.linalg.norm(new1) / 2.0 < DEGENERATE_AREA_EPS:
            return False
        if np.linalg.norm(new2) / 2.0 < DEGENERATE_AREA_EPS:
            return False
        if np.dot(n_old, new1) <= 0 or np.dot(n_old, new2) <= 0:
            return False
        if require_gain:
            deg = self._degree
            gain = 2 + (deg(c) + deg(d)) - (deg(u) + deg(v))
            if gain >= 0:
                return False
        self._remove_face(f1)
        self._remove_face(f2)
        self._add_face((u, d, c))
        self._add_face((v, c, d))
        return True

    def _degree(self, v):
        return len(self.one_ring(v))

    # -- export

    def to_mesh(self):
        """Compact to a TriangleMesh plus the transported payload matrix.

        Unreferenced vertices are dropped unless frozen (frozen vertices
        are never deleted).
        """
        used = np.zeros(len(self.positions), dtype=bool)
        for tri in self.faces.values():
            for v in tri:
                used[v] = True
        order = [i for i in range(len(self.positions)) if used[i] or self.frozen[i]]
        remap = {old: new for new, old in enumerate(order)}
        positions = np.array([self.positions[i] for i in order])
        faces = np.array(
            [[remap[v] for v in self.faces[fid]] for fid in sorted(self.faces)],
            dtype=np.int32,
        ).reshape(-1, 3)
        colors = None
        if self.colors is not None:
            colors = np.array([self.colors[i] for i in order])
        flags = np.array([self.frozen[i] for i in order], dtype=bool)
        payload = None
        if self.payload is not None:
            payload = np.array([self.payload[i] for i in order])
        mesh = TriangleMesh(positions, faces, colors, flags if flags.any() else None)
        return mesh, payload


def _ekey(u, v):
    return (u, v) if u < v else (v, u)


def _opposite_vertex(tri, u, v):
    for w in tri:
        if w != u and w != v:
            return w
    return None


def _winds(tri, u, v):
    a, b, c = tri
    return (a, b) == (u, v) or (b, c) == (u, v) or (c, a) == (u, v)


# ---------------------------------------------------------------------------
# One-shot functional wrappers


def edge_split(mesh: TriangleMesh, edge) -> TriangleMesh:
    """Split one edge, returning a new mesh.  Raises if the edge is absent."""
    em = EditableMesh(mesh)
    if em.split(int(edge[0]), int(edge[1])) is None:
        raise ValueError(f"edge {tuple(edge)} cannot be split")
    return em.to_mesh()[0]

def edge_collapse(mesh: TriangleMesh, edge) -> Optional[TriangleMesh]:
    """Collapse one edge; returns None when the collapse is rejected."""
    em = EditableMesh(mesh)
    if not em.edge_exists(int(edge[0]), int(edge[1])):
        raise ValueError(f"edge {tuple(edge)} not in mesh")
    if em.collapse(int(edge[0]), int(edge[1])) is None:
        return None
    return em.to_mesh()[0]

def edge_flip(mesh: TriangleMesh, edge) -> Optional[TriangleMesh]:
    """Flip one edge; returns None when the flip is rejected."""
    em = EditableMesh(mesh)
    if not em.edge_exists(int(edge[0]), int(edge[1])):
        raise ValueError(f"edge {tuple(edge)} not in mesh")
    if not em.flip(int(edge[0]), int(edge[1])):
        return None
    return em.to_mesh()[0]
