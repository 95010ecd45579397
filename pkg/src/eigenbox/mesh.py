"""Triangulations of polygonal domains.

A :class:`Mesh` stores vertex coordinates, counterclockwise triangles and, per
triangle, the local index of its newest-vertex-bisection (NVB) refinement edge.
Local edge ``j`` of a triangle is the edge opposite its local vertex ``j``.
All connectivity (edges, adjacency, boundary flags) is derived lazily.

Meshes are immutable; both refinement routines return a new mesh whose
``parent`` array maps every child triangle to its parent in the input mesh.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

# local edge j joins local vertices (j+1)%3 and (j+2)%3
LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]])


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    triangles: np.ndarray
    refinement_edge: np.ndarray = None
    level: int = 0
    parent: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        r = (np.zeros(len(t), dtype=np.int64) if self.refinement_edge is None
             else np.asarray(self.refinement_edge, dtype=np.int64))
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "refinement_edge", r)

    def __repr__(self):
        return f"Mesh(nv={self.nv}, nt={self.nt}, level={self.level})"

    @property
    def nv(self) -> int:
        return len(self.vertices)

    @property
    def nt(self) -> int:
        return len(self.triangles)

    # --- topology -------------------------------------------------------
    @cached_property
    def _edge_data(self):
        t = self.triangles
        a = t[:, LOCAL_EDGES[:, 0]]
        b = t[:, LOCAL_EDGES[:, 1]]
        pairs = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=-1).reshape(-1, 2)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        tri_edges = inverse.reshape(-1, 3)
        # adjacency: first and second triangle containing each edge
        owner = np.repeat(np.arange(self.nt), 3)
        flat = tri_edges.ravel()
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=len(edges))
        if counts.max() > 2:
            raise ValueError("non-manifold mesh: an edge belongs to more than two triangles")
        start = np.concatenate([[0], np.cumsum(counts)[:-1]])
        edge_tris = -np.ones((len(edges), 2), dtype=np.int64)
        edge_tris[:, 0] = owner[order[start]]
        two = counts == 2
        edge_tris[two, 1] = owner[order[start[two] + 1]]
        return edges, tri_edges, edge_tris

    @property
    def edges(self) -> np.ndarray:
        """Deduplicated edges as sorted vertex pairs, shape (ne, 2)."""
        return self._edge_data[0]

    @property
    def tri_edges(self) -> np.ndarray:
        """Global edge index of local edge j of every triangle, shape (nt, 3)."""
        return self._edge_data[1]

    @property
    def edge_tris(self) -> np.ndarray:
        """Adjacent triangles per edge; second column is -1 on the boundary."""
        return self._edge_data[2]

    @property
    def ne(self) -> int:
        return len(self.edges)

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        return self.edge_tris[:, 1] < 0

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        flags = np.zeros(self.nv, dtype=bool)
        flags[self.edges[self.boundary_edges].ravel()] = True
        return flags

    @cached_property
    def interior_edge_index(self) -> np.ndarray:
        """Consecutive numbering of interior edges; -1 on boundary edges."""
        return _number(~self.boundary_edges)

    @cached_property
    def interior_vertex_index(self) -> np.ndarray:
        return _number(~self.boundary_vertices)

    @property
    def n_interior_edges(self) -> int:
        return int(np.count_nonzero(~self.boundary_edges))

    @property
    def n_interior_vertices(self) -> int:
        return int(np.count_nonzero(~self.boundary_vertices))

    # --- geometry -------------------------------------------------------
    @cached_property
    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def local_edge_lengths(self) -> np.ndarray:
        """Length of local edge j (opposite vertex j), shape (nt, 3)."""
        p = self.vertices[self.triangles]
        d = p[:, LOCAL_EDGES[:, 1]] - p[:, LOCAL_EDGES[:, 0]]
        return np.hypot(d[..., 0], d[..., 1])

    @cached_property
    def diameters(self) -> np.ndarray:
        return self.local_edge_lengths.max(axis=1)

    @property
    def hmax(self) -> float:
        return float(self.diameters.max())

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])

    @cached_property
    def edge_tangents(self) -> np.ndarray:
        """Unit tangents from the lower to the higher vertex index."""
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return d / self.edge_lengths[:, None]

    @cached_property
    def edge_normals(self) -> np.ndarray:
        """Tangent rotated by +90 degrees; flipped to point outward on the boundary."""
        t = self.edge_tangents
        nu = np.stack([-t[:, 1], t[:, 0]], axis=1)
        b = self.boundary_edges
        inward = self.centroids[self.edge_tris[b, 0]] - self.edge_midpoints[b]
        flip = np.einsum("ij,ij->i", nu[b], inward) > 0
        nu[np.flatnonzero(b)[flip]] *= -1
        return nu

    @cached_property
    def grad_bary(self) -> np.ndarray:
        """Gradients of the barycentric coordinates, shape (nt, 3, 2)."""
        p = self.vertices[self.triangles]
        # grad lambda_j = rot(P_{j+2} - P_{j+1}) / (2|T|), rot(x, y) = (y, -x)
        d = p[:, LOCAL_EDGES[:, 1]] - p[:, LOCAL_EDGES[:, 0]]
        g = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return -g / (2.0 * self.areas[:, None, None])

    def patch(self, z: int) -> np.ndarray:
        """Indices of the triangles containing vertex ``z``."""
        return np.flatnonzero((self.triangles == z).any(axis=1))

    @cached_property
    def vertex_patch_sizes(self) -> np.ndarray:
        return np.bincount(self.triangles.ravel(), minlength=self.nv)

    def min_angle(self) -> float:
        """Smallest interior angle of the mesh in degrees."""
        lens = self.local_edge_lengths
        a, b, c = lens[:, 0], lens[:, 1], lens[:, 2]
        cos = np.stack([(b**2 + c**2 - a**2) / (2 * b * c),
                        (c**2 + a**2 - b**2) / (2 * c * a),
                        (a**2 + b**2 - c**2) / (2 * a * b)], axis=1)
        return float(np.degrees(np.arccos(np.clip(cos, -1, 1))).min())


def _number(mask: np.ndarray) -> np.ndarray:
    idx = -np.ones(len(mask), dtype=np.int64)
    idx[mask] = np.arange(np.count_nonzero(mask))
    return idx


# --- construction ----------------------------------------------------------
def build_square_mesh(halfwidth: float, n_per_side: int, center=(0.0, 0.0)) -> Mesh:
    """Square ``center + (-w, w)^2`` split into ``2 n^2`` right-isosceles triangles.

    Every subsquare is cut along the diagonal through its lower-left corner;
    the hypotenuse is the refinement edge and the right angle is local vertex 0.
    """
    if n_per_side < 1:
        raise ValueError("n_per_side must be >= 1")
    n = n_per_side
    s = np.linspace(-halfwidth, halfwidth, n + 1)
    x, y = np.meshgrid(s + center[0], s + center[1], indexing="xy")
    vertices = np.column_stack([x.ravel(), y.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    a = (j * (n + 1) + i).ravel()
    b, c, d = a + 1, a + n + 2, a + n + 1
    lower = np.column_stack([b, c, a])
    upper = np.column_stack([d, a, c])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return Mesh(vertices, triangles)


def build_lshape_mesh(halfwidth: float, n_per_side: int) -> Mesh:
    """``(-w, w)^2`` minus ``[0, w)^2``; the re-entrant corner is at the origin."""
    if n_per_side % 2:
        raise ValueError("n_per_side must be even so that the origin is a vertex")
    square = build_square_mesh(halfwidth, n_per_side)
    c = square.centroids
    keep = ~((c[:, 0] > 0) & (c[:, 1] > 0))
    return _compress(square.vertices, square.triangles[keep], square.refinement_edge[keep])


def _compress(vertices, triangles, refinement_edge, level=0, parent=None) -> Mesh:
    used = np.unique(triangles)
    new = -np.ones(len(vertices), dtype=np.int64)
    new[used] = np.arange(len(used))
    return Mesh(vertices[used], new[triangles], refinement_edge, level, parent)


def _canonical(mesh: Mesh) -> np.ndarray:
    """Triangles rolled so that the refinement edge is local edge 0."""
    t = mesh.triangles
    r = mesh.refinement_edge
    cols = (np.arange(3)[None, :] + r[:, None]) % 3
    return np.take_along_axis(t, cols, axis=1)


# --- refinement ------------------------------------------------------------
def uniform_red_refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four similar children through edge midpoints."""
    t = _canonical(mesh)
    m = Mesh(mesh.vertices, t)
    mid = mesh.nv + m.tri_edges  # midpoint vertex of local edge j
    vertices = np.vstack([mesh.vertices, m.edge_midpoints])
    p0, p1, p2 = t.T
    m0, m1, m2 = mid.T
    # each child lists the image of (p0, p1, p2) first, so edge 0 stays the refinement edge
    children = np.stack([
        np.column_stack([p0, m2, m1]),
        np.column_stack([m2, p1, m0]),
        np.column_stack([m1, m0, p2]),
        np.column_stack([m0, m1, m2]),
    ], axis=1).reshape(-1, 3)
    parent = np.repeat(np.arange(mesh.nt), 4)
    return Mesh(vertices, children, np.zeros(len(children), dtype=np.int64),
                mesh.level + 1, parent)


def nvb_refine(mesh: Mesh, marked) -> Mesh:
    """Newest-vertex bisection of the marked triangles plus conforming closure."""
    marked = np.unique(np.asarray(list(marked) if isinstance(marked, (set, frozenset)) else marked,
                                  dtype=np.int64))
    if marked.size == 0:
        return mesh
    t = _canonical(mesh)
    m = Mesh(mesh.vertices, t)
    te = m.tri_edges
    flag = np.zeros(m.ne, dtype=bool)
    flag[te[marked, 0]] = True
    while True:
        need = flag[te].any(axis=1) & ~flag[te[:, 0]]
        if not need.any():
            break
        flag[te[need, 0]] = True

    split = np.flatnonzero(flag)
    nv = mesh.nv
    vertices = np.vstack([mesh.vertices, m.edge_midpoints[split]])
    base = len(vertices)  # keys must stay unique for edges touching new midpoints
    keys = m.edges[split, 0] * base + m.edges[split, 1]  # sorted since edges are lexsorted
    mids = nv + np.arange(len(split))

    out, out_parent = [], []
    cur, cur_parent = t, np.arange(mesh.nt)
    while len(cur):
        a, b = cur[:, 1], cur[:, 2]
        k = np.minimum(a, b) * base + np.maximum(a, b)
        pos = np.clip(np.searchsorted(keys, k), 0, len(keys) - 1)
        hit = keys[pos] == k
        out.append(cur[~hit])
        out_parent.append(cur_parent[~hit])
        c = cur[hit]
        mv = mids[pos[hit]]
        cur = np.stack([np.column_stack([mv, c[:, 0], c[:, 1]]),
                        np.column_stack([mv, c[:, 2], c[:, 0]])], axis=1).reshape(-1, 3)
        cur_parent = np.repeat(cur_parent[hit], 2)
    triangles = np.vstack(out)
    parent = np.concatenate(out_parent)
    order = np.argsort(parent, kind="stable")
    return Mesh(vertices, triangles[order], np.zeros(len(triangles), dtype=np.int64),
                mesh.level + 1, parent[order])


# --- validation and I/O ----------------------------------------------------
def check_mesh(mesh: Mesh, tol: float = 1e-12) -> None:
    """Raise ``ValueError`` unless the mesh is a valid regular triangulation."""
    if np.any(mesh.areas <= tol * mesh.diameters**2):
        raise ValueError("triangle with non-positive area")
    if np.any(np.bincount(mesh.triangles.ravel(), minlength=mesh.nv) == 0):
        raise ValueError("unused vertex")
    mesh.edge_tris  # raises on non-manifold edges
    # hanging nodes: a vertex in the relative interior of some boundary edge
    be = mesh.edges[mesh.boundary_edges]
    p, q = mesh.vertices[be[:, 0]], mesh.vertices[be[:, 1]]
    d = q - p
    L2 = np.einsum("ij,ij->i", d, d)
    for chunk in np.array_split(np.arange(mesh.nv), max(1, mesh.nv // 2000)):
        w = mesh.vertices[chunk][:, None, :] - p[None]
        s = np.einsum("vei,ei->ve", w, d) / L2
        cross = w[..., 0] * d[None, :, 1] - w[..., 1] * d[None, :, 0]
        on = (np.abs(cross) <= tol * L2) & (s > tol) & (s < 1 - tol)
        if on.any():
            raise ValueError("hanging node on an edge")
    # Euler characteristic of a triangulated polygon (boundary loops = holes + 1)
    chi = mesh.nv - mesh.ne + mesh.nt
    loops = _boundary_loops(mesh)
    if chi != 2 - loops:
        raise ValueError(f"overlapping triangles (Euler characteristic {chi}, {loops} boundary loops)")


def _boundary_loops(mesh: Mesh) -> int:
    be = mesh.edges[mesh.boundary_edges]
    if len(be) == 0:
        return 0
    deg = np.bincount(be.ravel(), minlength=mesh.nv)
    if np.any(deg[np.unique(be)] != 2):
        raise ValueError("boundary is not a union of simple loops")
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components
    n = mesh.nv
    g = coo_matrix((np.ones(len(be)), (be[:, 0], be[:, 1])), shape=(n, n))
    ncomp, labels = connected_components(g, directed=False)
    return len(np.unique(labels[np.unique(be)]))


def save_mesh(mesh: Mesh, path) -> None:
    """Write the plain-text mesh format: ``nv nt``, vertex lines, triangle lines."""
    lines = [f"{mesh.nv} {mesh.nt}"]
    b = mesh.boundary_vertices.astype(int)
    lines += [f"{x:.17g} {y:.17g} {f}" for (x, y), f in zip(mesh.vertices, b)]
    lines += [f"{i} {j} {k} {r}" for (i, j, k), r in zip(mesh.triangles, mesh.refinement_edge)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_mesh(path) -> Mesh:
    tokens = Path(path).read_text().split()
    nv, nt = int(tokens[0]), int(tokens[1])
    vdata = np.array(tokens[2:2 + 3 * nv], dtype=float).reshape(nv, 3)
    tdata = np.array(tokens[2 + 3 * nv:2 + 3 * nv + 4 * nt], dtype=np.int64).reshape(nt, 4)
    return Mesh(vdata[:, :2], tdata[:, :3], tdata[:, 3])
