"""Finite element spaces on triangles and the operators between them.

Every function used here is a polynomial of degree <= 2 on each triangle.  It
is stored as a symmetric 3x3 matrix ``C`` per triangle with
``f = lambda^T C lambda`` in barycentric coordinates ``lambda``; the identity
``sum(lambda) = 1`` makes this representation cover all quadratics.  Integrals
of products and gradients then follow in closed form from

    int_T lambda^alpha dx = 2 |T| alpha! / (|alpha| + 2)!

Spaces
------
CR   Crouzeix-Raviart, one dof per interior edge, basis ``1 - 2 lambda_j``
eCR  CR plus one quadratic bubble per triangle
S1   conforming P1 (Courant), interior vertices
S2   conforming P2, interior vertices then interior edges
Vpw  discontinuous P1 plus bubble, four dofs per triangle
Ves  Vpw x eCR, in this block order
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import factorial

import numpy as np

from .mesh import LOCAL_EDGES, Mesh

J = np.ones((3, 3))
_EYE = np.eye(3)


def _moment_tensor(order: int) -> np.ndarray:
    """``int_T prod lambda_i / |T|`` for all index tuples of the given order."""
    out = np.empty((3,) * order)
    for idx in product(range(3), repeat=order):
        alpha = np.bincount(idx, minlength=3)
        out[idx] = 2.0 * np.prod([factorial(a) for a in alpha]) / factorial(order + 2)
    return out


E2 = _moment_tensor(2)
E4 = _moment_tensor(4)


# --- local coefficient matrices ---------------------------------------------
def coef_linear(i: int) -> np.ndarray:
    e = _EYE[i][:, None]
    return 0.5 * (e @ np.ones((1, 3)) + np.ones((3, 1)) @ e.T)


def coef_cr(j: int) -> np.ndarray:
    """``psi_j = 1 - 2 lambda_j`` attached to local edge j."""
    return J - 2.0 * coef_linear(j)


def coef_bubble(mesh: Mesh) -> np.ndarray:
    """``2 - 72 / sum_{P != Q} |P-Q|^2 * |x - mid(T)|^2`` per triangle, shape (nt, 3, 3).

    With ``mu = lambda - 1/3`` one has ``|x - mid(T)|^2 = -mu^T D mu / 2`` for the
    matrix ``D`` of squared vertex distances; the ordered-pair sum is ``sum(D)``.
    """
    p = mesh.vertices[mesh.triangles]
    diff = p[:, :, None, :] - p[:, None, :, :]
    D = np.sum(diff**2, axis=-1)
    S = D.sum(axis=(1, 2))
    M = _EYE - J / 3.0
    return 2.0 * J + (36.0 / S)[:, None, None] * (M @ D @ M)


def coef_s2_vertex(i: int) -> np.ndarray:
    return 2.0 * np.outer(_EYE[i], _EYE[i]) - coef_linear(i)


def coef_s2_edge(j: int) -> np.ndarray:
    a, b = LOCAL_EDGES[j]
    return 2.0 * (np.outer(_EYE[a], _EYE[b]) + np.outer(_EYE[b], _EYE[a]))


def eval_bubble(mesh: Mesh, t: int, x) -> np.ndarray:
    """Direct evaluation of the bubble of triangle ``t`` at points ``x`` (no zero extension)."""
    p = mesh.vertices[mesh.triangles[t]]
    sigma = sum(np.sum((p[i] - p[j]) ** 2) for i in range(3) for j in range(3) if i != j)
    n = 2
    r2 = np.sum((np.asarray(x, dtype=float) - p.mean(axis=0)) ** 2, axis=-1)
    return (n + 2) / 2 - n * (n + 1) ** 2 * (n + 2) / sigma * r2


# --- piecewise quadratic calculus -------------------------------------------
def integrals(mesh: Mesh, C: np.ndarray) -> np.ndarray:
    """``int_T f`` for coefficient arrays ``C`` of shape (nt, ..., 3, 3)."""
    area = mesh.areas.reshape((-1,) + (1,) * (C.ndim - 3))
    return area * np.einsum("...ij,ij->...", C, E2)


def local_mass(mesh: Mesh, C1: np.ndarray, C2: np.ndarray | None = None) -> np.ndarray:
    """``int_T phi_m psi_n`` for local families (nt, m, 3, 3) and (nt, n, 3, 3)."""
    C2 = C1 if C2 is None else C2
    tmp = np.einsum("tmij,ijkl->tmkl", C1, E4, optimize=True)
    return mesh.areas[:, None, None] * np.einsum("tmkl,tnkl->tmn", tmp, C2, optimize=True)


def local_stiffness(mesh: Mesh, C1: np.ndarray, C2: np.ndarray | None = None) -> np.ndarray:
    """``int_T grad phi_m . grad psi_n``; ``grad f = 2 G^T C lambda``."""
    C2 = C1 if C2 is None else C2
    G = mesh.grad_bary
    K = np.einsum("tid,tjd->tij", G, G)
    # sum_il (C1 K C2)_il E2_il = trace(C1 (K C2 E2))
    W = np.einsum("tjk,tnkl,li->tnji", K, C2, E2, optimize=True)
    return 4.0 * mesh.areas[:, None, None] * np.einsum("tmij,tnji->tmn", C1, W, optimize=True)


def l2_inner(mesh: Mesh, C1: np.ndarray, C2: np.ndarray, per_triangle: bool = False):
    v = local_mass(mesh, C1[:, None], C2[:, None])[:, 0, 0]
    return v if per_triangle else float(v.sum())


def energy_inner(mesh: Mesh, C1: np.ndarray, C2: np.ndarray, per_triangle: bool = False):
    """Piecewise energy product ``a_pw``."""
    v = local_stiffness(mesh, C1[:, None], C2[:, None])[:, 0, 0]
    return v if per_triangle else float(v.sum())


def evaluate(C: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Values at barycentric points ``bary`` (q, 3) on every triangle, shape (nt, ..., q)."""
    return np.einsum("qi,...ij,qj->...q", bary, C, bary, optimize=True)


def gradients(mesh: Mesh, C: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Gradients at barycentric points, shape (nt, q, 2)."""
    return 2.0 * np.einsum("tid,tij,qj->tqd", mesh.grad_bary, C, bary, optimize=True)


# --- spaces ------------------------------------------------------------------
@dataclass(eq=False)
class DofSpace:
    """Global numbering plus local basis coefficients.

    ``dofmap[t, m]`` is the global dof of local basis function ``m`` on
    triangle ``t`` (``-1`` for functions removed by the boundary condition),
    ``local[t, m]`` its coefficient matrix.
    """
    kind: str
    mesh: Mesh
    ndof: int
    dofmap: np.ndarray
    local: np.ndarray

    def to_local(self, coef: np.ndarray) -> np.ndarray:
        """Coefficient matrices (nt, 3, 3) of the FE function(s) with global vector ``coef``.

        ``coef`` may carry a trailing axis of several functions; the result
        then has shape (nt, k, 3, 3).
        """
        coef = np.asarray(coef, dtype=float)
        ext = np.concatenate([coef, np.zeros((1,) + coef.shape[1:])])
        c = ext[self.dofmap]  # (nt, m) or (nt, m, k)
        if coef.ndim == 1:
            return np.einsum("tm,tmij->tij", c, self.local)
        return np.einsum("tmk,tmij->tkij", c, self.local)


def cr_space(mesh: Mesh) -> DofSpace:
    dofmap = mesh.interior_edge_index[mesh.tri_edges]
    local = np.broadcast_to(np.stack([coef_cr(j) for j in range(3)]), (mesh.nt, 3, 3, 3))
    return DofSpace("CR", mesh, mesh.n_interior_edges, dofmap, np.ascontiguousarray(local))


def ecr_space(mesh: Mesh) -> DofSpace:
    cr = cr_space(mesh)
    dofmap = np.column_stack([cr.dofmap, cr.ndof + np.arange(mesh.nt)])
    local = np.concatenate([cr.local, coef_bubble(mesh)[:, None]], axis=1)
    return DofSpace("eCR", mesh, cr.ndof + mesh.nt, dofmap, local)


def s1_space(mesh: Mesh) -> DofSpace:
    dofmap = mesh.interior_vertex_index[mesh.triangles]
    local = np.broadcast_to(np.stack([coef_linear(i) for i in range(3)]), (mesh.nt, 3, 3, 3))
    return DofSpace("S1", mesh, mesh.n_interior_vertices, dofmap, np.ascontiguousarray(local))


def s2_space(mesh: Mesh) -> DofSpace:
    nvi = mesh.n_interior_vertices
    ie = mesh.interior_edge_index[mesh.tri_edges]
    dofmap = np.column_stack([mesh.interior_vertex_index[mesh.triangles],
                              np.where(ie >= 0, nvi + ie, -1)])
    base = np.stack([coef_s2_vertex(i) for i in range(3)] + [coef_s2_edge(j) for j in range(3)])
    local = np.ascontiguousarray(np.broadcast_to(base, (mesh.nt, 6, 3, 3)))
    return DofSpace("S2", mesh, nvi + mesh.n_interior_edges, dofmap, local)


def vpw_space(mesh: Mesh) -> DofSpace:
    dofmap = 4 * np.arange(mesh.nt)[:, None] + np.arange(4)[None, :]
    lin = np.broadcast_to(np.stack([coef_linear(i) for i in range(3)]), (mesh.nt, 3, 3, 3))
    local = np.concatenate([lin, coef_bubble(mesh)[:, None]], axis=1)
    return DofSpace("Vpw", mesh, 4 * mesh.nt, dofmap, local)


@dataclass(eq=False)
class ProductSpace:
    """``Vpw x eCR`` with the pw block first."""
    kind: str
    mesh: Mesh
    pw: DofSpace
    nc: DofSpace

    @property
    def ndof(self) -> int:
        return self.pw.ndof + self.nc.ndof

    def split(self, coef: np.ndarray):
        return coef[:self.pw.ndof], coef[self.pw.ndof:]


def ves_space(mesh: Mesh) -> ProductSpace:
    return ProductSpace("Ves", mesh, vpw_space(mesh), ecr_space(mesh))


SPACES = {"CR": cr_space, "eCR": ecr_space, "S1": s1_space, "S2": s2_space,
          "Vpw": vpw_space, "Ves": ves_space}


def make_space(kind: str, mesh: Mesh):
    return SPACES[kind](mesh)


# --- interpolation ------------------------------------------------------------
def edge_means(mesh: Mesh, v) -> np.ndarray:
    """Mean of ``v`` over every global edge.

    ``v`` is either a callable on points (N, 2), evaluated with a 6-point
    Gauss rule, or a piecewise quadratic (nt, 3, 3) in which case Simpson's
    rule is exact (the trace from the first adjacent triangle is used).
    """
    if callable(v):
        g, w = np.polynomial.legendre.leggauss(6)
        s = 0.5 * (g + 1)
        a = mesh.vertices[mesh.edges[:, 0]]
        b = mesh.vertices[mesh.edges[:, 1]]
        pts = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
        return v(pts.reshape(-1, 2)).reshape(len(a), -1) @ (0.5 * w)
    C = np.asarray(v)
    t = mesh.edge_tris[:, 0]
    loc = np.argmax(mesh.tri_edges[t] == np.arange(mesh.ne)[:, None], axis=1)
    a, b = LOCAL_EDGES[loc, 0], LOCAL_EDGES[loc, 1]
    idx = np.arange(mesh.ne)
    Ct = C[t]
    fa = Ct[idx, a, a]
    fb = Ct[idx, b, b]
    fm = 0.25 * (Ct[idx, a, a] + Ct[idx, b, b] + Ct[idx, a, b] + Ct[idx, b, a])
    return (fa + 4 * fm + fb) / 6.0


def triangle_means(mesh: Mesh, v) -> np.ndarray:
    if callable(v):
        from .potentials import quadrature_points, triangle_rule
        rule = triangle_rule(10)
        return v(quadrature_points(mesh, rule)) @ rule.weights
    return integrals(mesh, np.asarray(v)) / mesh.areas


def interpolate_cr(mesh: Mesh, v) -> np.ndarray:
    """CR coefficients: edge means of ``v`` on interior edges."""
    means = edge_means(mesh, v)
    return means[~mesh.boundary_edges]


def interpolate_ecr(mesh: Mesh, v) -> np.ndarray:
    """eCR coefficients preserving edge means and triangle means of ``v``."""
    cr = cr_space(mesh)
    c = interpolate_cr(mesh, v)
    bubble = triangle_means(mesh, v) - triangle_means(mesh, cr.to_local(c))
    # bubbles have mean one and vanishing edge means
    return np.concatenate([c, bubble])


def decompose_ecr(mesh: Mesh, coef: np.ndarray):
    """Split eCR coefficients into the CR part and the bubble part."""
    n = mesh.n_interior_edges
    return coef[:n], coef[n:]


def cr_vertex_traces(mesh: Mesh, coef: np.ndarray) -> np.ndarray:
    """Values ``v|_T(P_i)`` of a CR function at the vertices of every triangle, (nt, 3, ...)."""
    ext = np.concatenate([coef, np.zeros((1,) + coef.shape[1:])])
    c = ext[mesh.interior_edge_index[mesh.tri_edges]]
    return c.sum(axis=1, keepdims=True) - 2.0 * c


def average_a1(mesh: Mesh, coef: np.ndarray) -> np.ndarray:
    """Nodal averaging of a CR function into S1 (zero at boundary vertices)."""
    tr = cr_vertex_traces(mesh, coef)
    tail = coef.shape[1:]
    acc = np.zeros((mesh.nv,) + tail)
    np.add.at(acc, mesh.triangles.ravel(), tr.reshape((-1,) + tail))
    acc /= mesh.vertex_patch_sizes.reshape((-1,) + (1,) * len(tail))
    return acc[~mesh.boundary_vertices]


def average_a2(mesh: Mesh, coef: np.ndarray) -> np.ndarray:
    """P2 averaging: A1 at vertices, the CR midpoint values at edge midpoints."""
    return np.concatenate([average_a1(mesh, coef), coef])


def average_ecr(mesh: Mesh, coef: np.ndarray) -> np.ndarray:
    """``A1 o I_CR`` on eCR; I_CR keeps the CR part since bubbles have zero edge means."""
    return average_a1(mesh, decompose_ecr(mesh, coef)[0])
