"""Matrix pairs (A, B) for the discrete eigenvalue problems.

Each scheme is fixed by the space and two operators: ``P`` acting in the
potential term and ``Q`` in the right-hand side, each either the identity or
the projection onto piecewise constants.

=======  =====  =====  =====
method   space  P      Q
=======  =====  =====  =====
CR       CR     id     id
eCR      eCR    id     id
mCR      eCR    Pi0    id
RT       eCR    Pi0    Pi0
S1       S1     id     id
=======  =====  =====  =====

The stabilised scheme ``sCR`` lives on ``Vpw x eCR`` and is assembled
separately.  ``RT`` is the nonconforming reformulation of the lowest-order
mixed Raviart-Thomas problem with piecewise constant potential.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import spaces
from .potentials import Potential, pi0_project, quadrature_points, triangle_rule
from .mesh import Mesh

KAPPA_CR = 0.1893
KAPPA_ECR = 0.149
C_P = 1.0 / (np.sqrt(2.0) * np.pi)

METHODS = ("CR", "eCR", "mCR", "RT", "sCR", "S1")
_SCHEMES = {
    "CR": ("CR", False, False),
    "eCR": ("eCR", False, False),
    "mCR": ("eCR", True, False),
    "RT": ("eCR", True, True),
    "S1": ("S1", False, False),
    "S2": ("S2", False, False),
}


@dataclass(eq=False)
class MatrixPair:
    """Symmetric pencil ``A x = lambda B x`` with ``A`` SPD and ``B`` PSD."""
    A: sp.csr_matrix
    B: sp.csr_matrix
    method: str
    space: object
    rank_b: int
    potential: Potential
    meta: dict = field(default_factory=dict)

    @property
    def ndof(self) -> int:
        return self.A.shape[0]

    @property
    def mesh(self) -> Mesh:
        return self.space.mesh


def canonical_method(name: str) -> str:
    for m in METHODS + ("S2",):
        if m.lower() == name.lower():
            return m
    raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")


# --- global assembly helpers -------------------------------------------------
def scatter(rows: np.ndarray, cols: np.ndarray, local: np.ndarray, shape) -> sp.csr_matrix:
    """Sum local blocks ``local[t, m, n]`` into ``(rows[t, m], cols[t, n])``; ``-1`` drops."""
    r = np.broadcast_to(rows[:, :, None], local.shape).ravel()
    c = np.broadcast_to(cols[:, None, :], local.shape).ravel()
    v = local.ravel()
    keep = (r >= 0) & (c >= 0)
    M = sp.coo_matrix((v[keep], (r[keep], c[keep])), shape=shape).tocsr()
    M.sum_duplicates()
    return M


def _sym(M: sp.csr_matrix) -> sp.csr_matrix:
    return ((M + M.T) * 0.5).tocsr()


def local_potential_mass(mesh: Mesh, local: np.ndarray, V: Potential) -> np.ndarray:
    """``int_T V phi_m phi_n``: exact for piecewise constant V, degree-10 quadrature otherwise."""
    if V.kind == "zero":
        return np.zeros(local.shape[:2] + local.shape[1:2])
    if V.is_piecewise_constant(mesh):
        return pi0_project(V, mesh)[:, None, None] * spaces.local_mass(mesh, local)
    rule = triangle_rule(10)
    vals = V(quadrature_points(mesh, rule))  # (nt, q)
    phi = spaces.evaluate(local, rule.bary)  # (nt, m, q)
    w = rule.weights[None, :] * vals * mesh.areas[:, None]
    return np.einsum("tmq,tq,tnq->tmn", phi, w, phi, optimize=True)


def local_mean_products(mesh: Mesh, local: np.ndarray, weight=None) -> np.ndarray:
    """``|T| w_T Pi0 phi_m Pi0 phi_n`` per triangle."""
    m = spaces.integrals(mesh, local)  # (nt, m)
    w = 1.0 if weight is None else weight[:, None, None]
    return w * m[:, :, None] * m[:, None, :] / mesh.areas[:, None, None]


def require_piecewise_constant(V: Potential, mesh: Mesh, method: str) -> None:
    if not V.is_piecewise_constant(mesh):
        raise ValueError(
            f"{method} needs a piecewise constant potential on the mesh, got {V.kind!r}; "
            "pass potentials.piecewise_constant(pi0_project(V, mesh)) instead")


def _alpha_weight(mesh: Mesh, alpha):
    if alpha is None:
        return None
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (mesh.nt,))
    if np.any(alpha <= 0):
        raise ValueError("diffusion coefficient must be positive")
    return alpha


# --- schemes -------------------------------------------------------------------
def assemble(method: str, mesh: Mesh, V: Potential, alpha=None) -> MatrixPair:
    """Assemble the pencil of ``method`` on ``mesh`` with (shifted) potential ``V``.

    ``alpha`` is an optional piecewise constant diffusion coefficient.
    """
    method = canonical_method(method)
    if method == "sCR":
        return assemble_scr(mesh, V, alpha=alpha)
    kind, p_pi0, q_pi0 = _SCHEMES[method]
    if p_pi0:
        require_piecewise_constant(V, mesh, method)
    space = spaces.make_space(kind, mesh)
    alpha = _alpha_weight(mesh, alpha)
    loc = space.local
    n = space.ndof
    K = spaces.local_stiffness(mesh, loc)
    if alpha is not None:
        K = alpha[:, None, None] * K
    if p_pi0:
        if V.kind != "zero":
            K = K + local_mean_products(mesh, loc, pi0_project(V, mesh))
    else:
        K = K + local_potential_mass(mesh, loc, V)
    Bl = local_mean_products(mesh, loc) if q_pi0 else spaces.local_mass(mesh, loc)
    A = _sym(scatter(space.dofmap, space.dofmap, K, (n, n)))
    B = _sym(scatter(space.dofmap, space.dofmap, Bl, (n, n)))
    rank_b = mesh.nt if q_pi0 else n
    return MatrixPair(A, B, method, space, rank_b, V, {"alpha": alpha})


def assemble_courant(mesh: Mesh, V: Potential) -> MatrixPair:
    """Conforming P1 stiffness plus potential mass against the P1 mass matrix."""
    return assemble("S1", mesh, V)


def stabiliser_weights(mesh: Mesh, alpha=None) -> np.ndarray:
    """``kappa_eCR^-2 h_T^-2``, scaled by the smallest diffusion value when present."""
    w = 1.0 / (KAPPA_ECR**2 * mesh.diameters**2)
    if alpha is not None:
        w = w * float(np.min(alpha))
    return w


def assemble_scr(mesh: Mesh, V: Potential, alpha=None) -> MatrixPair:
    """Extra-stabilised pencil on ``Vpw x eCR``.

    ``A`` = energy and Pi0-potential on the eCR block plus the weighted L2
    distance between both components; ``B`` = L2 mass on the Vpw block.
    """
    require_piecewise_constant(V, mesh, "sCR")
    alpha = _alpha_weight(mesh, alpha)
    space = spaces.ves_space(mesh)
    pw, nc = space.pw, space.nc
    npw = pw.ndof
    n = space.ndof
    Knc = spaces.local_stiffness(mesh, nc.local)
    if alpha is not None:
        Knc = alpha[:, None, None] * Knc
    if V.kind != "zero":
        Knc = Knc + local_mean_products(mesh, nc.local, pi0_project(V, mesh))
    nc_map = np.where(nc.dofmap >= 0, nc.dofmap + npw, -1)
    A = scatter(nc_map, nc_map, Knc, (n, n))
    # stabiliser on the eight local functions [pw basis, -nc basis]
    loc = np.concatenate([pw.local, -nc.local], axis=1)
    S = stabiliser_weights(mesh, alpha)[:, None, None] * spaces.local_mass(mesh, loc)
    dm = np.concatenate([pw.dofmap, nc_map], axis=1)
    A = _sym(A + scatter(dm, dm, S, (n, n)))
    Mpw = spaces.local_mass(mesh, pw.local)
    B = _sym(scatter(pw.dofmap, pw.dofmap, Mpw, (n, n)))
    return MatrixPair(A, B, "sCR", space, npw, V, {"alpha": alpha})


def dump_matrix(M, path) -> None:
    """Coordinate text dump, ``row col value`` per line with 17 significant digits."""
    C = sp.coo_matrix(M)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        fh.write(f"{C.shape[0]} {C.shape[1]} {C.nnz}\n")
        for r, c, v in zip(C.row[order], C.col[order], C.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
