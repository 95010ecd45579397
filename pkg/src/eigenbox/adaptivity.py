"""Residual refinement indicator, Doerfler marking and the adaptive loop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spaces
from .mesh import Mesh
from .potentials import Potential, pi0_project, quadrature_points, triangle_rule


@dataclass(eq=False)
class EstimatorReport:
    eta2: np.ndarray  # per triangle
    marked: np.ndarray | None = None
    theta: float | None = None

    @property
    def total(self) -> float:
        return float(self.eta2.sum())


def _potential_at_points(V: Potential, mesh: Mesh, pts: np.ndarray) -> np.ndarray:
    if V.kind == "zero":
        return np.zeros(pts.shape[:-1])
    if V.is_piecewise_constant(mesh):
        return np.broadcast_to(pi0_project(V, mesh)[:, None], pts.shape[:-1])
    return V(pts)


def cr_gradients(mesh: Mesh, coef: np.ndarray) -> np.ndarray:
    """Piecewise constant gradients of a CR function, shape (nt, 2)."""
    ext = np.append(coef, 0.0)
    c = ext[mesh.interior_edge_index[mesh.tri_edges]]
    return -2.0 * np.einsum("tid,ti->td", mesh.grad_bary, c)


def tangential_jumps(mesh: Mesh, coef: np.ndarray, boundary: bool = True) -> np.ndarray:
    """Tangential gradient jump per edge; on boundary edges the one-sided trace, or 0."""
    g = cr_gradients(mesh, coef)
    t0, t1 = mesh.edge_tris[:, 0], mesh.edge_tris[:, 1]
    g1 = np.where((t1 >= 0)[:, None], g[np.maximum(t1, 0)], 0.0)
    jump = np.einsum("ed,ed->e", g[t0] - g1, mesh.edge_tangents)
    if not boundary:
        jump = np.where(mesh.boundary_edges, 0.0, jump)
    return jump


def estimate(mesh: Mesh, V: Potential, lam: float, coef: np.ndarray,
             boundary_jumps: bool = True) -> EstimatorReport:
    """``eta^2(T) = |T| ||(lam - V) u||^2_T + |T|^(1/2) sum_F |F| jump_F^2`` for a CR function ``u``."""
    rule = triangle_rule(10)
    pts = quadrature_points(mesh, rule)
    u = spaces.evaluate(spaces.cr_space(mesh).to_local(coef), rule.bary)
    r = (lam - _potential_at_points(V, mesh, pts)) * u
    vol = mesh.areas**2 * (r**2 @ rule.weights)
    jump = tangential_jumps(mesh, coef, boundary_jumps)
    per_edge = mesh.edge_lengths * jump**2
    eta2 = vol + np.sqrt(mesh.areas) * per_edge[mesh.tri_edges].sum(axis=1)
    return EstimatorReport(eta2)


def doerfler_mark(eta2, theta: float) -> np.ndarray:
    """Smallest prefix of the descending order carrying ``theta`` of the total.

    Ties are broken by triangle index; ``theta = 1`` marks everything.
    """
    eta2 = np.asarray(eta2, dtype=float)
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    if theta == 1:
        return np.arange(len(eta2))
    order = np.argsort(-eta2, kind="stable")
    csum = np.cumsum(eta2[order])
    n = int(np.searchsorted(csum, theta * csum[-1], side="left")) + 1
    return np.sort(order[:min(n, len(eta2))])


def driving_function(result, method: str, k: int):
    """(lambda_h, CR coefficients) of the k-th eigenpair of ``method`` (shifted potential)."""
    from .gub import cr_component
    from .levels import pair_spectrum
    pair, spec = pair_spectrum(result, method)
    return float(spec.eigenvalues[k - 1]), cr_component(pair, spec.eigenvectors[:, k - 1])


def afem_loop(config, callback=None):
    """SOLVE, ESTIMATE, MARK, REFINE until the level or dof budget is spent.

    Uniform mode uses red refinement, adaptive mode newest-vertex bisection
    with Doerfler marking driven by the CR part of ``config.estimator``'s
    k-th eigenfunction.  ``callback(level_result, report)`` sees every level.
    Returns the list of all :class:`~eigenbox.levels.BoundReport` rows.
    """
    from .levels import certified_potential, solve_level, solve_method
    from .mesh import nvb_refine, uniform_red_refine

    mesh = config.mesh()
    V = config.make_potential()
    rows = []
    for level in range(config.levels):
        res = solve_level(mesh, V, config.methods, config.k, level=level,
                          all_k=config.all_k, gub=config.gub)
        rows.extend(res.reports)
        report = None
        last = level == config.levels - 1
        too_big = config.max_dofs is not None and max(r.ndof for r in res.reports) >= config.max_dofs
        if config.mode == "adaptive" and not (last or too_big):
            if config.estimator not in res.pairs:
                _, pair, spec = solve_method(config.estimator, mesh, V, config.k, gub=False)
                res.pairs[pair.method], res.spectra[pair.method] = pair, spec
            lam, u = driving_function(res, config.estimator, config.k)
            Vc = certified_potential(V, mesh, config.estimator)
            report = estimate(mesh, Vc, lam, u, boundary_jumps=config.boundary_jumps)
            report.theta = config.theta
            report.marked = doerfler_mark(report.eta2, config.theta)
        if callback is not None:
            callback(res, report)
        if last or too_big:
            break
        mesh = uniform_red_refine(mesh) if config.mode == "uniform" else nvb_refine(mesh, report.marked)
    return rows
