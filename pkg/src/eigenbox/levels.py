"""Solve every requested scheme on one mesh and collect its bounds."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .assembly import MatrixPair, assemble, canonical_method
from .eigensolve import Spectrum, solve_generalized
from .gub import gub_from_averaging
from .mesh import Mesh
from .potentials import Potential, pi0_project, piecewise_constant

GLB_KEYS = ("glb_cr", "glb_mu", "glb_ecr", "glb_ecr_s", "glb_rt", "glb_mcr", "glb_cecr", "glb_scr")
GUB_KEYS = ("gub_a1", "gub_a2", "gub_ecr")
PI0_METHODS = ("mCR", "RT", "sCR")


@dataclass(eq=False)
class BoundReport:
    level: int
    ntri: int
    method: str
    k: int
    ndof: int
    lambda_h: float | None
    glb: dict = field(default_factory=dict)
    gub: dict = field(default_factory=dict)
    params: bounds.GlbParameters | None = None
    seconds: float = 0.0
    degenerate: dict = field(default_factory=dict)

    def best_glb(self) -> float | None:
        vals = [v for v in self.glb.values() if v is not None]
        return max(vals) if vals else None


@dataclass(eq=False)
class LevelResult:
    mesh: Mesh
    reports: list
    pairs: dict
    spectra: dict


def projected(V: Potential, mesh: Mesh) -> Potential:
    """Piecewise constant ``Pi0 V`` keeping the offset of ``V``."""
    if V.is_piecewise_constant(mesh) and V.kind != "anderson":
        return V
    return piecewise_constant(pi0_project(V, mesh), offset=0.0)


def certified_potential(V: Potential, mesh: Mesh, method: str) -> Potential:
    """Potential of the problem a scheme's bounds refer to on this mesh.

    Smooth potentials are used exactly except by the schemes that need a
    piecewise constant one; rough potentials are always replaced by ``Pi0 V``.
    """
    if V.smooth and method not in PI0_METHODS:
        return V
    if V.kind == "zero":
        return V
    return projected(V, mesh)


def _glbs(method: str, lam: np.ndarray, lam1: float, p: bounds.GlbParameters,
          pwconst: bool, diffusion: bool) -> list[dict]:
    out = []
    for lk in lam:
        g = {}
        if method == "CR":
            g["glb_cr"] = float(bounds.glb_cr(lk, p))
            g["glb_mu"] = float(bounds.glb_mu(lk, lam1, p))
        elif method == "eCR":
            g["glb_ecr_s"] = bounds.glb_ecr_general(lk, p)
            if pwconst:
                g["glb_ecr"] = float(bounds.glb_ecr_pwconst(lk, p))
        elif method == "mCR":
            g["glb_mcr"] = float(bounds.glb_mcr(lk, p))
            g["glb_cecr"] = float(bounds.glb_cecr(lk, p))
        elif method == "RT":
            g["glb_rt"] = float(bounds.glb_rt(lk, p))
        elif method == "sCR":
            f = bounds.glb_scr_diffusion if diffusion else bounds.glb_scr
            g["glb_scr"] = float(f(lk, p))
        out.append(g)
    return out


def solve_method(method: str, mesh: Mesh, V: Potential, k: int, level: int = 0,
                 all_k: bool = False, alpha=None, gub: bool = True,
                 conforming: dict | None = None):
    """Solve one scheme for ``k`` eigenpairs; returns (reports, pair, spectrum).

    Reported values include the potential offset, i.e. they refer to the
    unshifted problem.
    """
    t0 = time.perf_counter()
    method = canonical_method(method)
    Vc = certified_potential(V, mesh, method)
    pair = assemble(method, mesh, Vc, alpha=alpha)
    ks = range(1, k + 1) if all_k else [k]
    if k > pair.rank_b:
        # fewer finite eigenvalues than requested: the row is not applicable
        empty = [BoundReport(level=level, ntri=mesh.nt, method=method, k=kk, ndof=pair.ndof,
                             lambda_h=None) for kk in ks]
        return empty, pair, None
    spec = solve_generalized(pair, k)
    lam = spec.eigenvalues
    alpha_min = 1.0 if alpha is None else float(np.min(alpha))
    p = bounds.compute_params(mesh, Vc, alpha_min=alpha_min)
    glbs = _glbs(method, lam, lam[0], p, Vc.is_piecewise_constant(mesh), alpha is not None)
    gubs = [dict() for _ in lam]
    degenerate = {}
    if gub and method != "S1":
        # the averaged functions are measured with the potential the GLB refers to
        Vg = certified_potential(V, mesh, "CR") if method not in PI0_METHODS else Vc
        avgs = (("gub_a1", "A1"), ("gub_a2", "A2")) if method == "CR" else (("gub_ecr", "eCR"),)
        conforming = {} if conforming is None else conforming
        for key, avg in avgs:
            kind = "S2" if avg == "A2" else "S1"
            ck = (kind, id(Vg))
            if ck not in conforming:
                conforming[ck] = assemble(kind, mesh, Vg)
            res = gub_from_averaging(pair, spec.eigenvectors, avg, Vg, K=k, conforming=conforming[ck])
            degenerate[key] = res.degenerate
            for j in range(len(lam)):
                gubs[j][key] = res.bound(j + 1)
    seconds = time.perf_counter() - t0
    off = V.offset
    reports = []
    for kk in ks:
        j = kk - 1
        reports.append(BoundReport(
            level=level, ntri=mesh.nt, method=method, k=kk, ndof=pair.ndof,
            lambda_h=float(lam[j]) + off,
            glb={key: v + off for key, v in glbs[j].items()},
            gub={key: (None if v is None else v + off) for key, v in gubs[j].items()},
            params=p, seconds=seconds, degenerate=degenerate))
    return reports, pair, spec


def solve_level(mesh: Mesh, V: Potential, methods, k: int, level: int = 0,
                all_k: bool = False, alpha=None, gub: bool = True) -> LevelResult:
    reports, pairs, spectra = [], {}, {}
    conforming: dict = {}
    for m in methods:
        rep, pair, spec = solve_method(m, mesh, V, k, level=level, all_k=all_k, alpha=alpha,
                                       gub=gub, conforming=conforming)
        reports.extend(rep)
        if spec is not None:
            pairs[pair.method] = pair
            spectra[pair.method] = spec
    return LevelResult(mesh, reports, pairs, spectra)


def pair_spectrum(result: LevelResult, method: str) -> tuple[MatrixPair, Spectrum]:
    m = canonical_method(method)
    return result.pairs[m], result.spectra[m]
