"""Guaranteed lower eigenvalue bounds from discrete eigenvalues.

All formulas take a discrete eigenvalue and a :class:`GlbParameters` built
from the mesh and the potential.  Every denominator is at least one, so each
bound lies below the discrete eigenvalue it post-processes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import C_P, KAPPA_CR, KAPPA_ECR
from .mesh import Mesh
from .potentials import Potential, elementwise_sup


@dataclass(frozen=True)
class GlbParameters:
    eps: float  # max kappa_CR^2 h_T^2
    epsp: float  # max C_P^2 h_T^2
    epspp: float  # max kappa_eCR^2 h_T^2
    delta: float  # max kappa_CR^2 h_T^2 sup_T V
    deltap: float  # max C_P^2 h_T^2 sup_T V
    hmax: float
    alpha_min: float = 1.0

    @property
    def epspp_global(self) -> float:
        """``kappa_eCR^2 h_max^2`` as required by the stabilised bound."""
        return KAPPA_ECR**2 * self.hmax**2


def compute_params(mesh: Mesh, V: Potential, alpha_min: float = 1.0) -> GlbParameters:
    h2 = mesh.diameters**2
    sup = elementwise_sup(V, mesh)
    return GlbParameters(
        eps=float(np.max(KAPPA_CR**2 * h2)),
        epsp=float(np.max(C_P**2 * h2)),
        epspp=float(np.max(KAPPA_ECR**2 * h2)),
        delta=float(np.max(KAPPA_CR**2 * h2 * sup)),
        deltap=float(np.max(C_P**2 * h2 * sup)),
        hmax=mesh.hmax,
        alpha_min=float(alpha_min),
    )


def glb_cr(lam, p: GlbParameters):
    lam = np.asarray(lam, dtype=float)
    den = 1.0 + p.delta + p.eps * lam + 2.0 * np.sqrt(p.eps * p.delta * lam)
    return lam / den


def glb_mu(lam, mu, p: GlbParameters):
    """Variant with the first discrete eigenvalue ``mu`` in place of ``lam`` under the root."""
    lam = np.asarray(lam, dtype=float)
    if np.any(mu > lam * (1 + 1e-14)):
        raise ValueError("mu must not exceed lambda")
    den = 1.0 + (np.sqrt(p.eps) + np.sqrt(p.delta / mu)) ** 2 * lam
    return lam / den


def _ecr_general(s, lam, epsp, deltap):
    zeta = 1.0 + deltap / s - deltap - s
    return lam / (1.0 + deltap / s + epsp**2 * lam**2 / (zeta + epsp * lam))


def _golden_max(f, a, b, tol=1e-12):
    g = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return max(fc, fd)


def glb_ecr_general(lam: float, p: GlbParameters) -> float:
    """Bound valid for bounded potentials, maximised over the free parameter ``s`` in (0, 1).

    A log-spaced grid locates the best ``s`` and golden-section search
    refines it; every evaluated ``s`` gives a valid bound.
    """
    lam = float(lam)
    if p.deltap == 0.0:
        # the function increases as s -> 0; the limit is the closed form
        return float(glb_ecr_pwconst(lam, p))
    s = np.geomspace(1e-8, 1 - 1e-8, 256)
    vals = _ecr_general(s, lam, p.epsp, p.deltap)
    i = int(np.argmax(vals))
    a, b = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
    best = _golden_max(lambda x: _ecr_general(x, lam, p.epsp, p.deltap), a, b)
    return float(max(best, vals[i]))


def glb_ecr_pwconst(lam, p: GlbParameters):
    lam = np.asarray(lam, dtype=float)
    return lam / (1.0 + p.deltap + p.epsp**2 * lam**2 / (1.0 + p.deltap + p.epsp * lam))


def glb_rt(lam, p: GlbParameters):
    lam = np.asarray(lam, dtype=float)
    return lam / (1.0 + p.epsp * lam)


def glb_mcr(lam, p: GlbParameters):
    lam = np.asarray(lam, dtype=float)
    return lam / (1.0 + p.epsp * p.epspp * lam**2 / (1.0 + p.epspp * lam))


def glb_cecr(lam, p: GlbParameters):
    lam = np.asarray(lam, dtype=float)
    return lam / (1.0 + p.epspp * lam)


def glb_scr(lam, p: GlbParameters):
    """Direct bound of the stabilised scheme; uses the global ``h_max``."""
    lam = np.asarray(lam, dtype=float)
    return lam / (1.0 + np.maximum(p.epspp_global * lam - 1.0, 0.0))


def glb_scr_diffusion(lam, p: GlbParameters):
    lam = np.asarray(lam, dtype=float)
    return lam / (1.0 + np.maximum(p.epspp_global * lam / p.alpha_min - 1.0, 0.0))
