"""Guaranteed upper bounds by Rayleigh-Ritz on averaged discrete eigenfunctions.

The first ``K`` discrete eigenfunctions are mapped into a conforming space by
an averaging operator; the Rayleigh-Ritz values of the exact bilinear forms on
their span bound the exact eigenvalues from above by the min-max principle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from . import spaces
from .assembly import MatrixPair, assemble
from .potentials import Potential

AVERAGINGS = ("A1", "A2", "eCR", "identity")


@dataclass(eq=False)
class GubResult:
    mu: np.ndarray  # ascending positive Ritz values
    k_available: int
    degenerate: bool
    averaging: str
    alpha: np.ndarray | None = None

    def bound(self, k: int) -> float | None:
        """Upper bound for the k-th eigenvalue (1-based) or ``None`` when unavailable."""
        return float(self.mu[k - 1]) if 1 <= k <= self.k_available else None


def cr_component(pair: MatrixPair, X: np.ndarray) -> np.ndarray:
    """CR coefficients of the nonconforming part of eigenvectors ``X`` (columns)."""
    mesh = pair.mesh
    if pair.method == "CR":
        return X
    if pair.method in ("eCR", "mCR", "RT"):
        return spaces.decompose_ecr(mesh, X)[0]
    if pair.method == "sCR":
        _, nc = pair.space.split(X)
        return spaces.decompose_ecr(mesh, nc)[0]
    raise ValueError(f"no CR component for method {pair.method}")


def nonconforming_component(pair: MatrixPair, X: np.ndarray):
    """(space, coefficients) of the function that gets averaged."""
    if pair.method == "sCR":
        return pair.space.nc, pair.space.split(X)[1]
    return pair.space, X


def default_averaging(method: str) -> str:
    return {"CR": "A2", "S1": "identity"}.get(method, "eCR")


def average(pair: MatrixPair, X: np.ndarray, avg: str):
    """Conforming space kind and coefficients of the averaged eigenfunctions."""
    mesh = pair.mesh
    if avg == "identity":
        if pair.method not in ("S1", "S2"):
            raise ValueError("identity averaging needs conforming eigenfunctions")
        return pair.method, X
    if avg in ("A1", "A2") and pair.method != "CR":
        raise ValueError(f"{avg} averaging acts on CR eigenfunctions, got {pair.method}")
    if avg == "eCR" and pair.method not in ("eCR", "mCR", "RT", "sCR"):
        raise ValueError(f"eCR averaging acts on eCR-based eigenfunctions, got {pair.method}")
    if avg not in AVERAGINGS:
        raise ValueError(f"unknown averaging {avg!r}")
    c = cr_component(pair, X)
    if avg == "A2":
        return "S2", spaces.average_a2(mesh, c)
    return "S1", spaces.average_a1(mesh, c)


def gub_from_averaging(pair: MatrixPair, X: np.ndarray, avg: str, V: Potential,
                       K: int | None = None, conforming: MatrixPair | None = None) -> GubResult:
    """Rayleigh-Ritz values on the averaged span of the first ``K`` columns of ``X``.

    ``V`` is the potential of the problem being bounded; ``conforming`` may
    supply a pre-assembled conforming pencil to reuse between calls.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    K = X.shape[1] if K is None else K
    if K < 1 or K > X.shape[1]:
        raise ValueError("need 1 <= K <= number of eigenfunctions")
    if X.shape[0] != pair.ndof:
        raise ValueError("eigenfunctions do not match the space of the pencil")
    kind, Y = average(pair, X[:, :K], avg)
    if conforming is None or conforming.method != kind:
        conforming = assemble(kind, pair.mesh, V)
    As = Y.T @ (conforming.A @ Y)
    Bs = Y.T @ (conforming.B @ Y)
    As, Bs = 0.5 * (As + As.T), 0.5 * (Bs + Bs.T)
    beta, Q = la.eigh(Bs)
    scale = max(float(np.max(np.diag(Bs))), 0.0)
    keep = beta > 1e-12 * scale if scale > 0 else np.zeros(K, bool)
    r = int(keep.sum())
    if r == 0:
        return GubResult(np.empty(0), 0, True, avg)
    Q = Q[:, keep] / np.sqrt(beta[keep])  # Q^T Bs Q = I
    mu = la.eigvalsh(Q.T @ As @ Q)
    mu = np.sort(mu[mu > 0])
    return GubResult(mu, len(mu), r < K, avg)


def alpha_k(pair: MatrixPair, spectrum, k: int, avg: str) -> float:
    """``sqrt`` of the largest eigenvalue of ``C x = gamma D x``.

    ``C`` is the L2 Gram matrix of ``u_j - A u_j`` and ``D = diag(lambda_h)``
    over the first ``k`` eigenpairs.
    """
    X = spectrum.eigenvectors[:, :k]
    lam = np.asarray(spectrum.eigenvalues[:k], dtype=float)
    space, coef = nonconforming_component(pair, X)
    kind, Y = average(pair, X, avg)
    conf = spaces.make_space(kind, pair.mesh)
    diff = space.to_local(coef) - conf.to_local(Y)  # (nt, k, 3, 3)
    C = spaces.local_mass(pair.mesh, diff).sum(axis=0)
    C = 0.5 * (C + C.T)
    gamma = la.eigvalsh(C, np.diag(lam))
    return float(np.sqrt(max(gamma[-1], 0.0)))


def existence_check(alpha: float, lam_k: float) -> bool:
    """True when ``alpha < lam_k^(-1/2)``, which guarantees that ``mu_k`` exists."""
    return bool(alpha < lam_k ** -0.5)
