"""Smallest eigenvalues of ``A x = lambda B x`` with ``A`` SPD and ``B`` only PSD.

The pencil is solved in reciprocal form ``B y = mu A y``: with ``A`` SPD this
is a well-posed definite problem whose largest ``mu`` give the smallest
finite ``lambda = 1/mu``, while the kernel of ``B`` maps to ``mu = 0`` (the
infinite eigenvalues) and never has to be resolved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_LIMIT = 2000


@dataclass(eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, B-orthonormal
    n_infinite: int

    @property
    def k(self) -> int:
        return len(self.eigenvalues)


def _normalise_signs(X: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(X), axis=0)
    s = np.sign(X[idx, np.arange(X.shape[1])])
    s[s == 0] = 1.0
    return X * s


def _dense(A, B, k):
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    B = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
    try:
        L = la.cholesky(A, lower=True)
    except la.LinAlgError as exc:
        raise np.linalg.LinAlgError("A not SPD") from exc
    W = la.solve_triangular(L, B, lower=True)
    C = la.solve_triangular(L, W.T, lower=True)
    C = 0.5 * (C + C.T)
    n = C.shape[0]
    mu, Z = la.eigh(C, subset_by_index=[n - k, n - 1])
    mu, Z = mu[::-1], Z[:, ::-1]
    if np.any(mu <= 0):
        raise ValueError("requested eigenvalues beyond the finite spectrum")
    X = la.solve_triangular(L, Z, lower=True, trans="T") / np.sqrt(mu)
    return 1.0 / mu, X


def _sparse(A, B, k):
    A = sp.csc_matrix(A)
    try:
        lu = spla.splu(A, permc_spec="COLAMD", diag_pivot_thresh=0.0,
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise np.linalg.LinAlgError("A not SPD") from exc
    if np.any(lu.U.diagonal() <= 0):
        raise np.linalg.LinAlgError("A not SPD")
    n = A.shape[0]
    Minv = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(0).standard_normal(n)
    ncv = min(n, max(2 * k + 1, k + 20))
    mu, X = spla.eigsh(sp.csr_matrix(B), k=k, M=sp.csr_matrix(A), Minv=Minv, which="LA",
                       v0=v0, ncv=ncv, tol=0.0)
    order = np.argsort(-mu)
    mu, X = mu[order], X[:, order]
    if np.any(mu <= 0):
        raise ValueError("requested eigenvalues beyond the finite spectrum")
    # B-normalise (eigsh returns A-orthonormal vectors: x^T A x = 1)
    X = X * np.sqrt(1.0 / mu)
    return 1.0 / mu, X


def solve_generalized(pair, k: int, rank_b: int | None = None, dense: bool | None = None) -> Spectrum:
    """Smallest ``k`` finite eigenpairs of the pencil ``(pair.A, pair.B)``.

    ``pair`` is a :class:`~eigenbox.assembly.MatrixPair` or a tuple ``(A, B)``;
    for tuples the rank of ``B`` is computed densely unless ``rank_b`` is given.
    """
    if isinstance(pair, tuple):
        A, B = pair
        if rank_b is None:
            Bd = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
            rank_b = int(np.linalg.matrix_rank(Bd))
    else:
        A, B = pair.A, pair.B
        rank_b = pair.rank_b if rank_b is None else rank_b
    n = A.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if k > rank_b:
        raise ValueError(f"k = {k} exceeds the finite spectrum size {rank_b}")
    if dense is None:
        dense = n <= DENSE_LIMIT or k >= n - 1
    lam, X = _dense(A, B, k) if dense else _sparse(A, B, k)
    return Spectrum(lam, _normalise_signs(X), n - rank_b)
