"""Cosine similarity kernels and log-determinant mutual information.

All kernel algebra runs in float64; single precision is not trustworthy for
log-determinants of near-singular similarity matrices.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import InvalidArgumentError, NumericalDomainError

DEFAULT_LAMBDA = 1e-3
_ZERO_NORM = 1e-12


def cosine_kernel(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities between rows of U and rows of V.

    Rows with norm below 1e-12 get similarity 0 everywhere: zero gradient
    embeddings belong to fully confident points, which should look dissimilar
    to everything for selection purposes.
    """
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if U.shape[1] != V.shape[1]:
        raise InvalidArgumentError(
            f"inner dimensions differ: {U.shape[1]} vs {V.shape[1]}"
        )
    un = np.linalg.norm(U, axis=1)
    vn = np.linalg.norm(V, axis=1)
    uz = un < _ZERO_NORM
    vz = vn < _ZERO_NORM
    K = (U / np.where(uz, 1.0, un)[:, None]) @ (V / np.where(vz, 1.0, vn)[:, None]).T
    K[uz, :] = 0.0
    K[:, vz] = 0.0
    return K


def regularize(K: np.ndarray, lam: float) -> np.ndarray:
    """K + lam * I."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgumentError("regularize expects a square matrix")
    if lam < 0:
        raise InvalidArgumentError("lam must be non-negative")
    return K + lam * np.eye(K.shape[0])


def _cholesky(K: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises NumericalDomainError with pivot index."""
    if K.shape[0] == 0:
        return np.zeros((0, 0))
    L, info = lapack.dpotrf(K, lower=1, clean=1)
    if info > 0:
        raise NumericalDomainError("matrix is not positive definite", pivot=info - 1)
    if info < 0:
        raise NumericalDomainError(f"invalid Cholesky input (argument {-info})")
    return L


def log_det(K: np.ndarray) -> float:
    """log det of a symmetric positive-definite matrix via Cholesky.

    The 0x0 matrix has log det 0 by convention.
    """
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgumentError("log_det expects a square matrix")
    if K.shape[0] == 0:
        return 0.0
    L = _cholesky(K)
    return float(2.0 * np.sum(np.log(np.diag(L))))


def logdetmi_eval(S_A: np.ndarray, S_Q: np.ndarray, S_AQ: np.ndarray) -> float:
    """Mutual information log det S_A - log det(S_A - S_AQ S_Q^-1 S_AQ^T).

    S_Q^-1 is applied through its Cholesky factor with triangular solves.
    Empty A evaluates to 0.
    """
    S_A = np.atleast_2d(np.asarray(S_A, dtype=np.float64))
    S_Q = np.atleast_2d(np.asarray(S_Q, dtype=np.float64))
    S_AQ = np.asarray(S_AQ, dtype=np.float64)
    k = S_A.shape[0]
    q = S_Q.shape[0]
    if k == 0:
        return 0.0
    S_AQ = S_AQ.reshape(k, q)
    Lq = _cholesky(S_Q)
    # Schur complement S_A - S_AQ S_Q^-1 S_AQ^T = S_A - Y^T Y, Y = Lq^-1 S_AQ^T
    Y = solve_triangular(Lq, S_AQ.T, lower=True)
    schur = S_A - Y.T @ Y
    try:
        schur_ld = log_det(schur)
    except NumericalDomainError as exc:
        raise NumericalDomainError(
            "Schur complement lost positive definiteness; increase lambda",
            pivot=exc.pivot,
        ) from exc
    return log_det(S_A) - schur_ld
