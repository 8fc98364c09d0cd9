"""Small dense linear algebra kernels used by the samplers.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 in C (row-major)
order. Design matrices follow the convention ``X.shape == (d, n)``: one column
per example.
"""

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import dpotrf as _dpotrf, dpotri as _dpotri

from .errors import NotPositiveDefinite

# Cholesky pivots below this fraction of the largest diagonal entry are treated
# as a failed factorization (cond(A) ~ 1e14 and worse).
PIVOT_RTOL = 1e-14
SYMMETRY_RTOL = 1e-10


def as_matrix(A, name="matrix"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf")
    return A


def as_vector(v, name="vector"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf")
    return v


def _check_symmetric(A):
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.size == 0:
        return
    scale = max(1.0, float(np.abs(A).max()))
    if float(np.abs(A - A.T).max()) > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric")


def cholesky(A):
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Raises
    ------
    NotPositiveDefinite
        If the factorization breaks down or a pivot is negligible relative to
        the diagonal of ``A``.
    """
    A = as_matrix(A)
    _check_symmetric(A)
    return _potrf(A)


def _potrf(A):
    if A.shape[0] == 0:
        return A.copy()
    L, info = _dpotrf(A, lower=1, clean=1)
    if info != 0:
        raise NotPositiveDefinite(f"Cholesky factorization failed at pivot {info}")
    diag = np.diag(L)
    if diag.min() ** 2 <= PIVOT_RTOL * np.max(np.abs(np.diag(A))):
        raise NotPositiveDefinite("matrix is numerically singular")
    return L


def spd_inverse(A):
    """Inverse of a symmetric positive-definite matrix via Cholesky.

    LAPACK ``potri`` returns one triangle; mirroring it makes the result
    exactly symmetric.
    """
    A = as_matrix(A)
    _check_symmetric(A)
    L = _potrf(A)
    if L.shape[0] == 0:
        return L
    B, info = _dpotri(L, lower=1)
    if info != 0:
        raise NotPositiveDefinite(f"inverse from Cholesky factor failed ({info})")
    # potrf(clean=1) zeroed the upper triangle and potri fills only the lower
    B = B + B.T
    B.flat[:: B.shape[0] + 1] *= 0.5
    return B


def spd_solve(A, b):
    """Solve ``A x = b`` for SPD ``A``."""
    L = cholesky(A)
    return scipy.linalg.cho_solve((L, True), np.asarray(b, dtype=np.float64),
                                  check_finite=False)


def rank_one_update(Z, v, c=1.0):
    """Return ``Z + c * v v^T`` (exactly symmetric)."""
    Z = np.asarray(Z, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (Z.shape[0],):
        raise ValueError(f"vector of length {v.shape} does not match {Z.shape}")
    # v v^T is exactly symmetric in floating point, so symmetric Z stays so.
    return Z + c * np.multiply.outer(v, v)


def quad_form(Z, x):
    """Return the scalar ``x^T Z x``."""
    x = np.asarray(x, dtype=np.float64)
    return float(x @ np.asarray(Z, dtype=np.float64) @ x)


def sym_eigenvalues(A):
    """Real eigenvalues of a symmetric matrix, sorted in descending order."""
    A = as_matrix(A)
    _check_symmetric(A)
    return np.linalg.eigvalsh(A)[::-1].copy()


def regularized_gram(X, lam):
    """``X X^T + lam I`` for a d x n design matrix."""
    X = np.asarray(X, dtype=np.float64)
    G = X @ X.T
    G = (G + G.T) / 2
    G.flat[:: G.shape[0] + 1] += lam
    return G
