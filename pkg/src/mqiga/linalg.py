"""Dense linear-algebra kernels backed by LAPACK through scipy."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

__all__ = ("SingularMatrixError", "lu_solve", "sym_generalized_eigmin",
           "sym_generalized_eigpair", "condition_number_2", "as_dense")


class SingularMatrixError(np.linalg.LinAlgError):
    pass


def as_dense(A) -> np.ndarray:
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


def lu_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises :class:`SingularMatrixError` when a pivot vanishes or the
    reciprocal condition estimate is below machine precision.
    """
    A = as_dense(A)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    lu, piv, info = sla.lapack.dgetrf(A)
    if info > 0:
        raise SingularMatrixError(f"exactly singular matrix (zero pivot at {info})")
    anorm = np.abs(A).sum(axis=0).max()
    rcond, _ = sla.lapack.dgecon(lu, anorm, norm="1")
    if rcond < np.finfo(float).eps:
        raise SingularMatrixError(f"matrix is singular to working precision (rcond={rcond:.2e})")
    x, info = sla.lapack.dgetrs(lu, piv, b)
    return x


def sym_generalized_eigpair(A, M):
    """Smallest eigenpair of ``A q = lam M q`` with ``M`` positive definite."""
    A, M = as_dense(A), as_dense(M)
    try:
        Lc = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError("M is not positive definite") from err
    # C = L^{-1} A L^{-T}
    X = sla.solve_triangular(Lc, A, lower=True)
    C = sla.solve_triangular(Lc, X.T, lower=True).T
    C = 0.5 * (C + C.T)
    lam, V = np.linalg.eigh(C)
    q = sla.solve_triangular(Lc.T, V[:, 0], lower=False)
    return float(lam[0]), q


def sym_generalized_eigmin(A, M) -> float:
    """Smallest ``lam`` with ``A q = lam M q`` (Cholesky reduction + symmetric eigensolve)."""
    return sym_generalized_eigpair(A, M)[0]


def condition_number_2(A) -> float:
    """Spectral condition number ``sigma_max / sigma_min``; ``inf`` when singular."""
    s = np.linalg.svd(as_dense(A), compute_uv=False)
    if s.size == 0:
        return 1.0
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])
