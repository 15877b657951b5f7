"""Discrete L2 inf-sup constant between fine and coarse univariate spline spaces.

The fine space is ``S^p`` on ``n`` uniform elements of [0, 1] with both
boundary functions removed (H^1_0); the coarse space is the full
``S^{p-1}`` on the L-fold dyadically coarsened mesh. The constant is

    beta = min_q ||P_V q|| / ||q|| = sqrt(lambda_min(B M_V^{-1} B^T, M_Q)),

with ``B[i, j] = (C_i, N_j)``.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .hierarchy import dyadic_coarsen
from .linalg import sym_generalized_eigmin
from .quadrature import gauss_legendre
from .spline import SplineSpace1D, make_uniform_space, collocation_matrix

__all__ = ("coupling_mass_matrix", "compute_infsup")


def coupling_mass_matrix(test: SplineSpace1D, trial: SplineSpace1D,
                         mesh: SplineSpace1D, n_points: int) -> np.ndarray:
    """``M[i, j] = int N_i^test N_j^trial`` by Gauss quadrature on the elements of ``mesh``.

    Both spaces must be piecewise polynomial on ``mesh``'s elements.
    """
    xi, w = gauss_legendre(n_points)
    br = mesh.breaks
    lo, hi = br[:-1, None], br[1:, None]
    x = (0.5 * (hi - lo) * xi + 0.5 * (hi + lo)).ravel()
    wx = (0.5 * (hi - lo) * w).ravel()
    Bt = collocation_matrix(test, x)
    Btr = collocation_matrix(trial, x)
    return Bt.T @ (wx[:, None] * Btr)


def compute_infsup(p: int, L: int, n: int) -> float:
    """Inf-sup constant for degree ``p``, ``L`` coarsening levels, ``n`` fine elements."""
    if p < 2:
        raise ValueError(f"degree must be >= 2, got {p}")
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if n < 2 ** L or n % 2 ** L:
        raise ValueError(f"n={n} is not divisible by 2**L={2 ** L}")
    fine = make_uniform_space(0.0, 1.0, n, p)
    coarse_mesh = fine
    for _ in range(L):
        coarse_mesh = dyadic_coarsen(coarse_mesh)
    q_space = SplineSpace1D(
        np.concatenate([[0.0] * p, coarse_mesh.breaks[1:-1], [1.0] * p]), p - 1)

    nq = p + 1
    MV = coupling_mass_matrix(fine, fine, fine, nq)[1:-1, 1:-1]
    MQ = coupling_mass_matrix(q_space, q_space, fine, nq)
    B = coupling_mass_matrix(q_space, fine, fine, nq)[:, 1:-1]

    cho = sla.cho_factor(MV)
    schur = B @ sla.cho_solve(cho, B.T)
    schur = 0.5 * (schur + schur.T)
    lam = sym_generalized_eigmin(schur, MQ)
    return float(np.sqrt(max(lam, 0.0)))
