"""Greville quasi-interpolation onto coarse levels and the fluctuation operator.

For a level k the quasi-interpolant of a fine spline ``u`` is

    Pi_k u = sum_i u(tbar_i^coarse) N_i^coarse,

which in fine coefficients is ``P_k @ G_k @ u`` with ``G_k`` the fine basis
sampled at coarse Greville points and ``P_k`` the knot-insertion matrix. The
tensor-product operator is the Kronecker product of the per-direction ones
and is never formed explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hierarchy import MeshHierarchy
from .spline import (SplineSpace1D, collocation_matrix, greville_abscissae,
                     is_subsequence, prolongation_matrix)

__all__ = ("sampling_matrix", "FluctuationOperator", "build_fluctuation",
           "fluctuation_apply", "fluctuation_matrix")


def sampling_matrix(fine: SplineSpace1D, coarse: SplineSpace1D) -> np.ndarray:
    """``G[i, j] = N_j^fine(tbar_i^coarse)``."""
    if fine.degree != coarse.degree:
        raise ValueError("spaces must have the same degree")
    if fine.domain != coarse.domain or not is_subsequence(coarse.knots, fine.knots):
        raise ValueError("coarse knot vector is not nested in the fine knot vector")
    return collocation_matrix(fine, greville_abscissae(coarse))


@dataclass(frozen=True, eq=False)
class FluctuationOperator:
    """Per-level, per-direction matrices realizing ``Id - Pi_k``.

    ``sampling[k][d]`` and ``prolongation[k][d]`` belong to level ``k + 1``;
    ``projector[k][d] = prolongation[k][d] @ sampling[k][d]`` is the 1D
    quasi-interpolant acting on fine coefficients.
    """

    shape: tuple[int, ...]
    sampling: tuple[tuple[np.ndarray, ...], ...]
    prolongation: tuple[tuple[np.ndarray, ...], ...]
    projector: tuple[tuple[np.ndarray, ...], ...]
    weights: tuple[float, ...]

    @property
    def L(self) -> int:
        return len(self.weights)


def build_fluctuation(hier: MeshHierarchy) -> FluctuationOperator:
    samp, prol, proj = [], [], []
    for lv in hier.levels:
        G = tuple(sampling_matrix(f, c) for f, c in zip(hier.fine.directions, lv.spaces))
        P = tuple(prolongation_matrix(c, f) for f, c in zip(hier.fine.directions, lv.spaces))
        samp.append(G)
        prol.append(P)
        proj.append(tuple(p @ g for p, g in zip(P, G)))
    return FluctuationOperator(hier.fine.shape, tuple(samp), tuple(prol), tuple(proj),
                               tuple(float(w) for w in hier.weights))


def _apply_kron(mats, coeffs, shape):
    # coeffs: (prod(shape), *batch) -> same, applying kron(mats) to the first axis
    batch = coeffs.shape[1:]
    x = coeffs.reshape(shape + batch)
    for d, A in enumerate(mats):
        x = np.moveaxis(np.tensordot(A, x, axes=(1, d)), 0, d)
    return x.reshape((-1,) + batch)


def fluctuation_apply(op: FluctuationOperator, level: int, coeffs) -> np.ndarray:
    """Fine coefficients of ``u - Pi_level u``.

    ``coeffs`` is either the fine coefficient tensor (shape ``op.shape``) or a
    flat array whose first axis has length ``prod(op.shape)``; extra trailing
    axes are treated as a batch of vectors.
    """
    if not 1 <= level <= op.L:
        raise ValueError(f"level must be in 1..{op.L}, got {level}")
    c = np.asarray(coeffs, dtype=float)
    n = int(np.prod(op.shape))
    if c.shape[: len(op.shape)] == op.shape and c.ndim == len(op.shape):
        flat = c.reshape(n)
        return (flat - _apply_kron(op.projector[level - 1], flat, op.shape)).reshape(op.shape)
    if c.shape[0] != n:
        raise ValueError(f"coefficient shape {c.shape} does not match space shape {op.shape}")
    return c - _apply_kron(op.projector[level - 1], c, op.shape)


def fluctuation_matrix(op: FluctuationOperator, level: int) -> np.ndarray:
    """Explicit dense ``Id - kron(P_k G_k)``; for small spaces and tests."""
    K = np.ones((1, 1))
    for A in op.projector[level - 1]:
        K = np.kron(K, A)
    return np.eye(K.shape[0]) - K
