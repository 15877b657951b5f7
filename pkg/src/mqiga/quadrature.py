"""Gauss-Legendre rules on [-1, 1] and their mapping to spline elements."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .spline import SplineSpace1D, eval_basis_array

__all__ = ("gauss_legendre", "quadrature_rule", "ElementQuadrature1D", "element_quadrature")


@lru_cache(maxsize=None)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n_points: int):
    """Nodes and weights of the ``n_points`` Gauss rule on [-1, 1]."""
    if n_points < 1:
        raise ValueError("need at least one quadrature point")
    return _leggauss(int(n_points))


quadrature_rule = gauss_legendre


class ElementQuadrature1D:
    """Quadrature points of every element of a 1D space with basis data.

    Attributes
    ----------
    points, weights : (ne, nq) arrays
    span : (ne,) int array
        Span of each element; local function ``a`` is global ``span - p + a``.
    basis : (ne, nq, nders + 1, p + 1) array
    """

    def __init__(self, space: SplineSpace1D, n_points: int, nders: int = 1):
        xi, w = gauss_legendre(n_points)
        br = space.breaks
        lo, hi = br[:-1, None], br[1:, None]
        self.space = space
        self.points = 0.5 * (hi - lo) * xi + 0.5 * (hi + lo)
        self.weights = 0.5 * (hi - lo) * w
        ne, nq = self.points.shape
        span, vals = eval_basis_array(space, self.points.ravel(), nders)
        self.span = span.reshape(ne, nq)[:, 0]
        self.basis = vals.reshape(ne, nq, nders + 1, space.degree + 1)
        self.sizes = (hi - lo).ravel()

    @property
    def first_index(self) -> np.ndarray:
        return self.span - self.space.degree


def element_quadrature(space: SplineSpace1D, n_points: int, nders: int = 1):
    return ElementQuadrature1D(space, n_points, nders)
