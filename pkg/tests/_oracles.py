"""Independent reference computations shared by the test modules."""
import numpy as np

from mqiga.spline import evaluate_spline, greville_abscissae


def mq_energy_pointwise(fine, coarse_spaces, weights, v, tau, b=1.0, n_gauss=20):
    """``tau * sum_k c_k int (b (v - Pi_k v)')^2`` on a 1D space.

    ``Pi_k v`` is built directly as the coarse spline whose coefficients are
    the values of ``v`` at the coarse Greville points; both splines are
    evaluated pointwise on a Gauss rule much finer than the assembly rule.
    """
    xi, w = np.polynomial.legendre.leggauss(n_gauss)
    br = fine.breaks
    lo, hi = br[:-1, None], br[1:, None]
    x = (0.5 * (hi - lo) * xi + 0.5 * (hi + lo)).ravel()
    wx = (0.5 * (hi - lo) * w).ravel()
    dv = evaluate_spline(fine, v, x, 1)
    total = 0.0
    for coarse, c in zip(coarse_spaces, weights):
        q = evaluate_spline(fine, v, greville_abscissae(coarse))
        dq = evaluate_spline(coarse, q, x, 1)
        total += c * np.sum(wx * (b * (dv - dq)) ** 2)
    return tau * total


def bernstein_mass(p):
    """Exact mass matrix of the degree-p Bernstein basis on [0, 1]."""
    from math import comb
    return np.array([[comb(p, i) * comb(p, j) / (comb(2 * p, i + j) * (2 * p + 1))
                      for j in range(p + 1)] for i in range(p + 1)])
