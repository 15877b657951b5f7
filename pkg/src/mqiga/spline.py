"""
Univariate and tensor-product B-spline spaces on open knot vectors.

Basis functions and their derivatives are evaluated with the Cox-de Boor
recursion in the triangular-table form (Piegl & Tiller, Algorithms A2.1-A2.3),
vectorized over evaluation points. Nested spaces are related through Boehm
knot insertion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = (
    "SplineSpace1D",
    "TensorSpace",
    "make_uniform_space",
    "make_tensor_space",
    "find_span",
    "eval_basis",
    "eval_basis_array",
    "greville_abscissae",
    "collocation_matrix",
    "is_subsequence",
    "prolongation_matrix",
    "evaluate_spline",
)


@dataclass(frozen=True, eq=False)
class SplineSpace1D:
    """Schoenberg space of degree ``degree`` on an open knot vector.

    Interior knots must be simple; end knots must have multiplicity
    ``degree + 1``.
    """

    knots: np.ndarray
    degree: int

    def __post_init__(self):
        t = np.asarray(self.knots, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "knots", t)
        p = self.degree
        if p < 1:
            raise ValueError(f"degree must be >= 1, got {p}")
        if t.ndim != 1 or t.size < 2 * (p + 1):
            raise ValueError("knot vector too short for the requested degree")
        if np.any(np.diff(t) < 0):
            raise ValueError("knot vector must be nondecreasing")
        if np.any(t[: p + 1] != t[0]) or np.any(t[-p - 1:] != t[-1]):
            raise ValueError("knot vector must be open (end multiplicity p+1)")
        if t[p] == t[p + 1] and t.size > 2 * (p + 1):
            raise ValueError("end knot multiplicity exceeds p+1")
        if t[-1] <= t[0]:
            raise ValueError("degenerate basic interval")
        interior = t[p + 1: t.size - p - 1]
        if np.any(np.diff(interior) == 0) or (
            interior.size and (interior[0] == t[0] or interior[-1] == t[-1])
        ):
            raise ValueError("interior knots must be simple")

    @property
    def dim(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @cached_property
    def breaks(self) -> np.ndarray:
        """Element boundaries (distinct knots)."""
        return np.unique(self.knots)

    @property
    def n_elements(self) -> int:
        return self.breaks.size - 1

    @cached_property
    def element_sizes(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def mesh_size(self) -> float:
        """Maximum element length."""
        return float(self.element_sizes.max())

    @cached_property
    def element_spans(self) -> np.ndarray:
        """Knot-span index of each element (index i with t_i < t_{i+1})."""
        return self.degree + np.arange(self.n_elements)

    def __repr__(self):
        return (f"SplineSpace1D(degree={self.degree}, n_elements={self.n_elements}, "
                f"domain={self.domain})")


def make_uniform_space(a: float, b: float, n_elements: int, degree: int) -> SplineSpace1D:
    """Open uniform knot vector on ``[a, b]`` with simple interior knots.

    Interior knots are generated as ``a + (b - a) * i / n`` so that dyadically
    coarsened knot vectors are bit-exact subsequences of finer ones.
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    if not b > a:
        raise ValueError(f"need b > a, got a={a}, b={b}")
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    i = np.arange(1, n_elements)
    interior = a + (b - a) * (i / n_elements)
    knots = np.concatenate([np.full(degree + 1, float(a)), interior,
                            np.full(degree + 1, float(b))])
    return SplineSpace1D(knots, degree)


def find_span(space: SplineSpace1D, x) -> np.ndarray:
    """Knot span index ``i`` with ``t_i <= x < t_{i+1}``; the last span is closed."""
    x = np.asarray(x, dtype=float)
    a, b = space.domain
    if np.any(x < a) or np.any(x > b) or np.any(~np.isfinite(x)):
        raise ValueError(f"evaluation point outside the basic interval [{a}, {b}]")
    span = np.searchsorted(space.knots, x, side="right") - 1
    return np.clip(span, space.degree, space.dim - 1)


def _basis_ders(knots, p, x, span, nders):
    # Vectorized Piegl & Tiller A2.3. Returns (npts, nders+1, p+1).
    npts = x.size
    ndu = np.zeros((npts, p + 1, p + 1))
    left = np.zeros((npts, p + 1))
    right = np.zeros((npts, p + 1))
    ndu[:, 0, 0] = 1.0
    for j in range(1, p + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            ndu[:, j, r] = right[:, r + 1] + left[:, j - r]
            temp = ndu[:, r, j - 1] / ndu[:, j, r]
            ndu[:, r, j] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        ndu[:, j, j] = saved

    ders = np.zeros((npts, nders + 1, p + 1))
    ders[:, 0, :] = ndu[:, :, p]
    a = np.zeros((npts, 2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:] = 0.0
        a[:, 0, 0] = 1.0
        for k in range(1, nders + 1):
            d = np.zeros(npts)
            rk, pk = r - k, p - k
            if r >= k:
                a[:, s2, 0] = a[:, s1, 0] / ndu[:, pk + 1, rk]
                d = a[:, s2, 0] * ndu[:, rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[:, s2, j] = (a[:, s1, j] - a[:, s1, j - 1]) / ndu[:, pk + 1, rk + j]
                d = d + a[:, s2, j] * ndu[:, rk + j, pk]
            if r <= pk:
                a[:, s2, k] = -a[:, s1, k - 1] / ndu[:, pk + 1, r]
                d = d + a[:, s2, k] * ndu[:, r, pk]
            ders[:, k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nders + 1):
        ders[:, k, :] *= fac
        fac *= p - k
    return ders


def eval_basis_array(space: SplineSpace1D, x, deriv_order: int = 0):
    """Nonzero basis functions and derivatives at many points.

    Returns
    -------
    span : (npts,) int array
        Span index; the nonzero functions are ``span - p, ..., span``.
    values : (npts, deriv_order + 1, p + 1) array
        ``values[:, r, a]`` is the r-th derivative of basis ``span - p + a``.
    """
    p = space.degree
    if not 0 <= deriv_order:
        raise ValueError("deriv_order must be nonnegative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    span = find_span(space, x)
    nders = min(deriv_order, p)
    vals = _basis_ders(space.knots, p, x, span, nders)
    if deriv_order > p:
        vals = np.concatenate(
            [vals, np.zeros((x.size, deriv_order - p, p + 1))], axis=1)
    return span, vals


def eval_basis(space: SplineSpace1D, x: float, deriv_order: int = 0):
    """Single-point version of :func:`eval_basis_array`.

    Returns ``(span, values)`` with ``values`` of shape ``(deriv_order+1, p+1)``.
    """
    if deriv_order > space.degree:
        raise ValueError("deriv_order must not exceed the degree")
    span, vals = eval_basis_array(space, [x], deriv_order)
    return int(span[0]), vals[0]


def greville_abscissae(space: SplineSpace1D) -> np.ndarray:
    """Knot averages ``(t_{i+1} + ... + t_{i+p}) / p``."""
    p, t = space.degree, space.knots
    csum = np.concatenate([[0.0], np.cumsum(t)])
    g = (csum[p + 1: p + 1 + space.dim] - csum[1: 1 + space.dim]) / p
    # pin endpoints against round-off in the cumulative sum
    g[0], g[-1] = t[0], t[-1]
    return np.clip(g, t[0], t[-1])


def collocation_matrix(space: SplineSpace1D, x, deriv_order: int = 0) -> np.ndarray:
    """Dense matrix ``M[i, j] = N_j^{(deriv_order)}(x_i)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    span, vals = eval_basis_array(space, x, deriv_order)
    p = space.degree
    out = np.zeros((x.size, space.dim))
    rows = np.repeat(np.arange(x.size), p + 1)
    cols = (span[:, None] - p + np.arange(p + 1)).ravel()
    out[rows, cols] = vals[:, deriv_order, :].ravel()
    return out


def evaluate_spline(space: SplineSpace1D, coeffs, x, deriv_order: int = 0) -> np.ndarray:
    """Evaluate ``sum_j coeffs[j] N_j^{(r)}(x)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != space.dim:
        raise ValueError("coefficient count does not match the space dimension")
    span, vals = eval_basis_array(space, x, deriv_order)
    p = space.degree
    idx = span[:, None] - p + np.arange(p + 1)
    return np.einsum("na,na...->n...", vals[:, deriv_order, :], coeffs[idx])


def is_subsequence(coarse: np.ndarray, fine: np.ndarray) -> bool:
    """True when ``coarse`` is a sub-multiset of ``fine`` (exact comparison)."""
    i = 0
    for t in fine:
        if i < coarse.size and coarse[i] == t:
            i += 1
    return i == coarse.size


def prolongation_matrix(coarse: SplineSpace1D, fine: SplineSpace1D) -> np.ndarray:
    """Knot-insertion matrix ``P`` with ``fine coeffs = P @ coarse coeffs``.

    Knots of ``fine`` missing from ``coarse`` are inserted one at a time
    (Boehm's algorithm); the composed matrix reproduces the coarse spline
    exactly in the fine basis.
    """
    if coarse.degree != fine.degree:
        raise ValueError("spaces must have the same degree")
    if coarse.domain != fine.domain or not is_subsequence(coarse.knots, fine.knots):
        raise ValueError("coarse knot vector is not nested in the fine knot vector")
    p = coarse.degree
    t = coarse.knots.copy()
    P = np.eye(coarse.dim)
    # knots to insert: multiset difference fine \ coarse
    missing = []
    i = 0
    for tk in fine.knots:
        if i < coarse.knots.size and coarse.knots[i] == tk:
            i += 1
        else:
            missing.append(tk)
    for xi in missing:
        k = int(np.searchsorted(t, xi, side="right") - 1)
        n = t.size - p - 1
        Q = np.zeros((n + 1, P.shape[1]))
        Q[: k - p + 1] = P[: k - p + 1]
        Q[k + 1:] = P[k:]
        for j in range(k - p + 1, k + 1):
            alpha = (xi - t[j]) / (t[j + p] - t[j])
            Q[j] = alpha * P[j] + (1.0 - alpha) * P[j - 1]
        P = Q
        t = np.insert(t, k + 1, xi)
    return P


@dataclass(frozen=True, eq=False)
class TensorSpace:
    """Tensor product of univariate spaces on an axis-aligned box.

    Global basis functions are numbered in C order over the per-direction
    indices, i.e. the last direction varies fastest.
    """

    directions: tuple[SplineSpace1D, ...]
    box: tuple[tuple[float, float], ...] = field(default=None)

    def __post_init__(self):
        dirs = tuple(self.directions)
        if not dirs:
            raise ValueError("need at least one direction")
        object.__setattr__(self, "directions", dirs)
        box = tuple(s.domain for s in dirs) if self.box is None else tuple(
            (float(a), float(b)) for a, b in self.box)
        if box != tuple(s.domain for s in dirs):
            raise ValueError("box edges must equal the per-direction basic intervals")
        object.__setattr__(self, "box", box)

    @property
    def ndim(self) -> int:
        return len(self.directions)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.directions)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(s.degree for s in self.directions)

    @property
    def n_elements(self) -> tuple[int, ...]:
        return tuple(s.n_elements for s in self.directions)

    @property
    def mesh_size(self) -> float:
        """Largest element edge over all directions."""
        return max(s.mesh_size for s in self.directions)

    def greville_grid(self) -> list[np.ndarray]:
        return [greville_abscissae(s) for s in self.directions]

    def evaluate(self, coeffs, points: Sequence[np.ndarray], deriv=None) -> np.ndarray:
        """Evaluate a spline on the tensor grid spanned by ``points``.

        ``deriv`` is a per-direction tuple of derivative orders.
        """
        c = np.asarray(coeffs, dtype=float).reshape(self.shape)
        deriv = (0,) * self.ndim if deriv is None else tuple(deriv)
        for d, (s, x) in enumerate(zip(self.directions, points)):
            B = collocation_matrix(s, x, deriv[d])
            c = np.moveaxis(np.tensordot(B, c, axes=(1, d)), 0, d)
        return c


def make_tensor_space(n_elements: Sequence[int], degrees: Sequence[int],
                      box=None) -> TensorSpace:
    """Uniform tensor space; ``box`` defaults to the unit cube."""
    n_elements, degrees = tuple(n_elements), tuple(degrees)
    if len(n_elements) != len(degrees):
        raise ValueError("n_elements and degrees must have the same length")
    box = [(0.0, 1.0)] * len(degrees) if box is None else list(box)
    dirs = tuple(make_uniform_space(a, b, n, p)
                 for (a, b), n, p in zip(box, n_elements, degrees))
    return TensorSpace(dirs)
