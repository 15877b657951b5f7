"""Quadrature assembly of the convection-diffusion-reaction forms and stabilizations.

All element loops are vectorized: for a tensor space the basis data on every
element and quadrature point is stored as ``(E, Q, A)`` arrays (elements,
quadrature points, local functions), local matrices are formed with
``einsum`` and scattered into a sparse matrix. Matrices follow the convention
``A[i, j] = a(N_j, N_i)`` (row = test function).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .hierarchy import MeshHierarchy
from .quadrature import ElementQuadrature1D
from .quasi_interp import FluctuationOperator
from .spline import TensorSpace

__all__ = (
    "ProblemSpec", "StabConfig", "DiscreteSystem", "TensorQuadrature",
    "METHODS", "default_cb", "stabilization_parameter", "supg_tau",
    "assemble_galerkin", "assemble_load", "assemble_mass", "assemble_stiffness",
    "assemble_streamline_matrix", "assemble_mq_stabilization", "assemble_supg",
    "dirichlet_dofs", "dirichlet_lift", "apply_dirichlet",
)

METHODS = ("galerkin", "supg", "gls", "mq", "mq_isotropic")

# Face ``2*d + s`` is the side ``s`` (0 low, 1 high) of direction ``d``.
Face = int


@dataclass
class ProblemSpec:
    """Data of ``-eps Lap u + b.grad u + c u = f`` on a box.

    Coefficient callables take points of shape ``(d, N)``; ``advection``
    returns ``(d, N)``, the scalar fields return ``(N,)``. Constants are
    accepted in place of callables. ``dirichlet`` maps face indices to
    boundary data; faces absent from it carry the natural (homogeneous
    Neumann / outflow) condition.
    """

    name: str
    dim: int
    epsilon: float = 0.0
    advection: object = None
    reaction: object = 0.0
    source: object = 0.0
    dirichlet: dict = field(default_factory=dict)
    exact: Optional[Callable] = None
    exact_grad: Optional[Callable] = None
    div_advection: object = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.advection is None:
            self.advection = np.zeros(self.dim)
        for face in self.dirichlet:
            if not 0 <= face < 2 * self.dim:
                raise ValueError(f"invalid face index {face}")

    def _scalar(self, f, X):
        if callable(f):
            return np.broadcast_to(np.asarray(f(X), dtype=float), X.shape[1:])
        return np.full(X.shape[1:], float(f))

    def advection_at(self, X) -> np.ndarray:
        b = self.advection
        if callable(b):
            return np.broadcast_to(np.asarray(b(X), dtype=float), X.shape)
        b = np.asarray(b, dtype=float).reshape((self.dim,) + (1,) * (X.ndim - 1))
        return np.broadcast_to(b, X.shape)

    def reaction_at(self, X):
        return self._scalar(self.reaction, X)

    def source_at(self, X):
        return self._scalar(self.source, X)

    def sigma_at(self, X):
        """``c - div(b)/2``."""
        return self.reaction_at(X) - 0.5 * self._scalar(self.div_advection, X)


@dataclass(frozen=True)
class StabConfig:
    method: str = "galerkin"
    levels: int = 1
    cb: float = 0.1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.cb < 0:
            raise ValueError("cb must be nonnegative")
        if self.method.startswith("mq") and self.levels < 1:
            raise ValueError("MQ stabilization needs at least one level")


def default_cb(dim: int) -> float:
    """0.1 in one dimension, 0.01 otherwise."""
    return 0.1 if dim == 1 else 0.01


def stabilization_parameter(space: TensorSpace, cfg: StabConfig) -> float:
    """``tau_h = cb * h`` with ``h`` the largest fine element edge."""
    return cfg.cb * space.mesh_size


@dataclass
class DiscreteSystem:
    matrix: object
    rhs: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    lift: np.ndarray

    @property
    def n_free(self) -> int:
        return self.free.size

    def expand(self, u_free) -> np.ndarray:
        """Full coefficient vector from free values and the lift."""
        u = self.lift.copy()
        u[self.free] = u_free
        return u


class TensorQuadrature:
    """Basis data of a tensor space on all elements and quadrature points.

    Attributes
    ----------
    X : (d, E, Q) physical quadrature points
    W : (E, Q) weights
    dofs : (E, A) global indices of the local functions
    sizes : (d, E) element edge lengths
    """

    def __init__(self, space: TensorSpace, n_points, nders: int = 1):
        d = space.ndim
        if np.isscalar(n_points):
            n_points = (int(n_points),) * d
        self.space = space
        self.nders = nders
        self.q1d = [ElementQuadrature1D(s, n, nders) for s, n in zip(space.directions, n_points)]
        ne = [q.points.shape[0] for q in self.q1d]
        nq = [q.points.shape[1] for q in self.q1d]
        npl = [s.degree + 1 for s in space.directions]
        self.E, self.Q, self.A = int(np.prod(ne)), int(np.prod(nq)), int(np.prod(npl))

        grids = np.meshgrid(*[np.arange(n) for n in ne], indexing="ij")
        self.elem_index = [g.ravel() for g in grids]

        X = []
        for k, q in enumerate(self.q1d):
            shape = [1] * (2 * d)
            shape[k], shape[d + k] = ne[k], nq[k]
            full = [*ne, *nq]
            X.append(np.broadcast_to(q.points.reshape(shape), full).reshape(self.E, self.Q))
        self.X = np.stack(X)
        W = np.ones([1] * (2 * d))
        for k, q in enumerate(self.q1d):
            shape = [1] * (2 * d)
            shape[k], shape[d + k] = ne[k], nq[k]
            W = W * q.weights.reshape(shape)
        self.W = W.reshape(self.E, self.Q)
        self.sizes = np.stack([q.sizes[idx] for q, idx in zip(self.q1d, self.elem_index)])

        dof = np.zeros([1] * (2 * d), dtype=np.int64)
        stride = 1
        for k in reversed(range(d)):
            shape = [1] * (2 * d)
            shape[k], shape[d + k] = ne[k], npl[k]
            local = self.q1d[k].first_index[:, None] + np.arange(npl[k])[None, :]
            dof = dof + stride * local.reshape(shape)
            stride *= space.shape[k]
        self.dofs = dof.reshape(self.E, self.A)
        self._cache = {}

    def basis(self, orders) -> np.ndarray:
        """``(E, Q, A)`` values of the mixed derivative with per-direction ``orders``."""
        orders = tuple(orders)
        if orders in self._cache:
            return self._cache[orders]
        d = self.space.ndim
        out = np.ones([1] * (3 * d))
        for k, (q, r) in enumerate(zip(self.q1d, orders)):
            b = q.basis[:, :, r, :]  # (ne, nq, npl)
            shape = [1] * (3 * d)
            shape[k], shape[d + k], shape[2 * d + k] = b.shape
            out = out * b.reshape(shape)
        out = out.reshape(self.E, self.Q, self.A)
        self._cache[orders] = out
        return out

    def value(self):
        return self.basis((0,) * self.space.ndim)

    def grad(self, k):
        orders = [0] * self.space.ndim
        orders[k] = 1
        return self.basis(orders)

    def second(self, k):
        orders = [0] * self.space.ndim
        orders[k] = 2
        return self.basis(orders)

    def laplacian(self):
        return sum(self.second(k) for k in range(self.space.ndim))

    def streamline(self, b):
        """``b . grad N`` at quadrature points; ``b`` is ``(d, E, Q)``."""
        return sum(b[k][:, :, None] * self.grad(k) for k in range(self.space.ndim))

    def scatter_matrix(self, local) -> sp.csr_matrix:
        """Sum ``(E, A, A)`` local matrices into a global sparse matrix."""
        n = self.space.dim
        rows = np.broadcast_to(self.dofs[:, :, None], local.shape).ravel()
        cols = np.broadcast_to(self.dofs[:, None, :], local.shape).ravel()
        return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))

    def scatter_vector(self, local) -> np.ndarray:
        return np.bincount(self.dofs.ravel(), weights=local.ravel(), minlength=self.space.dim)


def _n_points(space, extra=1):
    return max(space.degrees) + extra


def _form(test, weight, trial):
    return np.einsum("eqa,eq,eqb->eab", test, weight, trial, optimize=True)


def _scatter_sym(tq, basis, weight):
    # a + b == b + a in floating point, so this is exactly symmetric
    A = tq.scatter_matrix(_form(basis, weight, basis))
    return ((A + A.T) * 0.5).tocsr()


def assemble_mass(space: TensorSpace, weight=None, n_points=None) -> sp.csr_matrix:
    tq = TensorQuadrature(space, n_points or _n_points(space), 0)
    w = tq.W if weight is None else tq.W * weight(tq.X)
    return _scatter_sym(tq, tq.value(), w)


def assemble_stiffness(space: TensorSpace, n_points=None) -> sp.csr_matrix:
    """``K[i, j] = int grad N_j . grad N_i``."""
    tq = TensorQuadrature(space, n_points or _n_points(space), 1)
    return sum(_scatter_sym(tq, tq.grad(k), tq.W) for k in range(space.ndim))


def assemble_load(space: TensorSpace, prob: ProblemSpec, n_points=None) -> np.ndarray:
    """``F_i = (f, N_i)``; defaults to ``max(p) + 3`` points for layered sources."""
    tq = TensorQuadrature(space, n_points or _n_points(space, 3), 0)
    f = prob.source_at(tq.X)
    return tq.scatter_vector(np.einsum("eqa,eq->ea", tq.value(), tq.W * f))


def assemble_galerkin(space: TensorSpace, prob: ProblemSpec, n_points=None, load_points=None):
    """Full-basis Galerkin matrix and load vector.

    ``A[i, j] = eps (grad N_j, grad N_i) + (b . grad N_j, N_i) + (c N_j, N_i)``
    with the advection term in non-integrated form.
    """
    tq = TensorQuadrature(space, n_points or _n_points(space), 1)
    V = tq.value()
    local = np.zeros((tq.E, tq.A, tq.A))
    if prob.epsilon:
        for k in range(space.ndim):
            local += prob.epsilon * _form(tq.grad(k), tq.W, tq.grad(k))
    b = prob.advection_at(tq.X)
    if np.any(b):
        local += _form(V, tq.W, tq.streamline(b))
    c = prob.reaction_at(tq.X)
    if np.any(c):
        local += _form(V, tq.W * c, V)
    A = tq.scatter_matrix(local)
    F = assemble_load(space, prob, load_points)
    return A, F


def assemble_streamline_matrix(space: TensorSpace, prob: ProblemSpec, n_points=None):
    """``D[i, j] = int (b . grad N_j)(b . grad N_i)``."""
    tq = TensorQuadrature(space, n_points or _n_points(space), 1)
    Bs = tq.streamline(prob.advection_at(tq.X))
    return _scatter_sym(tq, Bs, tq.W)


def _apply_kron_t(mats, X, shape):
    # kron(mats)^T applied to the first axis of the (n, m) array X
    m = X.shape[1]
    Y = X.reshape(tuple(shape) + (m,))
    for k, A in enumerate(mats):
        Y = np.moveaxis(np.tensordot(A.T, Y, axes=(1, k)), 0, k)
    return Y.reshape(-1, m)


def assemble_mq_stabilization(space: TensorSpace, hier: MeshHierarchy,
                              fluct: FluctuationOperator, prob: ProblemSpec,
                              cfg: StabConfig, n_points=None) -> np.ndarray:
    """Dense ``S = tau_h sum_k c_k F_k^T D F_k``.

    ``D`` is the streamline matrix for ``mq`` and the gradient stiffness for
    ``mq_isotropic``; ``F_k`` is the level-k fluctuation operator.
    """
    if cfg.method not in ("mq", "mq_isotropic"):
        raise ValueError(f"method {cfg.method!r} has no MQ stabilization")
    if hier is None or fluct is None:
        raise ValueError("MQ stabilization needs a hierarchy and a fluctuation operator")
    if fluct.shape != space.shape:
        raise ValueError("fluctuation operator does not match the space")
    n = space.dim
    tau = stabilization_parameter(space, cfg)
    S = np.zeros((n, n))
    if tau == 0.0:
        return S
    if cfg.method == "mq":
        D = assemble_streamline_matrix(space, prob, n_points).toarray()
    else:
        D = assemble_stiffness(space, n_points).toarray()
    for k in range(fluct.L):
        mats = fluct.projector[k]
        # X = F^T D, then F^T D F = F^T X^T since D is symmetric
        X = D - _apply_kron_t(mats, D, space.shape)
        Y = np.ascontiguousarray(X.T)
        del X
        Y -= _apply_kron_t(mats, Y, space.shape)
        S += (tau * fluct.weights[k]) * Y
        del Y
    S = 0.5 * (S + S.T)
    return S


def supg_tau(h, bnorm, epsilon):
    """``h/(2|b|) (coth Pe - 1/Pe)`` with ``Pe = |b| h / (2 eps)``; ``0`` where ``|b| = 0``."""
    h = np.asarray(h, dtype=float)
    bnorm = np.asarray(bnorm, dtype=float)
    tau = np.zeros(np.broadcast(h, bnorm).shape)
    nz = bnorm > 0
    hb = np.broadcast_to(h, tau.shape)[nz]
    bb = np.broadcast_to(bnorm, tau.shape)[nz]
    if epsilon == 0:
        xi = np.ones_like(bb)
    else:
        pe = bb * hb / (2.0 * epsilon)
        with np.errstate(over="ignore", divide="ignore"):
            xi = np.where(pe > 1e-3, 1.0 / np.tanh(pe) - 1.0 / pe, pe / 3.0 - pe ** 3 / 45.0)
    tau[nz] = hb / (2.0 * bb) * xi
    return tau


def assemble_supg(space: TensorSpace, prob: ProblemSpec, cfg: StabConfig,
                  n_points=None, load_points=None):
    """Residual-based addends for ``supg`` and ``gls``.

    SUPG tests the strong residual with ``tau_K b.grad N_i``; GLS tests it
    with ``tau_K L N_i`` where ``L = -eps Lap + b.grad + c``. ``tau_K`` uses
    the largest edge of element K and ``|b|`` at the element centroid.
    """
    if cfg.method not in ("supg", "gls"):
        raise ValueError(f"method {cfg.method!r} is not residual based")
    tq = TensorQuadrature(space, n_points or _n_points(space), 2)
    centroid = np.stack([q.points.mean(axis=1)[idx] for q, idx in zip(tq.q1d, tq.elem_index)])
    bc = prob.advection_at(centroid)
    tau = supg_tau(tq.sizes.max(axis=0), np.linalg.norm(bc, axis=0), prob.epsilon)

    b = prob.advection_at(tq.X)
    c = prob.reaction_at(tq.X)
    V = tq.value()
    Bs = tq.streamline(b)
    residual_op = Bs + c[:, :, None] * V
    if prob.epsilon:
        residual_op = residual_op - prob.epsilon * tq.laplacian()
    test = Bs if cfg.method == "supg" else residual_op
    A = tq.scatter_matrix(tau[:, None, None] * _form(test, tq.W, residual_op))

    tql = TensorQuadrature(space, load_points or _n_points(space, 3), 2)
    bl = prob.advection_at(tql.X)
    test_l = tql.streamline(bl)
    if cfg.method == "gls":
        test_l = test_l + prob.reaction_at(tql.X)[:, :, None] * tql.value()
        if prob.epsilon:
            test_l = test_l - prob.epsilon * tql.laplacian()
    f = prob.source_at(tql.X)
    F = tql.scatter_vector(tau[:, None] * np.einsum("eqa,eq->ea", test_l, tql.W * f))
    return A, F


def dirichlet_dofs(space: TensorSpace, prob: ProblemSpec) -> np.ndarray:
    """Sorted global indices of basis functions that are nonzero on a Dirichlet face."""
    mask = np.zeros(space.shape, dtype=bool)
    for face in prob.dirichlet:
        d, side = divmod(face, 2)
        idx = [slice(None)] * space.ndim
        idx[d] = 0 if side == 0 else -1
        mask[tuple(idx)] = True
    return np.flatnonzero(mask.ravel())


def dirichlet_lift(space: TensorSpace, prob: ProblemSpec) -> np.ndarray:
    """Full coefficient vector collocating the Dirichlet data at boundary Greville points.

    A coefficient shared by several Dirichlet faces takes the datum of the face
    with the lowest index.
    """
    lift = np.zeros(space.shape)
    assigned = np.zeros(space.shape, dtype=bool)
    grev = space.greville_grid()
    for face in sorted(prob.dirichlet):
        g = prob.dirichlet[face]
        if g is None:
            raise ValueError(f"Dirichlet face {face} has no boundary data")
        d, side = divmod(face, 2)
        coords = list(grev)
        coords[d] = grev[d][[0 if side == 0 else -1]]
        X = np.stack([m.ravel() for m in np.meshgrid(*coords, indexing="ij")])
        vals = g(X) if callable(g) else float(g)
        vals = np.broadcast_to(np.asarray(vals, dtype=float), X.shape[1:])
        vals = vals.reshape([c.size for c in coords]).squeeze(axis=d)
        idx = [slice(None)] * space.ndim
        idx[d] = 0 if side == 0 else -1
        idx = tuple(idx)
        lift[idx] = np.where(assigned[idx], lift[idx], vals)
        assigned[idx] = True
    return lift.ravel()


def apply_dirichlet(A, F, space: TensorSpace, prob: ProblemSpec) -> DiscreteSystem:
    """Eliminate Dirichlet coefficients: ``A_ff u_f = F_f - A_fD lift_D``."""
    fixed = dirichlet_dofs(space, prob)
    free = np.setdiff1d(np.arange(space.dim), fixed)
    lift = dirichlet_lift(space, prob)
    rhs = F[free] - (A @ lift)[free]
    if sp.issparse(A):
        A = A.tocsr()
        K = A[free][:, free]
    else:
        K = A[np.ix_(free, free)]
    return DiscreteSystem(K, np.asarray(rhs, dtype=float), free, fixed, lift)
