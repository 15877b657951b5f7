"""Benchmark problems, discrete solves and the quantities reported for them."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (DiscreteSystem, ProblemSpec, StabConfig, apply_dirichlet,
                       assemble_galerkin, assemble_mq_stabilization, assemble_supg)
from .hierarchy import build_hierarchy
from .linalg import SingularMatrixError, condition_number_2, lu_solve
from .quadrature import gauss_legendre
from .quasi_interp import build_fluctuation
from .spline import TensorSpace, make_tensor_space

__all__ = (
    "TestCase", "TESTS", "get_test", "test1", "test2", "test3", "test4", "test5", "test6",
    "DiscreteSolution", "BenchmarkReport", "build_system", "solve", "error_norms",
    "layer_indicators", "convergence_rates", "convergence_sweep", "condition_sweep",
    "run_case", "max_deviation_1d",
)

# -- problem definitions ---------------------------------------------------


def test1() -> ProblemSpec:
    """``u' + u = 5 * 1_[1/3, 2/3]``, ``u(0) = 0``; outflow at x = 1 left free."""
    a, b = 1.0 / 3.0, 2.0 / 3.0
    top = 5.0 * (1.0 - math.exp(-(b - a)))

    def f(X):
        x = X[0]
        return np.where((x >= a) & (x <= b), 5.0, 0.0)

    def exact(X):
        x = X[0]
        return np.where(x < a, 0.0, np.where(x <= b, 5.0 * (1.0 - np.exp(-(x - a))),
                                             top * np.exp(-(x - b))))

    def exact_grad(X):
        x = X[0]
        return np.where(x < a, 0.0, np.where(x <= b, 5.0 * np.exp(-(x - a)),
                                             -top * np.exp(-(x - b))))[None]

    return ProblemSpec("test1", 1, epsilon=0.0, advection=(1.0,), reaction=1.0,
                       source=f, dirichlet={0: 0.0}, exact=exact, exact_grad=exact_grad)


def test2(epsilon: float = 1e-5) -> ProblemSpec:
    """``-eps u'' + u' = 1`` with homogeneous Dirichlet data."""
    eps = epsilon
    denom = -math.expm1(-1.0 / eps)

    def exact(X):
        x = X[0]
        return x - np.exp((x - 1.0) / eps) * (-np.expm1(-x / eps)) / denom

    def exact_grad(X):
        x = X[0]
        return (1.0 - np.exp((x - 1.0) / eps) / (eps * denom))[None]

    return ProblemSpec("test2", 1, epsilon=eps, advection=(1.0,), reaction=0.0,
                       source=1.0, dirichlet={0: 0.0, 1: 0.0},
                       exact=exact, exact_grad=exact_grad)


def test3() -> ProblemSpec:
    """Parabolic boundary layers, ``b = (0, 1 + x^2)``; natural condition on y = 1."""
    def b(X):
        return np.stack([np.zeros_like(X[0]), 1.0 + X[0] ** 2])

    def lateral(X):
        return 1.0 - X[1]

    return ProblemSpec("test3", 2, epsilon=1e-8, advection=b, reaction=0.0, source=0.0,
                       dirichlet={0: lateral, 1: lateral, 2: 1.0})


def test4() -> ProblemSpec:
    """Two internal layers: ``b = (1, 0)``, ``f = 16(1 - 2x)`` on [1/4, 3/4]^2."""
    def f(X):
        x, y = X
        inside = (x >= 0.25) & (x <= 0.75) & (y >= 0.25) & (y <= 0.75)
        return np.where(inside, 16.0 * (1.0 - 2.0 * x), 0.0)

    return ProblemSpec("test4", 2, epsilon=1e-5, advection=(1.0, 0.0), reaction=0.0,
                       source=f, dirichlet={0: 0.0, 1: 0.0, 2: 0.0, 3: 0.0})


def test4_reference(X):
    """Approximate solution ``(4x - 1)(3 - 4x)`` on the inner square, zero elsewhere."""
    x, y = X
    inside = (x >= 0.25) & (x <= 0.75) & (y >= 0.25) & (y <= 0.75)
    return np.where(inside, (4 * x - 1) * (3 - 4 * x), 0.0)


def test5() -> ProblemSpec:
    """Rotating flow ``b = (-y, x)`` with a discontinuous inflow profile on y = 0."""
    def b(X):
        return np.stack([-X[1], X[0]])

    def inflow(X):
        x = X[0]
        return np.where((x > 1.0 / 3.0) & (x < 2.0 / 3.0), 1.0, 0.0)

    return ProblemSpec("test5", 2, epsilon=1e-7, advection=b, reaction=0.0, source=0.0,
                       dirichlet={0: 0.0, 1: 0.0, 2: inflow})


def test6(width: float = 0.004, center: float = 2.0 / 3.0) -> ProblemSpec:
    """Pure advection ``d_y u = (1 - tanh^2((y - a)/eps)) / (2 eps)``, ``u = 0`` on y = 0."""
    eps, a = width, center

    def f(X):
        return (1.0 - np.tanh((X[1] - a) / eps) ** 2) / (2.0 * eps)

    def exact(X):
        return 0.5 * (np.tanh((X[1] - a) / eps) + 1.0)

    def exact_grad(X):
        return np.stack([np.zeros_like(X[0]), f(X)])

    return ProblemSpec("test6", 2, epsilon=0.0, advection=(0.0, 1.0), reaction=0.0,
                       source=f, dirichlet={2: 0.0}, exact=exact, exact_grad=exact_grad)


@dataclass(frozen=True)
class TestCase:
    """A benchmark problem together with its default discretization."""

    number: int
    factory: object
    degrees: tuple
    elements: tuple
    levels: int
    cb: float

    def problem(self) -> ProblemSpec:
        return self.factory()

    def levels_for(self, degrees) -> int:
        # parabolic-layer test uses L = 5 for quintics
        if self.number == 3 and max(degrees) >= 5:
            return 5
        return self.levels


TESTS = {
    1: TestCase(1, test1, (3,), (512,), 4, 0.1),
    2: TestCase(2, test2, (5,), (512,), 5, 0.1),
    3: TestCase(3, test3, (3, 3), (64, 64), 4, 0.01),
    4: TestCase(4, test4, (3, 3), (64, 64), 5, 0.01),
    5: TestCase(5, test5, (3, 3), (64, 64), 4, 0.01),
    6: TestCase(6, test6, (2, 3), (8, 256), 4, 0.01),
}


def get_test(number: int) -> TestCase:
    if number not in TESTS:
        raise KeyError(f"unknown test {number}; expected one of {sorted(TESTS)}")
    return TESTS[number]


# -- solving ---------------------------------------------------------------


@dataclass
class DiscreteSolution:
    space: TensorSpace
    coefficients: np.ndarray
    config: StabConfig
    problem: str
    residual: float = 0.0
    dofs: int = 0
    seconds: float = 0.0

    def __post_init__(self):
        if self.coefficients.size != self.space.dim:
            raise ValueError("coefficient count does not match the space dimension")

    def __call__(self, points, deriv=None):
        """Evaluate on the tensor grid spanned by the per-direction ``points``."""
        return self.space.evaluate(self.coefficients, points, deriv)


def build_system(prob: ProblemSpec, space: TensorSpace, cfg: StabConfig) -> DiscreteSystem:
    """Assemble ``cfg.method`` and eliminate Dirichlet coefficients."""
    if prob.dim != space.ndim:
        raise ValueError("problem and space dimensions differ")
    A, F = assemble_galerkin(space, prob)
    if cfg.method in ("supg", "gls"):
        As, Fs = assemble_supg(space, prob, cfg)
        A, F = A + As, F + Fs
    elif cfg.method in ("mq", "mq_isotropic"):
        hier = build_hierarchy(space, cfg.levels)
        S = assemble_mq_stabilization(space, hier, build_fluctuation(hier), prob, cfg)
        S += A.toarray()
        A = S
    return apply_dirichlet(A, F, space, prob)


def _solve_system(system: DiscreteSystem) -> np.ndarray:
    K = system.matrix
    if sp.issparse(K):
        try:
            lu = spla.splu(sp.csc_matrix(K))
        except RuntimeError as err:
            raise SingularMatrixError(str(err)) from err
        x = lu.solve(system.rhs)
        if not np.all(np.isfinite(x)):
            raise SingularMatrixError("sparse LU produced non-finite values")
        return x
    return lu_solve(K, system.rhs)


def solve(prob: ProblemSpec, space: TensorSpace, cfg: StabConfig) -> DiscreteSolution:
    """Assemble, constrain and solve; the lift is merged into the coefficients."""
    t0 = time.perf_counter()
    system = build_system(prob, space, cfg)
    u_free = _solve_system(system)
    res = system.matrix @ u_free - system.rhs
    rel = float(np.linalg.norm(res) / max(np.linalg.norm(system.rhs), np.finfo(float).tiny))
    return DiscreteSolution(space, system.expand(u_free), cfg, prob.name, rel,
                            system.n_free, time.perf_counter() - t0)


# -- post-processing -------------------------------------------------------


def _quad_grid(space: TensorSpace, n_points):
    pts, wts = [], []
    xi, w = gauss_legendre(n_points)
    for s in space.directions:
        br = s.breaks
        lo, hi = br[:-1, None], br[1:, None]
        pts.append((0.5 * (hi - lo) * xi + 0.5 * (hi + lo)).ravel())
        wts.append((0.5 * (hi - lo) * w).ravel())
    return pts, wts


def error_norms(sol: DiscreteSolution, exact, exact_grad, n_points: Optional[int] = None):
    """Relative L2 and full H1 errors by Gauss quadrature on the fine elements.

    Uses ``max(p) + 3`` points per direction unless ``n_points`` is given.
    """
    space = sol.space
    n_points = n_points or max(space.degrees) + 3
    pts, wts = _quad_grid(space, n_points)
    mesh = np.meshgrid(*pts, indexing="ij")
    X = np.stack([m.ravel() for m in mesh])
    W = np.ones(1)
    for w in wts:
        W = np.multiply.outer(W, w)
    W = W.ravel()

    uh = sol(pts).ravel()
    u = np.broadcast_to(np.asarray(exact(X), dtype=float), uh.shape)
    gu = np.broadcast_to(np.asarray(exact_grad(X), dtype=float), (space.ndim, uh.size))
    e0 = np.sum(W * (u - uh) ** 2)
    n0 = np.sum(W * u ** 2)
    e1, n1 = e0, n0
    for k in range(space.ndim):
        deriv = [0] * space.ndim
        deriv[k] = 1
        g = sol(pts, deriv).ravel()
        e1 += np.sum(W * (gu[k] - g) ** 2)
        n1 += np.sum(W * gu[k] ** 2)
    return float(np.sqrt(e0 / n0)), float(np.sqrt(e1 / n1))


def layer_indicators(sol: DiscreteSolution, grid: int = 256):
    """Undershoot and outflow-variation indicators on the unit square.

    ``min = -min u_h`` over ``0.4 <= x <= 0.6`` and ``diff = max u_h - min u_h``
    over ``x >= 0.8``; each region (all y) is sampled on a ``grid x grid``
    uniform lattice.
    """
    if sol.space.ndim != 2:
        raise ValueError("layer indicators are defined for 2D solutions")
    y = np.linspace(0.0, 1.0, grid)
    u_mid = sol([np.linspace(0.4, 0.6, grid), y])
    u_out = sol([np.linspace(0.8, 1.0, grid), y])
    return float(-u_mid.min()), float(u_out.max() - u_out.min())


def max_deviation_1d(sol: DiscreteSolution, reference, x_max: float, n: int = 4001):
    """``max |u_h - reference|`` over ``[0, x_max]`` sampled at ``n`` points."""
    x = np.linspace(0.0, x_max, n)
    return float(np.max(np.abs(sol([x]) - reference(x[None]))))


@dataclass
class BenchmarkReport:
    test: int
    method: str
    degrees: tuple
    elements: tuple
    levels: Optional[int]
    cb: Optional[float]
    rel_l2: Optional[float] = None
    rel_h1: Optional[float] = None
    rate_l2: Optional[float] = None
    rate_h1: Optional[float] = None
    min: Optional[float] = None
    diff: Optional[float] = None
    cond: Optional[float] = None
    dofs: Optional[int] = None
    seconds: Optional[float] = None
    extra: dict = field(default_factory=dict)


def convergence_rates(errors: Sequence[float]) -> list:
    """``log2(e_n / e_2n)`` for successive entries; empty for a single mesh."""
    e = list(errors)
    return [math.log2(e[i] / e[i + 1]) for i in range(len(e) - 1)]


def run_case(test: int, method: str, degrees=None, elements=None, levels=None, cb=None,
             indicators: bool = False, grid: int = 256, cond: bool = False) -> tuple:
    """Solve one benchmark configuration; returns ``(report, solution)``."""
    tc = get_test(test)
    prob = tc.problem()
    degrees = tuple(degrees or tc.degrees)
    elements = tuple(elements or tc.elements)
    if len(degrees) == 1 and prob.dim > 1:
        degrees = degrees * prob.dim
    if len(elements) == 1 and prob.dim > 1:
        elements = elements * prob.dim
    levels = levels or tc.levels_for(degrees)
    cb = tc.cb if cb is None else cb
    cfg = StabConfig(method, levels, cb)
    space = make_tensor_space(elements, degrees)
    sol = solve(prob, space, cfg)
    mq = method.startswith("mq")
    rep = BenchmarkReport(test, method, degrees, elements, levels if mq else None,
                          cb if method != "galerkin" else None,
                          dofs=sol.dofs, seconds=sol.seconds)
    if prob.exact is not None:
        rep.rel_l2, rep.rel_h1 = error_norms(sol, prob.exact, prob.exact_grad)
    if indicators and prob.dim == 2:
        rep.min, rep.diff = layer_indicators(sol, grid)
    if cond:
        rep.cond = condition_number_2(build_system(prob, space, cfg).matrix)
    return rep, sol


def convergence_sweep(test: int, method: str, degrees, meshes: Sequence, levels=None,
                      cb=None) -> list:
    """Errors on a dyadic family of meshes plus successive rates."""
    reports = [run_case(test, method, degrees, m if isinstance(m, (tuple, list)) else (m,),
                        levels, cb)[0] for m in meshes]
    for prev, rep in zip(reports, reports[1:]):
        rep.rate_l2 = math.log2(prev.rel_l2 / rep.rel_l2)
        rep.rate_h1 = math.log2(prev.rel_h1 / rep.rel_h1)
    return reports


def condition_sweep(test: int, degree, meshes: Sequence, methods: Sequence[str],
                    levels=None, cb=None, max_dim: int = 6000) -> list:
    """Spectral condition number of the constrained system per method and mesh.

    Systems larger than ``max_dim`` are skipped and reported with ``cond=None``.
    """
    tc = get_test(test)
    prob = tc.problem()
    out = []
    for m in meshes:
        elements = tuple(m) if isinstance(m, (tuple, list)) else (m,) * prob.dim
        degrees = tuple(degree) if isinstance(degree, (tuple, list)) else (degree,) * prob.dim
        space = make_tensor_space(elements, degrees)
        for method in methods:
            L = levels or tc.levels_for(degrees)
            cfg = StabConfig(method, L, tc.cb if cb is None else cb)
            system = build_system(prob, space, cfg)
            rep = BenchmarkReport(test, method, degrees, elements,
                                  L if method.startswith("mq") else None,
                                  None if method == "galerkin" else cfg.cb,
                                  dofs=system.n_free)
            if system.n_free <= max_dim:
                rep.cond = condition_number_2(system.matrix)
            out.append(rep)
    return out
