"""Multilevel quasi-interpolant stabilization for B-spline discretizations
of convection-diffusion-reaction problems."""
from .spline import (SplineSpace1D, TensorSpace, make_uniform_space, make_tensor_space,
                     eval_basis, greville_abscissae, prolongation_matrix)
from .hierarchy import MeshHierarchy, build_hierarchy, sigma_constant
from .quasi_interp import FluctuationOperator, build_fluctuation, fluctuation_apply
from .assembly import METHODS, ProblemSpec, StabConfig
from .infsup import compute_infsup
from .benchmarks import TESTS, get_test, run_case, solve

__version__ = "0.1.0"
