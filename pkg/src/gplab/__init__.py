"""Gaussian-process emulation of a Bayesian inverse problem.

The package builds GP emulators of a parameter-to-observation map (or of the
negative log-likelihood) for a 1D elliptic model problem, forms the exact
posterior and six emulator-based approximations, and measures the posterior
error in Hellinger distance with randomly shifted lattice quadrature.
"""

__version__ = "0.1.0"

from .kernels import KernelSpec, bessel_k, kernel_eval, kernel_matrix
from .gp import DesignSet, PredictiveProcess, condition, native_norm
from .design import tensor_grid, fill_distance, separation_radius, mesh_ratio
from .forward_model import InverseProblem, fem_solve, generate_data
from .posterior import PosteriorSpec
from .quadrature_metrics import QuadratureRule, lattice_rule, hellinger, fit_rate

__all__ = [
    "KernelSpec",
    "bessel_k",
    "kernel_eval",
    "kernel_matrix",
    "DesignSet",
    "PredictiveProcess",
    "condition",
    "native_norm",
    "tensor_grid",
    "fill_distance",
    "separation_radius",
    "mesh_ratio",
    "InverseProblem",
    "fem_solve",
    "generate_data",
    "PosteriorSpec",
    "QuadratureRule",
    "lattice_rule",
    "hellinger",
    "fit_rate",
    "__version__",
]
