"""Gaussian-process emulation with known Dirichlet boundaries on the unit cube."""

from .boundary import BoundaryConfig, BoundaryKind, MeanSpec, mean_function, project
from .designs import DyadicPoint, FullGrid, MultiIndex, SparseGrid, full_grid, sparse_grid
from .errors import BudgetError, ConfigError, DomainError, NumericalError, SingularModelError
from .fem import SurplusSet, combination, hierarchical_interp, lagrange_full
from .gp import GPModel, fit, posterior_cov, predict_batch, predict_mean, tridiag_inverse_1d
from .kernels import Family, KernelParams, gram, kernel_product

__all__ = [
    "BoundaryConfig", "BoundaryKind", "MeanSpec", "mean_function", "project",
    "DyadicPoint", "FullGrid", "MultiIndex", "SparseGrid", "full_grid", "sparse_grid",
    "BudgetError", "ConfigError", "DomainError", "NumericalError", "SingularModelError",
    "SurplusSet", "combination", "hierarchical_interp", "lagrange_full",
    "GPModel", "fit", "posterior_cov", "predict_batch", "predict_mean", "tridiag_inverse_1d",
    "Family", "KernelParams", "gram", "kernel_product",
]
