"""Benchmark problems, initial designs and prior fitting."""
from .benchmarks import (
    PriorBundle,
    Problem,
    auf_observation,
    auf_true_means,
    goldstein_grid,
    goldstein_price,
    make_auf,
    make_equal_prior,
    make_goldstein,
    make_problem,
)
from .design import default_design_size, latin_hypercube_design
from .mle import KernelHyperparams, fit_hyperparams, fit_mle_prior, loo_residuals, se_covariance

__all__ = [
    "KernelHyperparams",
    "PriorBundle",
    "Problem",
    "auf_observation",
    "auf_true_means",
    "default_design_size",
    "fit_hyperparams",
    "fit_mle_prior",
    "goldstein_grid",
    "goldstein_price",
    "latin_hypercube_design",
    "loo_residuals",
    "make_auf",
    "make_equal_prior",
    "make_goldstein",
    "make_problem",
    "se_covariance",
]
