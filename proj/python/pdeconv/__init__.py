"""Poisson deconvolution with sparsity priors (analysis and synthesis), solved by
product-space Douglas-Rachford splitting.

Images are 2-D float64 arrays indexed [row, column]; PSFs are 2-D arrays with
their origin at the center tap.
"""

from ._pdeconv import (
    ConvergenceError,
    Dictionary,
    DimensionError,
    DomainError,
    Error,
    InvalidArgument,
    box_kernel,
    deconvolve,
    eval_poisson,
    gcv_score,
    grad_poisson,
    log_grid,
    mae,
    prox_poisson,
    relative_mae,
    rescale_to_peak,
    richardson_lucy,
    select_gamma,
    simulate,
    soft_threshold,
    synthetic_scene,
)

__all__ = [
    "ConvergenceError",
    "Dictionary",
    "DimensionError",
    "DomainError",
    "Error",
    "InvalidArgument",
    "box_kernel",
    "deconvolve",
    "eval_poisson",
    "gcv_score",
    "grad_poisson",
    "log_grid",
    "mae",
    "prox_poisson",
    "relative_mae",
    "rescale_to_peak",
    "richardson_lucy",
    "select_gamma",
    "simulate",
    "soft_threshold",
    "synthetic_scene",
]
