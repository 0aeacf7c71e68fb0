"""Physics-informed neural networks for lattice beam displacement."""

from ._core import (
    DataError,
    NumericalError,
    analytic_residual,
    builtin_dataset,
    compare,
    error_histogram,
    export_dataset,
    fit_baseline,
    gradcheck,
    load_dataset,
    mae,
    mse,
    pde,
    r2,
    split_indices,
    train,
)

__all__ = [
    "DataError",
    "NumericalError",
    "analytic_residual",
    "builtin_dataset",
    "compare",
    "error_histogram",
    "export_dataset",
    "fit_baseline",
    "gradcheck",
    "load_dataset",
    "mae",
    "mse",
    "pde",
    "r2",
    "split_indices",
    "train",
]
