"""Mittag-Leffler function of a square complex matrix."""

from mlmatrix.driver import (
    BlockRecord,
    MLComputeOptions,
    MLComputeReport,
    err_gp,
    ml_matrix,
    relative_error,
)
from mlmatrix.errors import MLError
from mlmatrix.params import MLParams
from mlmatrix.scalar import ml_eval, ml_scalar

__all__ = [
    "BlockRecord",
    "MLComputeOptions",
    "MLComputeReport",
    "MLError",
    "MLParams",
    "err_gp",
    "ml_eval",
    "ml_matrix",
    "ml_scalar",
    "relative_error",
]

__version__ = "0.1.0"
