"""Column standardisation and the full-sample correlation matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import Dataset
from .errors import ConstantColumnError, DataError


@dataclass(frozen=True)
class CorrelationMatrix:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DataError("correlation matrix must be square")
        if not np.allclose(rho, rho.T, rtol=0, atol=1e-12):
            raise DataError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(rho), 1.0, rtol=0, atol=1e-12):
            raise DataError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(rho) > 1 + 1e-12):
            raise DataError("correlations must lie in [-1, 1]")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def p(self) -> int:
        return self.rho.shape[0]


def _column_sd(values: np.ndarray, names) -> tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    sd = values.std(axis=0, ddof=1)
    scale = np.maximum(np.abs(mean), 1.0)
    for j in range(values.shape[1]):
        # relative test: a column of identical large values leaves rounding noise
        if not sd[j] > 1e-13 * scale[j]:
            raise ConstantColumnError(j + 1, names[j])
    return mean, sd


def standardize(ds: Dataset) -> Dataset:
    """Centre every column and scale it to unit sample variance (``ddof=1``)."""
    mean, sd = _column_sd(ds.values, ds.var_names)
    return Dataset((ds.values - mean) / sd, ds.var_names)


def correlation_matrix(ds: Dataset) -> CorrelationMatrix:
    """Pearson correlation of every pair of columns over all rows."""
    mean, sd = _column_sd(ds.values, ds.var_names)
    z = (ds.values - mean) / sd
    rho = (z.T @ z) / (ds.n - 1)
    rho = 0.5 * (rho + rho.T)
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(np.clip(rho, -1.0, 1.0))
