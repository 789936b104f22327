"""Radial basis interpolation with a linear trend and ridge regularization."""

from __future__ import annotations

import numpy as np

from .base import (
    ModelSpec,
    SurrogateModel,
    chol_with_jitter,
    gls_trend_fit,
    kernel_matrix,
    trend_basis,
)


class RbfInterpolant(SurrogateModel):
    """Kernel expansion plus [1, x] trend; weights from a regularized solve.

    Duplicate training sites (repeated experiments) are absorbed by the ridge
    term, escalated automatically when the kernel matrix is not numerically
    positive definite.
    """

    def __init__(self, spec: ModelSpec, bounds=None):
        super().__init__(spec, bounds)
        hp = spec.hyperparameters
        self.kernel = hp["kernel"]
        self.lengthscale = float(hp.get("lengthscale", 1.0))
        self.ridge = float(hp.get("ridge", 1e-10))

    def fit(self, X, y, noise=None) -> "RbfInterpolant":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self._check_training(X, y)
        self._Xn = self._normalize(X)
        K = kernel_matrix(self.kernel, self._Xn, self._Xn, self.lengthscale)
        K[np.diag_indices_from(K)] += self.ridge
        self._F = trend_basis(self._Xn)
        L, self.jitter_ = chol_with_jitter(K, f"RBF({self.spec.task}) fit")
        self._trend, self._weights, _ = gls_trend_fit(
            L, self._F, y, f"RBF({self.spec.task}) fit"
        )
        return self

    def predict_mean(self, X) -> np.ndarray:
        Xq = self._normalize(X, check=True)
        k = kernel_matrix(self.kernel, Xq, self._Xn, self.lengthscale)
        return trend_basis(Xq) @ self._trend + k @ self._weights
