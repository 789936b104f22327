"""Ordinary least squares on linear and full quadratic feature expansions."""

from __future__ import annotations

import numpy as np

from .base import ModelSpec, SingularSystemError, SurrogateModel


def quadratic_expansion(X: np.ndarray) -> np.ndarray:
    """[1, x, x^2, pairwise products] in a fixed column order."""
    n, d = X.shape
    cols = [np.ones((n, 1)), X, X**2]
    for i in range(d):
        for j in range(i + 1, d):
            cols.append((X[:, i] * X[:, j])[:, None])
    return np.hstack(cols)


class PolynomialLeastSquares(SurrogateModel):
    def __init__(self, spec: ModelSpec, bounds=None):
        super().__init__(spec, bounds)
        self.degree = 2 if spec.kind == "QP" else 1

    def _expand(self, X: np.ndarray) -> np.ndarray:
        if self.degree == 2:
            return quadratic_expansion(X)
        return np.hstack([np.ones((X.shape[0], 1)), X])

    def fit(self, X, y, noise=None) -> "PolynomialLeastSquares":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self._check_training(X, y)
        A = self._expand(self._normalize(X))
        coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
        if rank < A.shape[1]:
            raise SingularSystemError(
                f"{self.spec.kind}: rank-deficient design matrix "
                f"(rank {rank} < {A.shape[1]} columns)"
            )
        self.coefficients_ = coef
        return self

    def predict_mean(self, X) -> np.ndarray:
        return self._expand(self._normalize(X, check=True)) @ self.coefficients_
