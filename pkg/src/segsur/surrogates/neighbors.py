"""Instance-based surrogates: inverse distance weighting and k nearest neighbors."""

from __future__ import annotations

import numpy as np

from .base import ModelSpec, SurrogateModel

_ZERO_DIST = 1e-12


class InverseDistanceWeighting(SurrogateModel):
    """Mean of stored targets weighted by inverse distance to the power (2 default).

    Queries sitting on a stored site return that site's value (mean over
    coincident sites), so the interpolant is exact at the data.
    """

    def __init__(self, spec: ModelSpec, bounds=None):
        super().__init__(spec, bounds)
        self.power = float(spec.hyperparameters["power"])

    def fit(self, X, y, noise=None) -> "InverseDistanceWeighting":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self._check_training(X, y)
        self._Xn = self._normalize(X)
        self._y = y
        return self

    def predict_mean(self, X) -> np.ndarray:
        Xq = self._normalize(X, check=True)
        diff = Xq[:, None, :] - self._Xn[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        out = np.empty(Xq.shape[0])
        for i in range(Xq.shape[0]):
            d = dist[i]
            on_site = d < _ZERO_DIST
            if on_site.any():
                out[i] = self._y[on_site].mean()
            else:
                w = 1.0 / d**self.power
                out[i] = (w @ self._y) / w.sum()
        return out


class KNearestNeighbors(SurrogateModel):
    """Mean (or thresholded vote) over the k nearest stored rows.

    Distance ties break toward the lowest stored row index. Repeated
    experiment rows are deliberately kept as-is, duplicates and all.
    """

    def __init__(self, spec: ModelSpec, bounds=None):
        super().__init__(spec, bounds)
        self.k = int(spec.hyperparameters["k"])

    def fit(self, X, y, noise=None) -> "KNearestNeighbors":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self._check_training(X, y)
        if self.k > y.size:
            raise ValueError(f"k={self.k} exceeds the {y.size} training rows")
        self._Xn = self._normalize(X)
        self._y = y
        return self

    def predict_mean(self, X) -> np.ndarray:
        Xq = self._normalize(X, check=True)
        diff = Xq[:, None, :] - self._Xn[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        order = np.argsort(dist, axis=1, kind="stable")[:, : self.k]
        return self._y[order].mean(axis=1)
