"""Shared surrogate machinery: model specs, kernels, solves, normalization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

MODEL_KINDS = ("GP", "RBF", "IDW", "LR", "QP", "KNN", "DT", "RF")
TASKS = ("regression", "classification")

JITTER_LADDER = (1e-10, 1e-8, 1e-6)


class UnsupportedCapabilityError(RuntimeError):
    """The model kind does not provide the requested prediction capability."""


class SingularSystemError(RuntimeError):
    """A linear system stayed numerically singular through the jitter ladder."""


@dataclass
class ModelSpec:
    """Which surrogate to build and with what hyperparameters.

    Kernel defaults follow the benchmarking protocol: squared exponential for
    regression, absolute exponential for classification (GP/RBF/IDW family);
    kNN uses 15 neighbors and RF 100 trees unless overridden.
    """

    kind: str
    task: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        hp = dict(self.hyperparameters)
        if self.kind in ("GP", "RBF", "IDW"):
            default_kernel = "sqexp" if self.task == "regression" else "absexp"
            hp.setdefault("kernel", default_kernel)
        if self.kind == "KNN":
            hp.setdefault("k", 15)
        if self.kind == "RF":
            hp.setdefault("n_trees", 100)
        if self.kind == "IDW":
            hp.setdefault("power", 2.0)
        self.hyperparameters = hp


def kernel_matrix(kind: str, A: np.ndarray, B: np.ndarray, lengthscales) -> np.ndarray:
    """Correlation matrix between row sets A and B.

    sqexp: exp(-0.5 * sum((a-b)/l)^2); absexp: exp(-sum(|a-b|/l)).
    """
    ls = np.broadcast_to(np.asarray(lengthscales, dtype=float), (A.shape[1],))
    diff = A[:, None, :] - B[None, :, :]
    if kind == "sqexp":
        return np.exp(-0.5 * ((diff / ls) ** 2).sum(axis=2))
    if kind == "absexp":
        return np.exp(-(np.abs(diff) / ls).sum(axis=2))
    raise ValueError(f"unknown kernel {kind!r}")


def chol_with_jitter(K: np.ndarray, context: str) -> tuple[np.ndarray, float]:
    """Cholesky factor with escalating diagonal jitter; raises when it never holds."""
    for jitter in JITTER_LADDER:
        try:
            L = scipy.linalg.cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
            return L, jitter
        except scipy.linalg.LinAlgError:
            continue
    diag = np.abs(np.diag(K))
    raise SingularSystemError(
        f"{context}: covariance matrix not positive definite even with jitter "
        f"{JITTER_LADDER[-1]:g} (diagonal range [{diag.min():g}, {diag.max():g}])"
    )


def trend_basis(X: np.ndarray) -> np.ndarray:
    """Linear trend regressors [1, x]."""
    return np.hstack([np.ones((X.shape[0], 1)), X])


def gls_trend_fit(L: np.ndarray, F: np.ndarray, y: np.ndarray, context: str):
    """Generalized least squares of y on F under covariance LL^T.

    Returns (beta, alpha, A_chol) with alpha = K^{-1}(y - F beta) and
    A = F^T K^{-1} F factored for later variance terms.
    """
    Ki_F = scipy.linalg.cho_solve((L, True), F)
    Ki_y = scipy.linalg.cho_solve((L, True), y)
    A = F.T @ Ki_F
    try:
        A_chol = scipy.linalg.cho_factor(A)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"{context}: trend normal matrix singular (condition ~{np.linalg.cond(A):.2e})"
        ) from exc
    beta = scipy.linalg.cho_solve(A_chol, F.T @ Ki_y)
    alpha = scipy.linalg.cho_solve((L, True), y - F @ beta)
    return beta, alpha, A_chol


class SurrogateModel:
    """Base class: bounds-aware input normalization plus the common surface.

    ``bounds`` is an optional (lower, upper) pair of per-feature vectors; when
    given, inputs are min-max normalized onto the unit hypercube and queries
    outside the declared bounds raise a warning (prediction still proceeds:
    out-of-bounds is an extrapolation concern, not an error).
    """

    def __init__(self, spec: ModelSpec, bounds=None):
        self.spec = spec
        self.bounds = None
        if bounds is not None:
            lower, upper = (np.asarray(b, dtype=float) for b in bounds)
            self.bounds = (lower, upper)

    # -- shared plumbing -------------------------------------------------

    def _normalize(self, X: np.ndarray, check: bool = False) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.bounds is None:
            return X
        lower, upper = self.bounds
        if check and (np.any(X < lower - 1e-12) or np.any(X > upper + 1e-12)):
            warnings.warn(
                f"{self.spec.kind} query outside declared bounds; "
                "prediction is an extrapolation",
                stacklevel=3,
            )
        return (X - lower) / (upper - lower)

    def _check_training(self, X: np.ndarray, y: np.ndarray):
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y row counts differ")
        if X.shape[0] < 2:
            raise ValueError("need at least two training rows")

    # -- surface ----------------------------------------------------------

    def fit(self, X, y, noise=None) -> "SurrogateModel":
        raise NotImplementedError

    def predict_mean(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict_variance(self, X) -> np.ndarray:
        raise UnsupportedCapabilityError(
            f"{self.spec.kind} does not expose a predictive variance"
        )

    def classify(self, X) -> np.ndarray:
        """Thresholded indicator regression; tree models override with votes."""
        if self.spec.task != "classification":
            raise UnsupportedCapabilityError(
                f"{self.spec.kind} was fitted for {self.spec.task}, not classification"
            )
        return self.predict_mean(X) >= 0.5
