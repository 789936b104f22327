"""Gaussian process with a linear trend and a heteroscedastic nugget.

The covariance is ``signal_variance * corr(x, x') + diag(noise)`` on
normalized inputs, with anisotropic lengthscales. Hyperparameters (log
lengthscales and log signal variance, natural log, each within [-4, 3])
maximize the marginal likelihood through seeded multi-start Nelder-Mead;
the reported optimum is never worse than any evaluated starting point.
Targets are standardized internally; the provided per-point noise variances
are rescaled accordingly.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.optimize

from .base import (
    ModelSpec,
    SurrogateModel,
    chol_with_jitter,
    gls_trend_fit,
    kernel_matrix,
    trend_basis,
)

LOG_BOUNDS = (-4.0, 3.0)


class GaussianProcess(SurrogateModel):
    def __init__(self, spec: ModelSpec, bounds=None):
        super().__init__(spec, bounds)
        hp = spec.hyperparameters
        self.kernel = hp["kernel"]
        self.n_starts = int(hp.get("n_starts", 10))
        self.optimize = bool(hp.get("optimize", True))
        self.seed = int(hp.get("seed", 0))
        self.fixed_lengthscales = hp.get("lengthscales")
        self.fixed_signal_variance = hp.get("signal_variance")

    # -- likelihood -------------------------------------------------------

    def _build_cov(self, theta: np.ndarray) -> np.ndarray:
        ls = np.exp(theta[:-1])
        sv = np.exp(theta[-1])
        K = sv * kernel_matrix(self.kernel, self._Xn, self._Xn, ls)
        K[np.diag_indices_from(K)] += self._noise
        return K

    def _log_marginal_likelihood(self, theta: np.ndarray) -> float:
        try:
            L, _ = chol_with_jitter(self._build_cov(theta), "GP likelihood")
        except Exception:
            return -np.inf
        try:
            beta, alpha, _ = gls_trend_fit(L, self._F, self._y, "GP likelihood")
        except Exception:
            return -np.inf
        resid = self._y - self._F @ beta
        n = self._y.size
        return float(
            -0.5 * resid @ alpha
            - np.log(np.diag(L)).sum()
            - 0.5 * n * np.log(2.0 * np.pi)
        )

    def _select_hyperparameters(self) -> np.ndarray:
        d = self._Xn.shape[1]
        if self.fixed_lengthscales is not None or not self.optimize:
            ls = self.fixed_lengthscales
            ls = np.ones(d) if ls is None else np.broadcast_to(np.asarray(ls, float), (d,))
            sv = 1.0 if self.fixed_signal_variance is None else self.fixed_signal_variance
            return np.concatenate([np.log(ls), [np.log(sv)]])
        rng = np.random.default_rng(self.seed)
        lo, hi = LOG_BOUNDS
        starts = [np.zeros(d + 1)]
        starts += [rng.uniform(lo, hi, size=d + 1) for _ in range(self.n_starts - 1)]
        candidates = [(self._log_marginal_likelihood(t), t) for t in starts]
        nll = lambda t: -self._log_marginal_likelihood(t)
        for start in starts:
            res = scipy.optimize.minimize(
                nll,
                start,
                method="Nelder-Mead",
                bounds=[(lo, hi)] * (d + 1),
                options={"maxiter": 400, "xatol": 1e-3, "fatol": 1e-6},
            )
            candidates.append((-res.fun, res.x))
        best = max(candidates, key=lambda c: c[0])
        self.log_marginal_likelihood_ = best[0]
        self.initial_log_marginal_likelihood_ = candidates[0][0]
        return best[1]

    # -- surface ----------------------------------------------------------

    def fit(self, X, y, noise=None) -> "GaussianProcess":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self._check_training(X, y)
        self._Xn = self._normalize(X)
        self._y_mean = float(y.mean())
        scale = float(y.std())
        self._y_scale = scale if scale > 0 else 1.0
        self._y = (y - self._y_mean) / self._y_scale
        if noise is None:
            self._noise = np.zeros(y.size)
        else:
            noise = np.asarray(noise, dtype=float)
            if noise.shape != y.shape:
                raise ValueError("noise vector must match y")
            self._noise = noise / self._y_scale**2
        self._F = trend_basis(self._Xn)

        self.theta_ = self._select_hyperparameters()
        self.lengthscales_ = np.exp(self.theta_[:-1])
        self.signal_variance_ = float(np.exp(self.theta_[-1]))
        K = self._build_cov(self.theta_)
        self._L, self.jitter_ = chol_with_jitter(K, f"GP({self.spec.task}) fit")
        self._beta, self._alpha, self._A_chol = gls_trend_fit(
            self._L, self._F, self._y, f"GP({self.spec.task}) fit"
        )
        if not hasattr(self, "log_marginal_likelihood_"):
            self.log_marginal_likelihood_ = self._log_marginal_likelihood(self.theta_)
            self.initial_log_marginal_likelihood_ = self.log_marginal_likelihood_
        return self

    def _cross_correlation(self, X) -> tuple[np.ndarray, np.ndarray]:
        Xq = self._normalize(X, check=True)
        k = self.signal_variance_ * kernel_matrix(
            self.kernel, Xq, self._Xn, self.lengthscales_
        )
        return Xq, k

    def predict_mean(self, X) -> np.ndarray:
        Xq, k = self._cross_correlation(X)
        mu = trend_basis(Xq) @ self._beta + k @ self._alpha
        return self._y_mean + self._y_scale * mu

    def predict_variance(self, X) -> np.ndarray:
        """Posterior variance including the trend-estimation term, clamped at 0."""
        Xq, k = self._cross_correlation(X)
        v = scipy.linalg.cho_solve((self._L, True), k.T)
        f = trend_basis(Xq)
        u = f - k @ scipy.linalg.cho_solve((self._L, True), self._F)
        trend_term = np.einsum(
            "ij,ji->i", u, scipy.linalg.cho_solve(self._A_chol, u.T)
        )
        var = self.signal_variance_ - np.einsum("ij,ji->i", k, v) + trend_term
        return np.maximum(var, 0.0) * self._y_scale**2
