"""Correlation-method baselines: innovation autocovariance least squares.

For the random-walk signal model ``x[k+1] = x[k] + w[k]`` observed through a
predictor with fixed gain ``K``, the steady-state innovation autocovariances
are

    C_0 = M + R
    C_j = (1-K)**(j-1) * ((1-K) * M - K * R)        j >= 1

where ``M = (K**2 R + Q) / (2K - K**2)`` is the steady-state prediction error
variance.  Both baselines fit this linear model to sample autocovariances by
ordinary least squares: :func:`fit_mehra` solves for ``(M, R)`` and derives
``Q``; :func:`fit_als` eliminates ``M`` and solves for ``(Q, R)`` directly.
The two parameterisations span the same column space, so on noiseless
model lags they return the same answer.

Neither baseline has any notion of a signal that is not a random walk, so
jumps, fast oscillations and outliers all leak into the fitted ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .analysis import steady_state_error_variance
from .errors import FitError
from .estimator import EstimateTrace, EstimatorConfig, innovations, windows

__all__ = [
    "Method",
    "LagCovariances",
    "BaselineEstimate",
    "innovation_autocovariance",
    "theoretical_lag_model",
    "steady_state_error_variance",
    "fit_mehra",
    "fit_als",
    "run_baseline",
]

DEFAULT_LAGS = 4


class Method(str, Enum):
    MEHRA = "mehra"
    ALS = "als"


@dataclass(frozen=True)
class LagCovariances:
    """Sample autocovariances ``c[0..L]`` of ``n`` innovations."""

    c: np.ndarray
    L: int
    n: int


@dataclass(frozen=True)
class BaselineEstimate:
    q_hat: float
    r_hat: float
    residual: float
    q_clipped: bool = False
    r_clipped: bool = False

    @property
    def flag(self) -> str:
        return ",".join(
            name for name, hit in (("q_clipped", self.q_clipped), ("r_clipped", self.r_clipped)) if hit
        )


def _autocov(block: np.ndarray, L: int) -> np.ndarray:
    n = block.shape[-1]
    dev = block - block.mean(axis=-1, keepdims=True)
    out = np.empty(block.shape[:-1] + (L + 1,))
    for j in range(L + 1):
        out[..., j] = (dev[..., : n - j] * dev[..., j:]).sum(axis=-1) / n
    return out


def innovation_autocovariance(eta, L: int = DEFAULT_LAGS) -> LagCovariances:
    """Biased (``1/n``) sample autocovariances at lags ``0..L``."""
    eta = np.asarray(eta, dtype=float)
    if L < 1:
        raise ValueError(f"need at least one lag, got L={L}")
    if eta.ndim != 1 or eta.size < L + 2:
        raise ValueError(f"need at least L+2={L + 2} innovations, got {eta.size}")
    return LagCovariances(c=_autocov(eta, L), L=L, n=eta.size)


def theoretical_lag_model(K: float, M: float, R: float, j: int) -> float:
    """Model innovation autocovariance at lag ``j``."""
    if j == 0:
        return M + R
    return (1.0 - K) ** (j - 1) * ((1.0 - K) * M - K * R)


def _design_mr(K: float, L: int) -> np.ndarray:
    rows = [[1.0, 1.0]]
    for j in range(1, L + 1):
        g = (1.0 - K) ** (j - 1)
        rows.append([g * (1.0 - K), -g * K])
    return np.array(rows)


def _design_qr(K: float, L: int) -> np.ndarray:
    # substitute M = alpha * Q + beta * R
    alpha = 1.0 / (2.0 * K - K * K)
    beta = K * K * alpha
    a = _design_mr(K, L)
    return np.column_stack([a[:, 0] * alpha, a[:, 0] * beta + a[:, 1]])


@lru_cache(maxsize=64)
def _solver(method: Method, K: float, L: int):
    A = _design_mr(K, L) if method is Method.MEHRA else _design_qr(K, L)
    if np.linalg.matrix_rank(A) < 2:
        raise FitError(f"singular lag design for K={K}, L={L}")
    A.setflags(write=False)
    pinv = np.linalg.pinv(A)
    pinv.setflags(write=False)
    return A, pinv


def _solve(method: Method, K: float, c: np.ndarray):
    """Unconstrained least-squares ``(q, r, residual)`` for stacked lags."""
    L = c.shape[-1] - 1
    A, pinv = _solver(Method(method), float(K), L)
    theta = c @ pinv.T
    residual = np.linalg.norm(theta @ A.T - c, axis=-1)
    if method is Method.MEHRA:
        M, r = theta[..., 0], theta[..., 1]
        q = M * (2.0 * K - K * K) - K * K * r
    else:
        q, r = theta[..., 0], theta[..., 1]
    return q, r, residual


def _fit(method: Method, lags: LagCovariances, K: float) -> BaselineEstimate:
    if lags.L < 1:
        raise FitError("at least one lag is required")
    q, r, res = _solve(method, K, np.asarray(lags.c, dtype=float))
    q, r = float(q), float(r)
    return BaselineEstimate(
        q_hat=max(q, 0.0), r_hat=max(r, 0.0), residual=float(res),
        q_clipped=q < 0.0, r_clipped=r < 0.0,
    )


def fit_mehra(lags: LagCovariances, K: float) -> BaselineEstimate:
    """Fit ``(M, R)`` to the lag covariances, then ``Q = M(2K - K^2) - K^2 R``.

    Negative solutions are clipped to zero and flagged.
    """
    return _fit(Method.MEHRA, lags, K)


def fit_als(lags: LagCovariances, K: float) -> BaselineEstimate:
    """Scalar autocovariance least squares for ``(Q, R)``."""
    return _fit(Method.ALS, lags, K)


def run_baseline(stream, config: EstimatorConfig | None = None, method: Method | str = Method.MEHRA,
                 L: int = DEFAULT_LAGS) -> EstimateTrace:
    """Run a baseline over the same innovations and window as the estimator.

    At every step the current window of ``min(k, m) + 1`` innovations is
    turned into lag covariances and fitted.  Steps whose window is shorter
    than ``L + 2`` get NaN estimates flagged ``short_window``.
    """
    config = config or EstimatorConfig()
    method = Method(method)
    _solver(method, float(config.K), L)
    y = np.asarray(stream, dtype=float)
    eta = innovations(y, config.K)
    n = max(y.size - 1, 0)
    c0 = np.full(n, np.nan)
    q_hat = np.full(n, np.nan)
    r_hat = np.full(n, np.nan)
    flags = [""] * n
    for ks, block in windows(eta, config.m):
        if block.shape[-1] < L + 2:
            for k in ks:
                flags[k - 1] = "short_window"
            continue
        c = _autocov(block, L)
        q, r, _ = _solve(method, config.K, c)
        idx = ks - 1
        c0[idx] = c[:, 0]
        q_hat[idx] = np.maximum(q, 0.0)
        r_hat[idx] = np.maximum(r, 0.0)
        for i, qc, rc in zip(idx, q < 0.0, r < 0.0):
            if qc or rc:
                flags[i] = ",".join(name for name, hit in (("q_clipped", qc), ("r_clipped", rc)) if hit)
    ks = np.arange(1, y.size)
    return EstimateTrace(
        k=ks, y=y[1:], eta=eta[1:], c_hat=c0, r_hat=r_hat,
        warmup=ks < config.m, q_hat=q_hat, flag=flags,
    )
