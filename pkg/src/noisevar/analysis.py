"""Error analysis of the mean-variance estimator, in executable form.

With the initial estimate ``x_hat_0 = y_0`` every innovation splits into a
noise-driven and a signal-driven part,

    eta1[k] = sum_{i=1..k} (1-K)**(i-1) * dv[k-i]      dv[k] = v[k+1] - v[k]
    eta2[k] = sum_{i=1..k} (1-K)**(i-1) * w[k-i]       w[k]  = x[k+1] - x[k]

and the windowed sample variance decomposes as ``s11 + s22 + 2 * s12``.
``s11`` tends to ``2R / (2 - K)``, so the noise estimate is biased upwards
by roughly ``(2 - K) / (2m) * sum((w - mean(w))**2)`` over the window.

These functions are the oracle layer for the tests and back the
``diagnose`` command.  They describe the mean estimator only; nothing here
claims to hold for the MAD estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import _mean_variance, windows

__all__ = [
    "InnovationDecomposition",
    "Diagnosis",
    "steady_state_error_variance",
    "steady_state_innovation_variance",
    "noise_variance_from_innovation",
    "innovation_closed_form",
    "innovation_parts",
    "eta1_alternative_form",
    "decompose",
    "predicted_bias",
    "eta1_variance_limit",
    "diagnose",
]


def steady_state_error_variance(K: float, Q: float, R: float) -> float:
    """Fixed point ``M`` of ``M = (1-K)^2 M + K^2 R + Q``."""
    return (K * K * R + Q) / (2.0 * K - K * K)


def steady_state_innovation_variance(K: float, Q: float, R: float) -> float:
    """``C = M + R``, equivalently ``(Q + 2KR) / (2K - K^2)``."""
    return steady_state_error_variance(K, Q, R) + R


def noise_variance_from_innovation(C: float, K: float, Q: float = 0.0) -> float:
    """Invert the steady state for ``R``; with ``Q = 0`` this is ``C (1 - K/2)``."""
    return (C * (2.0 * K - K * K) - Q) / (2.0 * K)


def innovation_closed_form(w, dv, K: float, x0_residual: float, k: int) -> float:
    """Innovation ``eta_k`` written out as explicit geometric sums.

    ``w`` and ``dv`` must cover indices ``0 .. k-1``; ``x0_residual`` is
    ``y_0 - x_hat_0``.
    """
    if k < 1:
        raise ValueError(f"innovations start at k=1, got k={k}")
    w = np.asarray(w, dtype=float)
    dv = np.asarray(dv, dtype=float)
    if w.size < k or dv.size < k:
        raise ValueError(f"k={k} needs w and dv up to index {k - 1}")
    g = 1.0 - K
    total = g ** (k - 1) * x0_residual
    for i in range(1, k + 1):
        total += g ** (i - 1) * (w[k - i] + dv[k - i])
    return total


def _geometric_filter(drive: np.ndarray, K: float) -> np.ndarray:
    # out[0] = 0, out[k] = (1-K) out[k-1] + drive[k-1]
    out = np.zeros(drive.size + 1)
    g = 1.0 - K
    acc = 0.0
    for i, d in enumerate(drive.tolist(), 1):
        acc = g * acc + d
        out[i] = acc
    return out


def innovation_parts(x, y, K: float):
    """Noise- and signal-driven innovation parts for a run starting at ``y_0``.

    Returns ``(eta1, eta2)``, each with one entry per sample and a zero at
    index 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    v = y - x
    return _geometric_filter(np.diff(v), K), _geometric_filter(np.diff(x), K)


def eta1_alternative_form(v, K: float, k: int) -> float:
    """``v_k - K sum_{i=1}^{k-1} (1-K)^(k-1-i) v_i - (1-K)^(k-1) v_0``."""
    v = np.asarray(v, dtype=float)
    g = 1.0 - K
    i = np.arange(1, k)
    return float(v[k] - K * np.sum(g ** (k - 1 - i) * v[1:k]) - g ** (k - 1) * v[0])


@dataclass(frozen=True)
class InnovationDecomposition:
    eta1: np.ndarray
    eta2: np.ndarray
    s11: float
    s22: float
    s12: float

    @property
    def c_hat(self) -> float:
        return self.s11 + self.s22 + 2.0 * self.s12


def _window_moments(e1: np.ndarray, e2: np.ndarray):
    n = e1.shape[-1]
    d1 = e1 - e1.mean(axis=-1, keepdims=True)
    d2 = e2 - e2.mean(axis=-1, keepdims=True)
    return (d1 * d1).sum(-1) / (n - 1), (d2 * d2).sum(-1) / (n - 1), (d1 * d2).sum(-1) / (n - 1)


def decompose(eta1, eta2, k: int, m: int) -> InnovationDecomposition:
    """Split the windowed sample variance at step ``k`` into its three parts.

    The window is ``max(0, k-m) .. k``, normalised the same way as the mean
    estimator.
    """
    eta1 = np.asarray(eta1, dtype=float)
    eta2 = np.asarray(eta2, dtype=float)
    if k < 1 or eta1.size <= k or eta2.size <= k:
        raise ValueError(f"sequences must cover indices 0..{k}")
    lo = max(0, k - m)
    e1, e2 = eta1[lo : k + 1], eta2[lo : k + 1]
    s11, s22, s12 = _window_moments(e1, e2)
    return InnovationDecomposition(e1, e2, float(s11), float(s22), float(s12))


def predicted_bias(w_window, K: float, m: int) -> float:
    """Approximate overestimate of ``R`` caused by signal variation.

    ``w_window`` holds the signal increments ``w_{i-1}`` for the ``m + 1``
    window positions (fewer during warm-up); their spread around the window
    mean, scaled by ``(2 - K) / 2``, is the bias.
    """
    w = np.asarray(w_window, dtype=float)
    if w.size < 2 or w.size > m + 1:
        raise ValueError(f"window must hold between 2 and {m + 1} increments, got {w.size}")
    return float((2.0 - K) / 2.0 * _mean_variance(w))


def eta1_variance_limit(K: float, R: float) -> float:
    """Stationary variance ``2R / (2 - K)`` of the noise-driven innovation."""
    return 2.0 * R / (2.0 - K)


@dataclass
class Diagnosis:
    """Per-step decomposition columns; index 0 is step ``k = 1``."""

    k: np.ndarray
    s11: np.ndarray
    s22: np.ndarray
    s12: np.ndarray
    c_hat: np.ndarray
    predicted_bias: np.ndarray
    realized_err: np.ndarray
    warmup: np.ndarray


def diagnose(x, y, K: float, m: int, r_true=None) -> Diagnosis:
    """Decompose every window of a run where the true signal is known.

    ``realized_err`` is ``(1 - K/2) * c_hat - R``, taking ``R`` from
    ``r_true`` when given and otherwise from the sample variance of
    ``y - x`` over the same window.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eta1, eta2 = innovation_parts(x, y, K)
    # position i of the window uses w_{i-1}; w_{-1} pads as 0 like eta2[0]
    w_shift = np.concatenate(([0.0], np.diff(x)))
    v = y - x
    n = max(y.size - 1, 0)
    cols = {name: np.empty(n) for name in ("s11", "s22", "s12", "bias", "rwin")}
    for ks, _ in windows(eta1, m):
        lo = np.maximum(ks - m, 0)
        width = ks[0] - lo[0] + 1
        idx = lo[:, None] + np.arange(width)
        s11, s22, s12 = _window_moments(eta1[idx], eta2[idx])
        j = ks - 1
        cols["s11"][j], cols["s22"][j], cols["s12"][j] = s11, s22, s12
        cols["bias"][j] = (2.0 - K) / 2.0 * _mean_variance(w_shift[idx])
        cols["rwin"][j] = _mean_variance(v[idx])
    c_hat = cols["s11"] + cols["s22"] + 2.0 * cols["s12"]
    R = np.asarray(r_true, dtype=float)[1:] if r_true is not None else cols["rwin"]
    ks = np.arange(1, y.size)
    return Diagnosis(
        k=ks, s11=cols["s11"], s22=cols["s22"], s12=cols["s12"], c_hat=c_hat,
        predicted_bias=cols["bias"], realized_err=(1.0 - K / 2.0) * c_hat - R,
        warmup=ks < m,
    )
