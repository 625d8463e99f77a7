"""Constant-gain predictor and windowed innovation-variance estimators.

The measurement model is ``y_k = x_k + v_k`` with white noise ``v_k`` of
variance ``R``; nothing is assumed about how ``x_k`` moves.  A fixed-gain
predictor

    x_pred[k] = x_hat[k-1]
    eta[k]    = y[k] - x_pred[k]
    x_hat[k]  = x_pred[k] + K * eta[k]

produces innovations whose steady-state variance ``C`` relates to ``R`` by
``R = C * (1 - K/2)`` once the signal variation term is dropped.  ``C`` is
estimated over a sliding window of the most recent ``m + 1`` innovations,
either by a sample variance or by a squared, scaled median absolute
deviation (MAD).  The MAD variant is the robust default.

Window convention: processing ``y_0`` only initialises ``x_hat = y_0``; the
zero initial residual ``y_0 - x_hat_0`` is kept as ``eta_0 = 0`` so that the
window after step ``k`` holds ``eta[max(0, k-m)] .. eta[k]``, i.e.
``min(k, m) + 1`` values, and both estimators divide by ``len(window) - 1``.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, InputError

__all__ = [
    "GAUSSIAN_MAD_SCALE",
    "ALT_MAD_SCALE",
    "Variability",
    "EstimatorConfig",
    "EstimatorState",
    "EstimateRecord",
    "EstimateTrace",
    "NoiseVarianceEstimator",
    "filter_step",
    "windowed_variance_mean",
    "windowed_variance_mad",
    "estimate_R",
    "innovations",
    "run_algorithm1",
]

#: 1 / Phi^{-1}(3/4): makes the MAD a consistent scale estimate for Gaussian data.
GAUSSIAN_MAD_SCALE = 1.4826
#: Alternative published scale constant, selectable for reproducing earlier results.
ALT_MAD_SCALE = 1.4268

# rows per block when medians are evaluated over stacked windows
_CHUNK = 20_000


class Variability(str, Enum):
    """Which statistic turns a window of innovations into a variance."""

    MEAN = "mean"
    MAD = "mad"


@dataclass(frozen=True)
class EstimatorConfig:
    """Gain ``K``, window length ``m``, MAD scale ``a`` and estimator kind."""

    K: float = 0.9902
    m: int = 100
    a: float = GAUSSIAN_MAD_SCALE
    variability: Variability = Variability.MAD

    def __post_init__(self):
        if not (isinstance(self.K, (int, float)) and 0.0 < self.K < 1.0):
            raise ConfigError(f"gain K must lie strictly inside (0, 1), got {self.K!r}")
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ConfigError(f"window length m must be a positive integer, got {self.m!r}")
        if not (isinstance(self.a, (int, float)) and math.isfinite(self.a) and self.a > 0):
            raise ConfigError(f"MAD scale a must be positive, got {self.a!r}")
        try:
            object.__setattr__(self, "variability", Variability(self.variability))
        except ValueError:
            raise ConfigError(f"unknown variability estimator {self.variability!r}") from None


@dataclass
class EstimatorState:
    """Mutable state of one streaming estimator.

    ``k`` counts the samples consumed so far, so the next sample has index
    ``k``.  ``window`` is a ring buffer of capacity ``m + 1``.
    """

    m: int
    x_hat: float = math.nan
    k: int = 0
    window: deque = field(default=None)

    def __post_init__(self):
        if self.window is None:
            self.window = deque(maxlen=self.m + 1)

    @classmethod
    def fresh(cls, config: EstimatorConfig) -> "EstimatorState":
        return cls(m=config.m)


@dataclass(frozen=True)
class EstimateRecord:
    """One output row: innovation, variance estimates and bookkeeping flags.

    ``q_hat`` is only populated by the correlation baselines.  ``flag`` is
    empty for a normal record; baselines use it to mark clipped or missing
    fits.
    """

    k: int
    y: float
    eta: float
    c_hat: float
    r_hat: float
    q_hat: float | None = None
    warmup: bool = False
    flag: str = ""


def _check_finite(y, index=None) -> float:
    try:
        value = float(y)
    except (TypeError, ValueError):
        raise InputError(f"measurement {y!r} is not a number", index) from None
    if not math.isfinite(value):
        where = "" if index is None else f" at index {index}"
        raise InputError(f"non-finite measurement {value!r}{where}", index)
    return value


def filter_step(state: EstimatorState, config: EstimatorConfig, y: float):
    """Advance the constant-gain predictor by one measurement.

    Returns ``(state, eta)``.  The state is updated in place and returned for
    convenience.  ``eta`` is ``None`` for the very first sample, which only
    initialises the estimate.
    """
    y = _check_finite(y, state.k)
    if state.window.maxlen != config.m + 1:
        raise ConfigError("state was created for a different window length")
    if state.k == 0:
        state.x_hat = y
        state.window.append(0.0)
        state.k = 1
        return state, None
    eta = y - state.x_hat
    state.x_hat = state.x_hat + config.K * eta
    state.window.append(eta)
    state.k += 1
    return state, eta


def _check_window(window, k: int, m: int) -> np.ndarray:
    arr = np.asarray(window, dtype=float)
    if k < 1:
        raise ValueError(f"step index must be >= 1, got {k}")
    expected = min(k, m) + 1
    if arr.ndim != 1 or arr.size != expected:
        raise ValueError(f"window for k={k}, m={m} must hold {expected} innovations, got {arr.size}")
    return arr


def _mean_variance(arr: np.ndarray) -> np.ndarray:
    # divisor is one less than the sample count on both branches
    n = arr.shape[-1]
    shifted = arr - arr[..., :1]
    dev = shifted - shifted.mean(axis=-1, keepdims=True)
    return (dev * dev).sum(axis=-1) / (n - 1)


def _median(arr: np.ndarray) -> np.ndarray:
    """Median along the last axis; even sizes average the two middle values."""
    n = arr.shape[-1]
    h = n // 2
    if n % 2:
        return np.partition(arr, h, axis=-1)[..., h]
    part = np.partition(arr, (h - 1, h), axis=-1)
    return (part[..., h - 1] + part[..., h]) / 2.0


def _mad_variance(arr: np.ndarray, a: float) -> np.ndarray:
    med = _median(arr)
    scaled = a * _median(np.abs(arr - med[..., None]))
    return scaled * scaled


def windowed_variance_mean(window: Sequence[float], k: int, m: int) -> float:
    """Sample variance of the innovation window.

    The window holds ``min(k, m) + 1`` innovations and the sum of squared
    deviations is divided by ``min(k, m)``.
    """
    return float(_mean_variance(_check_window(window, k, m)))


def windowed_variance_mad(window: Sequence[float], k: int, m: int, a: float) -> float:
    """Squared scaled median absolute deviation of the innovation window.

    Even-sized windows use the mean of the two middle order statistics as
    the median.
    """
    if not a > 0:
        raise ConfigError(f"MAD scale a must be positive, got {a!r}")
    return float(_mad_variance(_check_window(window, k, m), a))


def estimate_R(c_hat: float, K: float) -> float:
    """Noise variance implied by an innovation variance: ``c_hat * (1 - K/2)``."""
    if not 0.0 < K < 1.0:
        raise ConfigError(f"gain K must lie strictly inside (0, 1), got {K!r}")
    if not c_hat >= 0:
        raise ValueError(f"innovation variance must be non-negative, got {c_hat!r}")
    return c_hat * (1.0 - K / 2.0)


class NoiseVarianceEstimator:
    """Streaming form of the estimator: feed one measurement at a time.

    >>> est = NoiseVarianceEstimator(EstimatorConfig(K=0.5, m=4))
    >>> est.update(1.0) is None
    True
    >>> est.update(3.0).eta
    2.0
    """

    def __init__(self, config: EstimatorConfig | None = None):
        self.config = config or EstimatorConfig()
        self.state = EstimatorState.fresh(self.config)

    def update(self, y: float) -> EstimateRecord | None:
        k = self.state.k
        _, eta = filter_step(self.state, self.config, y)
        if eta is None:
            return None
        cfg = self.config
        if cfg.variability is Variability.MAD:
            c_hat = windowed_variance_mad(self.state.window, k, cfg.m, cfg.a)
        else:
            c_hat = windowed_variance_mean(self.state.window, k, cfg.m)
        return EstimateRecord(
            k=k, y=float(y), eta=eta, c_hat=c_hat,
            r_hat=estimate_R(c_hat, cfg.K), warmup=k < cfg.m,
        )

    def run(self, stream: Iterable[float]) -> list[EstimateRecord]:
        return [rec for rec in map(self.update, stream) if rec is not None]


class EstimateTrace(Sequence):
    """Column-oriented run output that also behaves as a list of records.

    Index 0 of every column corresponds to step ``k = 1``.
    """

    def __init__(self, k, y, eta, c_hat, r_hat, warmup, q_hat=None, flag=None):
        self.k = np.asarray(k, dtype=np.int64)
        self.y = np.asarray(y, dtype=float)
        self.eta = np.asarray(eta, dtype=float)
        self.c_hat = np.asarray(c_hat, dtype=float)
        self.r_hat = np.asarray(r_hat, dtype=float)
        self.warmup = np.asarray(warmup, dtype=bool)
        self.q_hat = None if q_hat is None else np.asarray(q_hat, dtype=float)
        self.flag = [""] * len(self.k) if flag is None else list(flag)

    def __len__(self):
        return len(self.k)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return EstimateRecord(
            k=int(self.k[i]), y=float(self.y[i]), eta=float(self.eta[i]),
            c_hat=float(self.c_hat[i]), r_hat=float(self.r_hat[i]),
            q_hat=None if self.q_hat is None else float(self.q_hat[i]),
            warmup=bool(self.warmup[i]), flag=self.flag[i],
        )


def innovations(stream, K: float) -> np.ndarray:
    """Innovation sequence of the predictor, with the ``eta_0 = 0`` slot.

    The arithmetic is the same as :func:`filter_step`, so the values agree
    bit for bit with the streaming estimator.
    """
    y = np.asarray(stream, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise InputError("measurement stream must be a non-empty 1-D sequence")
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        i = int(bad[0])
        raise InputError(f"non-finite measurement {y[i]!r} at index {i}", i)
    eta = np.zeros_like(y)
    values = y.tolist()
    x_hat = values[0]
    for i in range(1, len(values)):
        e = values[i] - x_hat
        x_hat = x_hat + K * e
        eta[i] = e
    return eta


def windows(eta: np.ndarray, m: int):
    """Yield ``(ks, block)`` pairs covering every step ``k >= 1``.

    Warm-up steps (``k < m``) come one at a time; full windows are yielded as
    stacked ``(rows, m + 1)`` views in blocks.
    """
    n = eta.size
    for k in range(1, min(m, n)):
        yield np.array([k]), eta[None, : k + 1]
    if n > m:
        view = np.lib.stride_tricks.sliding_window_view(eta, m + 1)
        for start in range(0, view.shape[0], _CHUNK):
            block = view[start : start + _CHUNK]
            yield np.arange(m + start, m + start + block.shape[0]), block


def run_algorithm1(stream, config: EstimatorConfig | None = None) -> EstimateTrace:
    """Run the estimator over a whole measurement sequence.

    One record is produced per sample from ``k = 1`` on.  Equivalent to
    feeding the stream through :class:`NoiseVarianceEstimator`, but evaluated
    over stacked windows.
    """
    config = config or EstimatorConfig()
    y = np.asarray(stream, dtype=float)
    eta = innovations(y, config.K)
    c_hat = np.empty(max(y.size - 1, 0))
    for ks, block in windows(eta, config.m):
        if config.variability is Variability.MAD:
            c_hat[ks - 1] = _mad_variance(block, config.a)
        else:
            c_hat[ks - 1] = _mean_variance(block)
    ks = np.arange(1, y.size)
    return EstimateTrace(
        k=ks, y=y[1:], eta=eta[1:], c_hat=c_hat,
        r_hat=c_hat * (1.0 - config.K / 2.0), warmup=ks < config.m,
    )
