"""Robust measurement-noise variance estimation for 1-D time-varying signals."""

from .errors import ConfigError, FitError, InputError, NoiseVarError, ScenarioError
from .estimator import (
    GAUSSIAN_MAD_SCALE,
    ALT_MAD_SCALE,
    EstimateRecord,
    EstimateTrace,
    EstimatorConfig,
    EstimatorState,
    NoiseVarianceEstimator,
    Variability,
    estimate_R,
    filter_step,
    run_algorithm1,
    windowed_variance_mad,
    windowed_variance_mean,
)
from .baselines import (
    BaselineEstimate,
    LagCovariances,
    Method,
    fit_als,
    fit_mehra,
    innovation_autocovariance,
    run_baseline,
    theoretical_lag_model,
)

__version__ = "0.1.0"
