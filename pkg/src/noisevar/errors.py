"""Exception hierarchy shared by every module of the package."""


class NoiseVarError(Exception):
    """Base class for all errors raised by :mod:`noisevar`."""


class ConfigError(NoiseVarError, ValueError):
    """An estimator or run configuration violates its invariants."""


class InputError(NoiseVarError, ValueError):
    """A measurement is unusable (NaN, infinite, or missing).

    ``index`` is the position of the offending sample in the stream when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FitError(NoiseVarError):
    """A least-squares fit could not be solved."""


class ScenarioError(NoiseVarError, ValueError):
    """A scenario description is invalid. ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
