"""Exception types shared across the package."""


class DysError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DysError):
    """Invalid run configuration (bad flag, bad config file, bad combination)."""


class SchemaError(DysError):
    """CSV schema problems: missing columns, unknown column kinds."""


class DataValidationError(DysError):
    """Cell-level data problems (bad event value, negative time, empty data)."""


class ShapeMismatchError(DysError):
    """Array dimensions do not chain or do not match a declared contract."""


class ParameterError(DysError):
    """A numeric hyperparameter is outside its valid range."""


class NonFiniteError(DysError):
    """A gradient or loss became NaN/inf; carries diagnostics in the message."""


class TrainingError(DysError):
    """Training could not proceed (diverged, no events, no active features)."""


class BisectionError(DysError):
    """Bisection exhausted its iteration budget without hitting the target count.

    Attributes:
        trajectory: list of (lambda, active_count) per iteration.
        bracket: (lambda_low, lambda_high) at failure (either may be None).
        closest: (lambda, active_count) of the iteration closest to the target.
    """

    def __init__(self, message, trajectory, bracket, closest):
        super().__init__(message)
        self.trajectory = trajectory
        self.bracket = bracket
        self.closest = closest


class MetricsError(DysError):
    """Metric cannot be computed (no valid evaluation times, empty input)."""
