"""Exception hierarchy shared across the package."""


class IlcSimError(Exception):
    """Base class for all package errors."""


class ConfigError(IlcSimError):
    """Bad configuration file: parse failure, unknown key, invalid value."""


class FilterInstabilityError(IlcSimError):
    """A filtering operation produced non-finite output or was asked to run
    an unstable filter."""


class PoleOnUnitCircleError(IlcSimError):
    """Frequency response requested at a point where the denominator
    vanishes."""


class InversionError(IlcSimError):
    """The nominal model cannot be stably inverted (zeros on or outside the
    unit circle)."""


class SimulationDiverged(IlcSimError):
    """Plant state became non-finite. Carries the control-step index."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"simulation diverged at step {step}")


class EstimationError(IlcSimError):
    """Kalman recursion hit a non-positive innovation covariance."""


class NormalizationError(IlcSimError):
    """A training feature has zero variance and cannot be z-scored."""


class StabilityRefusal(IlcSimError):
    """Configured learning loop fails its convergence precheck; the
    experiment refuses to run without an explicit override."""
