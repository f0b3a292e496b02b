"""Exception types shared across the package."""


class RdmfluxError(Exception):
    """Base class for all package errors."""


class ValidationError(RdmfluxError):
    """An input failed a structural check (hermiticity, trace, norm, shape)."""


class CapacityError(RdmfluxError):
    """A requested build or evolution exceeds the configured size cap."""


class DegenerateSeriesError(RdmfluxError):
    """A time series has (numerically) zero variance, so normalized
    autocorrelation is undefined."""


class FitFailureError(RdmfluxError):
    """Correlation-length fit could not produce a finite positive length.

    `no_decay` is True when the autocorrelation never falls, i.e. the
    correlation length is effectively infinite rather than ill-defined.
    """

    def __init__(self, message: str, no_decay: bool = False):
        super().__init__(message)
        self.no_decay = no_decay


class EvolutionError(RdmfluxError):
    """A conserved quantity drifted past tolerance mid-run; carries the
    step index at which the check tripped."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class IntegratorError(RdmfluxError):
    """Symplectic integration violated its energy-drift bound."""


class ConfigError(RdmfluxError):
    """An experiment configuration is malformed (unknown key, bad value,
    missing section)."""
