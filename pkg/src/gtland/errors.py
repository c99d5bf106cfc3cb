"""Exception types used across the package."""


class GtlandError(Exception):
    """Base class for all package-specific errors."""


class DomainError(GtlandError, ValueError):
    """An input lies outside the mathematical domain of an operation.

    Raised for things like a thrust-to-weight ratio at or below one,
    a flight-path angle outside (-pi/2, pi/2), or a non-positive speed.
    """


class ConfigError(GtlandError, ValueError):
    """A scenario / dispersion / configuration input is malformed."""


class RunFailure(GtlandError, RuntimeError):
    """A simulation run ended in a failure state (impact, fuel, timeout)."""
