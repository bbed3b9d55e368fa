"""Exception types shared across the package."""


class DosflError(Exception):
    """Base class for all package errors."""


class DimensionError(DosflError, ValueError):
    """Vector or matrix shapes do not line up."""


class ConfigError(DosflError, ValueError):
    """Invalid configuration, preconditions, or input files."""


class NumericError(DosflError, ValueError):
    """Non-finite values where finite ones are required."""


class ExperimentError(DosflError, RuntimeError):
    """A federated round failed; message carries the round index."""
