"""Exception types raised across the package."""


class PerfTransferError(Exception):
    """Base class for all package errors."""


class SpaceError(PerfTransferError, ValueError):
    """Invalid configuration space, configuration, or budget request."""


class DataError(PerfTransferError, ValueError):
    """Malformed or inconsistent measurement data."""


class UnmeasuredConfigurationError(DataError, KeyError):
    """An oracle was queried for a configuration it has no measurement for."""

    def __str__(self):
        return Exception.__str__(self)


class PositivityError(DataError):
    """A generated or shifted response is not strictly positive."""


class FitError(PerfTransferError, ValueError):
    """A learner could not be fitted to the given data."""


class DivergenceError(FitError, FloatingPointError):
    """Neural net training produced a non-finite loss."""
