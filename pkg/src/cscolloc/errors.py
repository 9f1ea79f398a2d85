"""Exception types shared across the package."""


class CollocationError(Exception):
    """Base class for errors raised by cscolloc."""


class InvalidIndexError(CollocationError, ValueError):
    """A multi-index entry lies outside ``[n]``."""


class InvalidArgumentError(CollocationError, ValueError):
    """An argument violates an operation's precondition."""


class ResourceLimitError(CollocationError):
    """A problem size exceeds a configured cap."""


class NumericalError(CollocationError):
    """A linear system is singular or too ill-conditioned to trust."""


class ConfigError(CollocationError, ValueError):
    """An experiment configuration is invalid."""
