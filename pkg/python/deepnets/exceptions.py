"""Exception classes for deepnets."""

__all__ = [
    "DeepNetsError",
    "InvalidArgumentError",
    "OutOfDomainError",
    "ConfigError",
    "ReportWriteError",
]


class DeepNetsError(Exception):
    """Base class for every error raised by deepnets."""


class InvalidArgumentError(DeepNetsError, ValueError):
    """An argument violates the precondition of the operation it was passed to."""


class OutOfDomainError(InvalidArgumentError):
    """A point has a coordinate outside the unit cube ``[0, 1]^d``."""


class ConfigError(DeepNetsError, ValueError):
    """An experiment configuration could not be loaded or validated."""


class ReportWriteError(DeepNetsError, OSError):
    """A report file could not be written.

    :param str path: The path that could not be written
    :param str reason: The underlying cause
    """

    def __init__(self, path, reason: str):
        super().__init__(f"cannot write report to {path}: {reason}")
        self.path = path
        self.reason = reason
