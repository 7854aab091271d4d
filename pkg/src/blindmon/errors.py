"""Exception types shared across the package."""


class BlindmonError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BlindmonError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class StateError(BlindmonError, RuntimeError):
    """An operation was called on an object in an unusable state."""


class InsufficientDataError(BlindmonError):
    """A replayed observation stream ended before the monitor stopped.

    Carries the partial monitoring trace accumulated so far in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
