"""Exception hierarchy used across the package."""


class AdsubError(Exception):
    """Base class for all package errors."""


class UsageError(AdsubError, ValueError):
    """An operation was called with arguments violating its precondition."""


class ConstructionError(AdsubError, ValueError):
    """A function, model or instance could not be built from its parameters."""


class ParameterError(ConstructionError):
    pass


class UnsupportedError(AdsubError):
    pass


class PolicyIncompleteError(AdsubError, RuntimeError):
    """A policy stalled or repeated an element before covering every scenario."""


class InvariantError(AdsubError, RuntimeError):
    """Internal invariant broken; indicates a bug or an invalid instance."""


class SizeError(AdsubError, ValueError):
    pass


class DataError(AdsubError, ValueError):
    """Malformed input data (carries the offending line number when known)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(DataError):
    pass


class ConfigError(AdsubError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
