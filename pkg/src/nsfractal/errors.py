"""Exception types shared across the package."""


class NsfractalError(Exception):
    """Base class for all package errors."""


class InvalidInputError(NsfractalError, ValueError):
    """Malformed or out-of-contract input (bad parameters, dimension mismatch)."""


class DomainError(NsfractalError):
    """A point or set left the invariant domain of a map."""


class DivergenceError(NsfractalError):
    """An iterate became non-finite."""


class ResourceLimitError(NsfractalError):
    """A configured resource cap (cloud size, truncation depth) was exceeded."""


class ConfigError(InvalidInputError):
    """Invalid run configuration; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class SummabilityWarning(UserWarning):
    """Backward trajectory requested for a chain whose composition series
    did not pass the empirical summability check; convergence is not
    guaranteed."""
