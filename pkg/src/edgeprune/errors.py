"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when user-supplied data or parameters are invalid."""


class NumericError(RuntimeError):
    """Raised when a numerical routine fails to produce a usable result."""
