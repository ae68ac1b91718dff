"""Exception types shared across the package."""


class UlgfbpError(Exception):
    """Base class for all package errors."""


class DimensionError(UlgfbpError, ValueError):
    """Array shapes are incompatible with the requested operation."""


class IngestionError(UlgfbpError):
    """A dataset tree or image file could not be read."""

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{message}: {path}"
        super().__init__(message)


class ConfigError(UlgfbpError, ValueError):
    """Invalid configuration key or value."""
