"""Exception types shared across the package."""


class InvalidCoordinateError(ValueError):
    """A coordinate is NaN or infinite where a finite value is required."""


class DomainMismatchError(ValueError):
    """Two geometric objects live on tori of different side lengths."""


class UnsupportedKindError(ValueError):
    """An operation was asked of a walk kind it is not defined for."""


class ConfigError(ValueError):
    """An experiment configuration is malformed; message names the key."""
