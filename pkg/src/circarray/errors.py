"""Exception types raised by the library."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""


class FormatError(ValueError):
    """A data file or tabulated grid is malformed."""


class UndefinedBeamwidthError(ValueError):
    """A cut has no -3 dB crossing around its peak."""


class SingularRingError(ValueError):
    """A ring of field samples passes through (or near) a phase singularity."""


class SingularityError(ValueError):
    """A field point coincides with a radiating element."""


class ConfigError(ValueError):
    """A run configuration failed validation."""
