"""Exception types and warning categories used across the package."""


class QspinError(Exception):
    """Base class for all package errors."""


class CapacityError(QspinError):
    """Requested full Hilbert space exceeds the dense-matrix capacity limit."""


class OverlapError(QspinError):
    """Two partition regions share a site."""


class CoverageError(QspinError):
    """Some lattice site belongs to no partition region."""


class EmptyRegionError(QspinError):
    """A partition region contains no sites."""


class DimensionMismatch(QspinError):
    """Operator/state dimensions are inconsistent with the lattice or partition."""


class ConfigError(QspinError):
    """Base class for scenario-configuration failures."""


class ParseError(ConfigError):
    """Config text is syntactically malformed or contains unknown keys."""


class ValidationError(ConfigError):
    """Config parsed but a value fails a module validator."""


class NumericalNoiseWarning(UserWarning):
    """A quantity expected to be real carried an imaginary residue above threshold."""
