"""Error taxonomy shared by every module.

All numerical failure modes raise a subclass of :class:`NumericsError` so the
command line layer can map them to a single exit code.
"""


class NumericsError(Exception):
    """Base class for every numerical failure raised by this package."""


class DomainError(NumericsError, ValueError):
    """An argument lies outside the mathematical domain of the requested quantity."""


class CutoffTooLarge(NumericsError):
    """A requested enumeration would exceed the configured memory budget."""


class CutoffInsufficient(NumericsError):
    """A truncation is too small to meet the requested accuracy target."""


class NoConvergence(NumericsError):
    """An iterative solver failed to reach its tolerance within its budget."""


class PoleProximity(NumericsError):
    """An evaluation point is too close to a pole of a series representation."""


class ConfigError(ValueError):
    """A run configuration violates a documented invariant."""
