"""Exception hierarchy shared by all modules."""


class EllsumError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EllsumError, ValueError):
    """An argument lies outside the domain of the function (z = 0, |p| >= 1, ...)."""


class TruncationFailure(EllsumError, ArithmeticError):
    """An infinite product needs more factors than ``Precision.max_terms`` allows."""


class NearPole(EllsumError, ArithmeticError):
    """A denominator fell below ``Precision.pole_guard`` in modulus."""


class GenericityFailure(EllsumError, ValueError):
    """A parameter set hits a degenerate configuration; callers should resample."""


class RangeError(EllsumError, IndexError):
    """An integer index is outside its admissible range."""


class ObservableSingular(EllsumError, ArithmeticError):
    """An observable returned a non-finite value at a lattice point."""


class ConfigError(EllsumError, ValueError):
    """Malformed suite configuration. ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
