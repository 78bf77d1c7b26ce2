"""Exception types shared across the package."""


class TraceliftError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(TraceliftError):
    """A matrix required to be positive definite is not."""


class DimensionMismatch(TraceliftError):
    """Operands have incompatible dimensions."""


class DomainError(TraceliftError):
    """A scalar parameter lies outside the supported range."""


class WrongExponent(TraceliftError):
    """A construction was invoked with an exponent outside its range."""


class MissingAssignment(TraceliftError):
    """A witness does not assign every variable of the model."""


class ComplexDataError(TraceliftError):
    """Complex data where only real data is allowed (e.g. SDPA export)."""


class NotRealified(TraceliftError):
    """Operation requires a realified model."""


class NoObjective(TraceliftError):
    """Operation requires the model to carry an objective."""


class SdpaParseError(TraceliftError):
    """A .dat-s file could not be parsed."""

    def __init__(self, message: str, line_no: int = 0):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class IoError(TraceliftError):
    """File could not be read or written."""
