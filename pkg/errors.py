"""
Exception types raised by the specrec library.

Library code raises; only main.py turns these into messages and exit codes.
"""
from typing import Optional


class SpecrecError(Exception):
    """Base class for every error the library raises on purpose."""


class IrrationalPoleError(SpecrecError, ValueError):
    """A distinguished point (pole, zero, branch point) is not rational."""

    def __init__(self, factor: str, context: str = ""):
        self.factor = factor
        where = f" while {context}" if context else ""
        super().__init__(f"irreducible factor {factor} has no rational root{where}")


class CurveValidationError(SpecrecError, ValueError):
    """A curve document or constructor argument violates the curve schema."""


class NonSimpleRamificationError(CurveValidationError):
    """dx (or dy) vanishes to order two or more somewhere."""

    def __init__(self, point, order: int):
        self.point = point
        self.order = order
        super().__init__(f"non-simple ramification at z={point}: differential vanishes to order {order}")


class TruncationExhaustedError(SpecrecError, ArithmeticError):
    """A coefficient was requested beyond the known precision of a truncated series."""

    def __init__(self, requested: int, known: int, hint: Optional[str] = None):
        self.requested = requested
        self.known = known
        message = f"coefficient of degree {requested} requested but series is only known up to degree {known}"
        if hint:
            message += f" ({hint})"
        super().__init__(message)


class SeriesDomainError(SpecrecError, ValueError):
    """An operation was applied outside its domain (exp of a series with constant term, ...)."""


class PathUnavailableError(SpecrecError):
    """The TR path cannot run on this curve (e.g. irrational ramification points)."""


class UnsupportedDualError(SpecrecError):
    """The duality path needs an unramified y of kind z or log z."""


class ResidueFreenessError(SpecrecError, ArithmeticError):
    """An omega_{g,1} carries a residue where it must not; signals an internal inconsistency."""


class UnknownCurveError(SpecrecError, KeyError):
    """A catalog name or parameter is not known."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown curve"
