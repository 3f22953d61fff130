"""Exception hierarchy shared by all trophom modules."""

from __future__ import annotations


class TrophomError(Exception):
    """Base class for every error raised by this package."""


class DivisionByZero(TrophomError, ZeroDivisionError):
    pass


class NonMonomialDivisor(TrophomError):
    pass


class ZeroPolynomial(TrophomError):
    pass


class ZeroParameter(TrophomError):
    pass


class BaseMismatch(TrophomError):
    pass


class InconsistentSolution(TrophomError):
    pass


class RankDeficient(TrophomError):
    pass


class DegenerateColumn(TrophomError):
    pass


class GenericityError(TrophomError):
    """Failures that a fresh draw of the valuation vector may cure."""


class NonGenericValuation(GenericityError):
    pass


class PerturbationFailure(GenericityError):
    pass


class DimensionMismatch(TrophomError):
    pass


class IncompleteEnumeration(TrophomError):
    pass


class NonBinomialInitial(GenericityError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class SingularExponentMatrix(GenericityError):
    pass


class TargetMismatch(TrophomError):
    pass


class MultiplicityMismatch(TrophomError):
    pass


class SchemaError(TrophomError):
    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class DimensionError(SchemaError):
    pass


class RouteUnsupported(TrophomError):
    pass
