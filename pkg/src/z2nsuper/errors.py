"""Exception types raised across the package."""

from __future__ import annotations


class Z2nError(Exception):
    """Base class for all errors raised by z2nsuper."""


class ArityMismatch(Z2nError, ValueError):
    pass


class TableMismatch(Z2nError, ValueError):
    """Two operands live over different variable tables."""


class UnknownVariable(Z2nError, ValueError):
    pass


class GradingViolation(Z2nError, ValueError):
    """A term or image does not have the degree its slot requires."""


class DegreeMismatch(GradingViolation):
    pass


class NonInvertibleLinearPart(Z2nError, ArithmeticError):
    pass


class BaseMapNotSupported(Z2nError, ValueError):
    """The body map is not affine-invertible, so no polynomial inverse exists."""


class MalformedAtlas(Z2nError, ValueError):
    pass


class CocycleFailure(Z2nError, ValueError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class UnsolvableAtBound(Z2nError, ArithmeticError):
    """No solution with base-polynomial coefficients of degree <= bound."""

    def __init__(self, bound: int, detail: str = ""):
        msg = f"coboundary system unsolvable at degree bound D={bound}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.bound = bound


class ParseError(Z2nError, SyntaxError):
    """Grammar error with 1-based line/column and the offending token."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        full = f"line {line}, column {column}: {message}"
        if token:
            full += f" (at {token!r})"
        super().__init__(full)
        self.line = line
        self.column = column
        self.token = token
