"""
Error taxonomy shared by every module.

The class name is what lands in the `error_kind` column of a report,
so names are part of the CSV schema.
"""

from typing import Optional


class BlochToolkitError(Exception):
    """Base class for all toolkit errors."""


# =============================================================================
# EVALUATION
# =============================================================================

class DivisionNearZero(BlochToolkitError):
    """A denominator modulus fell below 1e-300."""


class LogDomain(BlochToolkitError):
    """Log argument modulus fell below 1e-300."""


class NonFiniteValue(BlochToolkitError):
    """Evaluation produced NaN or Inf."""


class InvalidParameter(BlochToolkitError, ValueError):
    """A parameter is outside its admissible range."""


class NotSelfMap(BlochToolkitError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class PoorConvergence(BlochToolkitError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


# =============================================================================
# QUADRATURE / COUNTING
# =============================================================================

class NonFiniteIntegrand(BlochToolkitError):
    def __init__(self, index: int, point: complex):
        super().__init__(f"Non-finite integrand at node {index} (z = {point:.6g})")
        self.index = index
        self.point = point


class IllConditioned(BlochToolkitError):
    """A polished root failed the residual test."""


class AtCriticalValue(BlochToolkitError):
    """Counting function requested at w = phi(0)."""


class PreconditionViolated(BlochToolkitError):
    pass


class UnsupportedSymbol(BlochToolkitError):
    """Operation needs a polynomial symbol."""


# =============================================================================
# ESTIMATORS / HARNESS
# =============================================================================

class NotBounded(BlochToolkitError):
    """Boundedness gate failed before an essential-norm estimate."""


class ParseError(BlochToolkitError):
    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, path: str = "$"):
        where = f"line {line}, column {column}" if line is not None else path
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column
        self.path = path
