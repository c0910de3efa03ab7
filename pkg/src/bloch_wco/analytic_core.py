"""
Holomorphic functions on the unit disk as expression trees.

Trees are immutable. Evaluation is vectorized over numpy arrays of
points and shares the value of repeated subtrees, which matters for
derivative trees where the chain and product rules duplicate operands.
"""

import logging
import math
from dataclasses import dataclass
from functools import singledispatch
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

from config import SELF_MAP_CONFIG

from bloch_wco.errors import (
    DivisionNearZero,
    InvalidParameter,
    LogDomain,
    NonFiniteValue,
    NotSelfMap,
    PoorConvergence,
)

logger = logging.getLogger(__name__)

# Values of this modulus count as zero for denominators and log arguments
TINY = 1e-300

ComplexLike = Union[complex, float, int, np.ndarray]


# =============================================================================
# EXPRESSION NODES
# =============================================================================

class AnalyticExpr:
    """Base node. `operands` are the child expressions in order."""

    kind = "expr"
    arity = 0

    def __init__(self, operands=()):
        operands = tuple(operands)
        if len(operands) != self.arity:
            raise InvalidParameter(f"{self.kind} takes {self.arity} operands, got {len(operands)}")
        for op in operands:
            if not isinstance(op, AnalyticExpr):
                raise InvalidParameter(f"{self.kind} operand is not an expression: {op!r}")
        self.operands = operands

    # Children evaluated at the same point as the node itself
    @property
    def pointwise_operands(self):
        return self.operands

    def _params(self) -> tuple:
        return ()

    def _key(self) -> tuple:
        return (type(self).__name__, self._params(), tuple(op._key() for op in self.operands))

    def __eq__(self, other):
        return isinstance(other, AnalyticExpr) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        params = ", ".join(repr(p) for p in self._params())
        ops = ", ".join(repr(op) for op in self.operands)
        inner = ", ".join(s for s in (params, ops) if s)
        return f"{type(self).__name__}({inner})"

    @staticmethod
    def _coerce(value) -> "AnalyticExpr":
        if isinstance(value, AnalyticExpr):
            return value
        return Const(value)

    def __add__(self, other):
        return Add(self, self._coerce(other))

    def __radd__(self, other):
        return Add(self._coerce(other), self)

    def __sub__(self, other):
        return Sub(self, self._coerce(other))

    def __rsub__(self, other):
        return Sub(self._coerce(other), self)

    def __mul__(self, other):
        return Mul(self, self._coerce(other))

    def __rmul__(self, other):
        return Mul(self._coerce(other), self)

    def __truediv__(self, other):
        return Div(self, self._coerce(other))

    def __rtruediv__(self, other):
        return Div(self._coerce(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n):
        return PowInt(self, n)

    def __call__(self, z: ComplexLike):
        return evaluate(self, z)

    def compose(self, inner: "AnalyticExpr") -> "AnalyticExpr":
        """self(inner(z))"""
        return Compose(self, inner)


class Var(AnalyticExpr):
    kind = "z"

    def __init__(self):
        super().__init__(())


class Const(AnalyticExpr):
    kind = "const"

    def __init__(self, value):
        value = complex(value)
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise InvalidParameter(f"Constant must be finite, got {value}")
        super().__init__(())
        self.value = value

    def _params(self):
        return (self.value,)


class Mobius(AnalyticExpr):
    """sigma_a(z) = (a - z) / (1 - conj(a) z)"""

    kind = "mobius"

    def __init__(self, a):
        a = complex(a)
        if not abs(a) < 1.0:
            raise InvalidParameter(f"Mobius parameter must satisfy |a| < 1, got |a| = {abs(a)}")
        super().__init__(())
        self.a = a

    def _params(self):
        return (self.a,)


class Neg(AnalyticExpr):
    kind = "neg"
    arity = 1

    def __init__(self, arg):
        super().__init__((arg,))


class Log(AnalyticExpr):
    """Principal branch."""

    kind = "log"
    arity = 1

    def __init__(self, arg):
        super().__init__((arg,))


class Exp(AnalyticExpr):
    kind = "exp"
    arity = 1

    def __init__(self, arg):
        super().__init__((arg,))


class PowInt(AnalyticExpr):
    kind = "powint"
    arity = 1

    def __init__(self, arg, n: int):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
            raise InvalidParameter(f"PowInt exponent must be an integer >= 0, got {n!r}")
        super().__init__((arg,))
        self.n = int(n)

    def _params(self):
        return (self.n,)


class Add(AnalyticExpr):
    kind = "add"
    arity = 2

    def __init__(self, left, right):
        super().__init__((left, right))


class Sub(AnalyticExpr):
    kind = "sub"
    arity = 2

    def __init__(self, left, right):
        super().__init__((left, right))


class Mul(AnalyticExpr):
    kind = "mul"
    arity = 2

    def __init__(self, left, right):
        super().__init__((left, right))


class Div(AnalyticExpr):
    kind = "div"
    arity = 2

    def __init__(self, left, right):
        super().__init__((left, right))


class Compose(AnalyticExpr):
    """outer(inner(z))"""

    kind = "compose"
    arity = 2

    def __init__(self, outer, inner):
        super().__init__((outer, inner))

    @property
    def outer(self):
        return self.operands[0]

    @property
    def inner(self):
        return self.operands[1]

    @property
    def pointwise_operands(self):
        # The outer tree is evaluated at inner(z), not at z
        return (self.inner,)


Z = Var()


# =============================================================================
# EVALUATION
# =============================================================================

def _int_power(base: np.ndarray, n: int) -> np.ndarray:
    # Binary exponentiation; np.power on complex goes through exp/log and fails at 0
    result = np.ones_like(base)
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


@singledispatch
def _visit(expr, *operand_values, z=None):
    raise NotImplementedError(f"Cannot evaluate a {type(expr).__name__}")


@_visit.register(Var)
def _(expr, *operand_values, z=None):
    return z


@_visit.register(Const)
def _(expr, *operand_values, z=None):
    return expr.value


@_visit.register(Mobius)
def _(expr, *operand_values, z=None):
    return (expr.a - z) / (1.0 - expr.a.conjugate() * z)


@_visit.register(Neg)
def _(expr, arg, z=None):
    return -arg


@_visit.register(Log)
def _(expr, arg, z=None):
    if np.any(np.abs(arg) < TINY):
        raise LogDomain("Log argument vanishes on the evaluation set")
    return np.log(arg)


@_visit.register(Exp)
def _(expr, arg, z=None):
    return np.exp(arg)


@_visit.register(PowInt)
def _(expr, arg, z=None):
    return _int_power(np.asarray(arg, dtype=complex), expr.n)


@_visit.register(Add)
def _(expr, left, right, z=None):
    return left + right


@_visit.register(Sub)
def _(expr, left, right, z=None):
    return left - right


@_visit.register(Mul)
def _(expr, left, right, z=None):
    return left * right


@_visit.register(Div)
def _(expr, left, right, z=None):
    if np.any(np.abs(right) < TINY):
        raise DivisionNearZero("Denominator vanishes on the evaluation set")
    return left / right


@_visit.register(Compose)
def _(expr, inner_value, z=None):
    return _evaluate_raw(expr.outer, np.asarray(inner_value, dtype=complex))


def postvisitor(expr: AnalyticExpr, visit, **kwargs):
    """Iterative post-order traversal; each distinct node object is visited once."""
    stack = [(expr, False)]
    results = {}

    while stack:
        current, children_visited = stack.pop()

        if id(current) in results:
            continue

        if children_visited:
            operand_values = [results[id(op)] for op in current.pointwise_operands]
            results[id(current)] = visit(current, *operand_values, **kwargs)
        else:
            stack.append((current, True))
            for operand in reversed(current.pointwise_operands):
                if id(operand) not in results:
                    stack.append((operand, False))

    return results[id(expr)]


def _evaluate_raw(f: AnalyticExpr, z: np.ndarray):
    with np.errstate(all="ignore"):
        return postvisitor(f, _visit, z=z)


def evaluate(f: AnalyticExpr, z: ComplexLike):
    """
    Evaluate f at a point or an array of points.

    Parameters:
    -----------
    f : AnalyticExpr
        Expression tree.
    z : complex or np.ndarray
        Points, normally strictly inside the disk.

    Returns:
    --------
    complex or np.ndarray
        complex for scalar input, complex array of z's shape otherwise.

    Raises:
    -------
    DivisionNearZero, LogDomain, NonFiniteValue
    """
    z_arr = np.asarray(z, dtype=complex)
    value = np.broadcast_to(np.asarray(_evaluate_raw(f, z_arr), dtype=complex), z_arr.shape)
    if not np.all(np.isfinite(value)):
        raise NonFiniteValue(f"{f!r} is not finite on the evaluation set")
    if z_arr.ndim == 0:
        return complex(value)
    return np.array(value)


# =============================================================================
# SYMBOLIC DIFFERENTIATION
# =============================================================================

def _is_const(expr, value) -> bool:
    return isinstance(expr, Const) and expr.value == value


def _mul(left: AnalyticExpr, right: AnalyticExpr) -> AnalyticExpr:
    if _is_const(left, 0) or _is_const(right, 0):
        return Const(0)
    if _is_const(left, 1):
        return right
    if _is_const(right, 1):
        return left
    return Mul(left, right)


def _add(left: AnalyticExpr, right: AnalyticExpr) -> AnalyticExpr:
    if _is_const(left, 0):
        return right
    if _is_const(right, 0):
        return left
    return Add(left, right)


@singledispatch
def derivative(f) -> AnalyticExpr:
    """Return an expression for f'."""
    raise NotImplementedError(f"Cannot differentiate a {type(f).__name__}")


@derivative.register(Var)
def _(f):
    return Const(1)


@derivative.register(Const)
def _(f):
    return Const(0)


@derivative.register(Mobius)
def _(f):
    a = f.a
    return Div(Const(-(1.0 - abs(a) ** 2)), PowInt(Sub(Const(1), Mul(Const(a.conjugate()), Var())), 2))


@derivative.register(Neg)
def _(f):
    d = derivative(f.operands[0])
    return Const(0) if _is_const(d, 0) else Neg(d)


@derivative.register(Add)
def _(f):
    left, right = f.operands
    return _add(derivative(left), derivative(right))


@derivative.register(Sub)
def _(f):
    left, right = f.operands
    dl, dr = derivative(left), derivative(right)
    if _is_const(dr, 0):
        return dl
    return Sub(dl, dr)


@derivative.register(Mul)
def _(f):
    left, right = f.operands
    return _add(_mul(derivative(left), right), _mul(left, derivative(right)))


@derivative.register(Div)
def _(f):
    num, den = f.operands
    dn, dd = derivative(num), derivative(den)
    if _is_const(dd, 0):
        return _mul(dn, Div(Const(1), den))
    return Div(Sub(_mul(dn, den), _mul(num, dd)), PowInt(den, 2))


@derivative.register(PowInt)
def _(f):
    (arg,) = f.operands
    if f.n == 0:
        return Const(0)
    if f.n == 1:
        return derivative(arg)
    base = arg if f.n == 2 else PowInt(arg, f.n - 1)
    return _mul(_mul(Const(f.n), base), derivative(arg))


@derivative.register(Compose)
def _(f):
    return _mul(Compose(derivative(f.outer), f.inner), derivative(f.inner))


@derivative.register(Log)
def _(f):
    (arg,) = f.operands
    return _mul(derivative(arg), Div(Const(1), arg))


@derivative.register(Exp)
def _(f):
    (arg,) = f.operands
    return _mul(f, derivative(arg))


# =============================================================================
# SELF-MAP VALIDATION
# =============================================================================

@dataclass(frozen=True)
class SelfMapReport:
    is_self_map: bool
    sup_modulus: float
    boundary_contact: bool
    witness: complex


def validate_self_map(phi: AnalyticExpr,
                      angular_count: Optional[int] = None,
                      probe_radius: Optional[float] = None) -> SelfMapReport:
    """
    Sample |phi| on the probe circle, refine the best angle, and test sup <= 1.

    By the maximum principle the circle sup bounds |phi| on the whole
    probe disk.

    Raises:
    -------
    NotSelfMap
        sup_modulus > 1 + tol_selfmap; the report is attached.
    """
    M = SELF_MAP_CONFIG["angular_count"] if angular_count is None else angular_count
    r = SELF_MAP_CONFIG["probe_radius"] if probe_radius is None else probe_radius
    if M < 256:
        raise InvalidParameter(f"Self-map probe needs M >= 256, got {M}")
    if not 0.0 < r < 1.0:
        raise InvalidParameter(f"Probe radius must lie in (0, 1), got {r}")

    theta = 2.0 * np.pi * np.arange(M) / M
    moduli = np.abs(evaluate(phi, r * np.exp(1j * theta)))
    k = int(np.argmax(moduli))
    best_theta, best = float(theta[k]), float(moduli[k])

    step = 2.0 * np.pi / M
    res = minimize_scalar(
        lambda t: -abs(evaluate(phi, r * np.exp(1j * t))),
        bounds=(best_theta - step, best_theta + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    if -res.fun > best:
        best_theta, best = float(res.x), float(-res.fun)

    report = SelfMapReport(
        is_self_map=best <= 1.0 + SELF_MAP_CONFIG["tol_selfmap"],
        sup_modulus=best,
        boundary_contact=best > 1.0 - SELF_MAP_CONFIG["tol_boundary"],
        witness=complex(r * np.exp(1j * best_theta)),
    )
    logger.debug("self-map probe: sup |phi| = %.12g at %s", best, report.witness)
    if not report.is_self_map:
        raise NotSelfMap(f"sup |phi| = {best:.12g} exceeds 1 on the probe circle", report)
    return report


# =============================================================================
# TAYLOR COEFFICIENTS
# =============================================================================

def taylor_truncate(f: AnalyticExpr, N: int, r_fit: float = 0.75) -> np.ndarray:
    """
    Coefficients c_0..c_N of f by FFT sampling on |z| = r_fit.

    The fit is checked on |z| = r_fit/2; truncation order N must be
    large enough for the tail to vanish there.

    Raises:
    -------
    PoorConvergence
        residual above 1e-8.
    """
    if not 0 <= N <= 512:
        raise InvalidParameter(f"N must lie in [0, 512], got {N}")
    if not 0.0 < r_fit < 1.0:
        raise InvalidParameter(f"r_fit must lie in (0, 1), got {r_fit}")

    M = max(256, 1 << math.ceil(math.log2(4 * (N + 1))))
    samples = evaluate(f, r_fit * np.exp(2j * np.pi * np.arange(M) / M))
    coeffs = np.fft.fft(samples)[: N + 1] / M / r_fit ** np.arange(N + 1)

    check = 0.5 * r_fit * np.exp(2j * np.pi * np.arange(256) / 256)
    residual = float(np.max(np.abs(evaluate(f, check) - np.polynomial.polynomial.polyval(check, coeffs))))
    logger.debug("taylor_truncate N=%d residual=%.3g", N, residual)
    if residual > 1e-8:
        raise PoorConvergence(f"Taylor residual {residual:.3g} exceeds 1e-8 at N = {N}", residual)
    return coeffs


def polynomial(coefficients) -> AnalyticExpr:
    """Horner-form tree for c_0 + c_1 z + ... + c_d z^d."""
    coefficients = [complex(c) for c in coefficients]
    if not coefficients:
        return Const(0)
    expr: AnalyticExpr = Const(coefficients[-1])
    for c in coefficients[-2::-1]:
        expr = Mul(expr, Var())
        if c != 0:
            expr = Add(expr, Const(c))
    return expr
