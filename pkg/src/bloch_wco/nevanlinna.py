"""
Generalized Nevanlinna counting functions for polynomial self-maps.

N_{phi,gamma}(w) = sum over z in phi^{-1}{w}, |z| < 1, of (log 1/|z|)^gamma,
counted with multiplicity. Roots come from companion-matrix eigenvalues
with one Newton polish; grids of w are solved as one stacked
eigenvalue problem.
"""

import logging
import math
from dataclasses import dataclass
from functools import singledispatch
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from bloch_wco.analytic_core import (
    Add,
    AnalyticExpr,
    Compose,
    Const,
    Div,
    Mul,
    Neg,
    PowInt,
    SelfMapReport,
    Sub,
    Var,
    derivative,
    evaluate,
    polynomial,
    validate_self_map,
)
from bloch_wco.errors import (
    AtCriticalValue,
    IllConditioned,
    InvalidParameter,
    PreconditionViolated,
    UnsupportedSymbol,
)
from bloch_wco.mobius import mobius_values
from bloch_wco.quadrature import DiskRule, build_rule, disk_integrate

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
CRITICAL_TOL = 1e-12
CLUSTER_TOL = 1e-6


# =============================================================================
# POLYNOMIAL SYMBOLS
# =============================================================================

@singledispatch
def polynomial_coefficients(expr) -> np.ndarray:
    """Ascending coefficients of a polynomial expression tree."""
    raise UnsupportedSymbol(f"{type(expr).__name__} is not a polynomial node")


@polynomial_coefficients.register(Var)
def _(expr):
    return np.array([0j, 1 + 0j])


@polynomial_coefficients.register(Const)
def _(expr):
    return np.array([expr.value])


@polynomial_coefficients.register(Neg)
def _(expr):
    return -polynomial_coefficients(expr.operands[0])


@polynomial_coefficients.register(Add)
def _(expr):
    return P.polyadd(*(polynomial_coefficients(op) for op in expr.operands))


@polynomial_coefficients.register(Sub)
def _(expr):
    return P.polysub(*(polynomial_coefficients(op) for op in expr.operands))


@polynomial_coefficients.register(Mul)
def _(expr):
    return P.polymul(*(polynomial_coefficients(op) for op in expr.operands))


@polynomial_coefficients.register(Div)
def _(expr):
    num, den = expr.operands
    if not isinstance(den, Const):
        raise UnsupportedSymbol("division by a non-constant is not polynomial")
    return polynomial_coefficients(num) / den.value


@polynomial_coefficients.register(PowInt)
def _(expr):
    return P.polypow(polynomial_coefficients(expr.operands[0]), expr.n)


@polynomial_coefficients.register(Compose)
def _(expr):
    outer = polynomial_coefficients(expr.outer)
    inner = polynomial_coefficients(expr.inner)
    result = np.array([outer[-1]])
    for c in outer[-2::-1]:
        result = P.polyadd(P.polymul(result, inner), [c])
    return result


def _trim(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    nonzero = np.nonzero(coeffs)[0]
    return coeffs[: nonzero[-1] + 1] if nonzero.size else coeffs[:1]


@dataclass(frozen=True)
class PolynomialMap:
    coefficients: Tuple[complex, ...]
    report: Optional[SelfMapReport] = None

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def at_zero(self) -> complex:
        return self.coefficients[0]

    def __call__(self, z):
        return P.polyval(np.asarray(z, dtype=complex), np.asarray(self.coefficients))

    def derivative_values(self, z):
        return P.polyval(np.asarray(z, dtype=complex), P.polyder(np.asarray(self.coefficients)))

    def as_expr(self) -> AnalyticExpr:
        return polynomial(self.coefficients)


def make_polynomial_map(coefficients, validate: bool = True) -> PolynomialMap:
    """
    Build a PolynomialMap, trimming trailing zeros.

    Raises:
    -------
    InvalidParameter
        degree below 1.
    NotSelfMap
        from validate_self_map.
    """
    coeffs = _trim(coefficients)
    if len(coeffs) < 2:
        raise InvalidParameter("polynomial self-map needs degree >= 1")
    phi = PolynomialMap(tuple(complex(c) for c in coeffs))
    if validate:
        phi = PolynomialMap(phi.coefficients, validate_self_map(phi.as_expr()))
    return phi


def polynomial_map_from_expr(expr: AnalyticExpr, validate: bool = True) -> PolynomialMap:
    """Raises UnsupportedSymbol for non-polynomial trees."""
    return make_polynomial_map(polynomial_coefficients(expr), validate=validate)


# =============================================================================
# PREIMAGES AND COUNTING
# =============================================================================

@dataclass(frozen=True)
class PreimageSet:
    roots: Tuple[Tuple[complex, int], ...]

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.roots)


def _companion_stack(phi: PolynomialMap, w: np.ndarray) -> np.ndarray:
    c = np.asarray(phi.coefficients)
    d = phi.degree
    monic = c[:-1] / c[-1]
    base = np.zeros((d, d), dtype=complex)
    if d > 1:
        base[np.arange(1, d), np.arange(d - 1)] = 1.0
    base[:, -1] = -monic
    stack = np.repeat(base[None, :, :], w.size, axis=0)
    stack[:, 0, -1] = -(c[0] - w) / c[-1]
    return stack


def _roots_for(phi: PolynomialMap, w: np.ndarray) -> np.ndarray:
    """(n, d) array of polished roots of phi(z) = w for each w."""
    w = np.asarray(w, dtype=complex).ravel()
    roots = np.linalg.eigvals(_companion_stack(phi, w))
    with np.errstate(all="ignore"):
        residual = phi(roots) - w[:, None]
        slope = phi.derivative_values(roots)
        step = np.where(np.abs(slope) > 1e-14, residual / slope, 0.0)
    polished = roots - step
    # Keep the polish only where it did not make things worse
    better = np.abs(phi(polished) - w[:, None]) <= np.abs(residual)
    return np.where(better, polished, roots)


def _check_residuals(phi: PolynomialMap, roots: np.ndarray, w: np.ndarray, inside: np.ndarray) -> None:
    residual = np.abs(phi(roots) - w[:, None])
    bad = inside & (residual >= RESIDUAL_TOL)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise IllConditioned(
            f"root {roots[i, j]:.6g} of phi(z) = {w[i]:.6g} has residual {residual[i, j]:.3g}")


def preimages(phi: PolynomialMap, w: complex) -> PreimageSet:
    """Roots of phi(z) = w in the open disk with multiplicity."""
    w = complex(w)
    if not abs(w) < 1.0:
        raise InvalidParameter(f"w must lie in the open disk, got |w| = {abs(w)}")
    warr = np.array([w])
    roots = _roots_for(phi, warr)
    inside = np.abs(roots) < 1.0
    _check_residuals(phi, roots, warr, inside)

    clusters: List[List[complex]] = []
    for z in sorted(roots[0][inside[0]], key=lambda v: (round(v.real, 9), round(v.imag, 9))):
        for cluster in clusters:
            if abs(cluster[0] - z) < CLUSTER_TOL:
                cluster.append(complex(z))
                break
        else:
            clusters.append([complex(z)])
    return PreimageSet(tuple((complex(np.mean(c)), len(c)) for c in clusters))


def counting_values(phi: PolynomialMap, w: np.ndarray, gamma: float,
                    skip_critical: bool = False) -> np.ndarray:
    """
    N_{phi,gamma} at an array of points.

    With skip_critical, points within 1e-12 of phi(0) get 0 and are
    logged; otherwise they raise AtCriticalValue.
    """
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be > 0, got {gamma}")
    w = np.asarray(w, dtype=complex)
    shape = w.shape
    flat = w.ravel()
    critical = np.abs(flat - phi.at_zero) < CRITICAL_TOL
    if np.any(critical):
        if not skip_critical:
            raise AtCriticalValue(f"w = phi(0) = {phi.at_zero:.6g} is a critical value for counting")
        logger.info("counting: %d node(s) at w = phi(0) skipped", int(critical.sum()))

    roots = _roots_for(phi, flat)
    modulus = np.abs(roots)
    inside = (modulus < 1.0) & ~critical[:, None]
    _check_residuals(phi, roots, flat, inside)
    with np.errstate(divide="ignore"):
        terms = np.where(inside, np.log(1.0 / np.where(inside, modulus, 1.0)) ** gamma, 0.0)
    return terms.sum(axis=1).reshape(shape)


def counting_function(phi: PolynomialMap, w: complex, gamma: float) -> float:
    w = complex(w)
    if not abs(w) < 1.0:
        raise InvalidParameter(f"w must lie in the open disk, got |w| = {abs(w)}")
    return float(counting_values(phi, np.array([w]), gamma)[0])


# =============================================================================
# INEQUALITY CHECKS
# =============================================================================

def littlewood_check(phi: PolynomialMap, gamma: float, r: float,
                     rule: Optional[DiskRule] = None) -> float:
    """
    Sub-mean-value margin (1/r^2) int_{r D} N dA - N(0).

    The disk average over rD is the average of N(r z) over D.
    """
    phi0 = phi.at_zero
    if phi0 == 0:
        raise PreconditionViolated("littlewood check needs phi(0) != 0")
    if not 0.0 < r < abs(phi0):
        raise PreconditionViolated(f"need 0 < r < |phi(0)| = {abs(phi0):.6g}, got r = {r}")
    rule = rule or build_rule()
    mean = disk_integrate(counting_values(phi, r * rule.points, gamma), rule)
    return mean - counting_function(phi, 0j, gamma)


@dataclass(frozen=True)
class ChangeOfVariable:
    lhs: float
    rhs: float
    ratio: float


def change_of_variable_ratio(f: AnalyticExpr, phi: PolynomialMap,
                             rule: Optional[DiskRule] = None) -> ChangeOfVariable:
    """
    ||f o phi||^2_{A^2} against |f(phi(0))|^2 + int |f'(w)|^2 N_{phi,2}(w) dA(w).
    """
    rule = rule or build_rule()
    lhs = disk_integrate(np.abs(evaluate(f, phi(rule.points))) ** 2, rule)
    counting = counting_values(phi, rule.points, 2.0, skip_critical=True)
    weight = np.abs(evaluate(derivative(f), rule.points)) ** 2 * counting
    rhs = abs(evaluate(f, phi.at_zero)) ** 2 + disk_integrate(weight, rule)
    if rhs == 0.0:
        ratio = 1.0 if lhs == 0.0 else math.inf
    else:
        ratio = lhs / rhs
    return ChangeOfVariable(lhs, rhs, ratio)


def _sublog_grid(radial: int = 200, angles: int = 64) -> np.ndarray:
    radii = np.linspace(0.0, 1.0, radial + 2)[1:-1]
    theta = 2.0 * np.pi * np.arange(angles) / angles
    return np.outer(radii, np.exp(1j * theta))


def sublog_bound_check(phi: PolynomialMap, radial: int = 200, angles: int = 64) -> float:
    """
    With delta = sup |w|^2 N_{phi,2}(w), returns
    min over 1/2 <= |w| < 1 of (4 delta / (log 2)^2)(log 1/|w|)^2 - N_{phi,2}(w).
    """
    if phi.at_zero != 0:
        raise PreconditionViolated("sublog bound needs phi(0) = 0")
    w = _sublog_grid(radial, angles)
    counting = counting_values(phi, w, 2.0)
    modulus = np.abs(w)
    delta = float(np.max(modulus ** 2 * counting))
    outer = modulus >= 0.5
    bound = 4.0 * delta / math.log(2.0) ** 2 * np.log(1.0 / modulus[outer]) ** 2
    return float(np.min(bound - counting[outer]))


@dataclass(frozen=True)
class CompositionProductBounds:
    mobius_margin: float      # 4||psi||^2 - max_z ||sigma_z o psi - sigma_z(psi(0))||^2
    counting_margin: float    # min over 1/2 <= |z| < 1 of the counting bound minus N_{psi,2}
    psi_norm: float


def composition_product_bounds(psi: PolynomialMap, rule: Optional[DiskRule] = None,
                               z_radii=(0.0, 0.3, 0.6, 0.9), z_angles: int = 8) -> CompositionProductBounds:
    """
    The two estimates behind ||g o psi||_{A^2} <~ ||psi||_{A^2} ||g||_{A^2}
    for psi(0) = 0.
    """
    if psi.at_zero != 0:
        raise PreconditionViolated("composition bounds need psi(0) = 0")
    rule = rule or build_rule()
    psi_values = psi(rule.points)
    psi_sq = disk_integrate(np.abs(psi_values) ** 2, rule)

    worst = 0.0
    theta = 2.0 * np.pi * np.arange(z_angles) / z_angles
    for r in z_radii:
        for z in ([0j] if r == 0.0 else r * np.exp(1j * theta)):
            shifted = mobius_values(z, psi_values) - mobius_values(z, psi.at_zero)
            worst = max(worst, disk_integrate(np.abs(shifted) ** 2, rule))

    w = _sublog_grid()
    modulus = np.abs(w)
    outer = modulus >= 0.5
    counting = counting_values(psi, w[outer], 2.0)
    bound = 16.0 / math.log(2.0) ** 2 * psi_sq * np.log(1.0 / modulus[outer]) ** 2
    return CompositionProductBounds(
        mobius_margin=4.0 * psi_sq - worst,
        counting_margin=float(np.min(bound - counting)),
        psi_norm=math.sqrt(psi_sq),
    )
