"""
Bloch, Bergman and Mobius-invariant oscillation norms.

Every value comes back as a NormValue carrying the grid or rule it was
computed on. Norms that blow up are reported with diverged=True rather
than raised.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from config import ESTIMATOR_CONFIG

from bloch_wco.analytic_core import AnalyticExpr, Const, derivative, evaluate
from bloch_wco.errors import InvalidParameter
from bloch_wco.mobius import AGrid, hyperbolic_ascent, mobius_values
from bloch_wco.quadrature import (
    LARGE_VALUE,
    DiskRule,
    SupGrid,
    SupResult,
    build_rule,
    disk_integrate,
    disk_sup,
)
from bloch_wco.utils import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormValue:
    value: float
    rule_meta: dict = field(default_factory=dict)
    diverged: bool = False
    converged: bool = True
    witness: Optional[complex] = None

    def __float__(self):
        return self.value


def _diverged(value: float) -> bool:
    return not math.isfinite(value) or value > ESTIMATOR_CONFIG["divergence_threshold"]


# =============================================================================
# BLOCH
# =============================================================================

def bloch_integrand(f: AnalyticExpr) -> Callable[[np.ndarray], np.ndarray]:
    """z -> (1 - |z|^2)|f'(z)| with f' built once."""
    df = derivative(f)

    def g(z):
        return (1.0 - np.abs(z) ** 2) * np.abs(evaluate(df, z))

    return g


def bloch_seminorm(f: AnalyticExpr, grid: Optional[SupGrid] = None,
                   hints: Iterable[complex] = ()) -> NormValue:
    grid = grid or SupGrid()
    df = derivative(f)
    if isinstance(df, Const) and df.value == 0:
        return NormValue(0.0, grid.describe(), converged=True, witness=0j)

    result = disk_sup(bloch_integrand(f), grid, hints=hints)
    if result.value >= LARGE_VALUE:
        logger.warning("Bloch seminorm diverged for %r", f)
        return NormValue(math.inf, grid.describe(), diverged=True, converged=False, witness=result.argmax)
    return NormValue(result.value, grid.describe(), diverged=_diverged(result.value),
                     converged=result.converged, witness=result.argmax)


def bloch_norm(f: AnalyticExpr, grid: Optional[SupGrid] = None,
               hints: Iterable[complex] = ()) -> NormValue:
    """|f(0)| + sup (1 - |z|^2)|f'(z)|"""
    semi = bloch_seminorm(f, grid, hints)
    value = abs(evaluate(f, 0j)) + semi.value
    return NormValue(value, semi.rule_meta, diverged=semi.diverged or _diverged(value),
                     converged=semi.converged, witness=semi.witness)


# =============================================================================
# BERGMAN
# =============================================================================

def _check_p(p: float) -> None:
    if not p >= 1.0:
        raise InvalidParameter(f"p must be >= 1, got {p}")


def ap_values_norm(values: np.ndarray, p: float, rule: DiskRule) -> float:
    """(sum of |values|^p against the rule)^(1/p) for values already at rule.points."""
    return disk_integrate(np.abs(values) ** p, rule) ** (1.0 / p)


def ap_norm(f: AnalyticExpr, p: float = 2.0, rule: Optional[DiskRule] = None) -> NormValue:
    _check_p(p)
    rule = rule or build_rule()
    value = ap_values_norm(evaluate(f, rule.points), p, rule)
    return NormValue(value, rule.describe(), diverged=_diverged(value))


def oscillation_values(f: AnalyticExpr, a: complex, rule: DiskRule) -> np.ndarray:
    """f(sigma_a(z)) - f(a) at the rule nodes."""
    a = complex(a)
    return evaluate(f, mobius_values(a, rule.points)) - evaluate(f, a)


def invariant_ap_norm(f: AnalyticExpr, a: complex, p: float = 2.0,
                      rule: Optional[DiskRule] = None) -> NormValue:
    """||f o sigma_a - f(a)||_{A^p}"""
    _check_p(p)
    rule = rule or build_rule()
    value = ap_values_norm(oscillation_values(f, a, rule), p, rule)
    return NormValue(value, {**rule.describe(), "a": complex(a)}, diverged=_diverged(value))


# =============================================================================
# SUP OVER a
# =============================================================================

def sup_over_a(objective: Callable[[complex], float],
               a_grid: Optional[AGrid] = None,
               witness: Optional[complex] = None,
               refine: bool = True,
               workers: int = 1,
               values: Optional[Sequence[float]] = None) -> SupResult:
    """
    Max of objective over the a-grid, then hyperbolic pattern search
    from the best grid point.

    values, when given, are the objective at a_grid.points(witness) in
    order and skip the grid pass.
    """
    a_grid = a_grid or AGrid()
    points = a_grid.points(witness)
    if values is None:
        values = parallel_map(objective, [complex(a) for a in points], workers)
    values = np.asarray(values, dtype=float)
    if values.shape != points.shape:
        raise InvalidParameter(f"expected {points.size} grid values, got {values.size}")
    k = int(np.argmax(values))
    grid_max = float(values[k])
    if not refine:
        return SupResult(grid_max, complex(points[k]), False, grid_max, a_grid.describe())

    a, value, converged = hyperbolic_ascent(
        objective, complex(points[k]), grid_max,
        step=a_grid.refine_step, tol=a_grid.refine_tol, max_iter=a_grid.refine_max_iter)
    return SupResult(max(value, grid_max), a, converged, grid_max, a_grid.describe())


def garsia_bloch_norm(f: AnalyticExpr, a_grid: Optional[AGrid] = None,
                      rule: Optional[DiskRule] = None, workers: int = 1) -> NormValue:
    """sup over a of ||f o sigma_a - f(a)||_{A^2}"""
    rule = rule or build_rule()
    result = sup_over_a(lambda a: invariant_ap_norm(f, a, 2.0, rule).value, a_grid, workers=workers)
    meta = {**rule.describe(), **result.meta}
    return NormValue(result.value, meta, diverged=_diverged(result.value),
                     converged=result.converged, witness=result.argmax)


# =============================================================================
# INEQUALITY CHECKS ON SINGLE FUNCTIONS
# =============================================================================

@dataclass(frozen=True)
class GrowthCheck:
    max_ratio: float
    argmax: complex


def growth_bound_check(f: AnalyticExpr, z_grid: Optional[np.ndarray] = None,
                       norm: Optional[float] = None) -> GrowthCheck:
    """
    max over z_grid of |f(z)| / (log(2/(1-|z|^2)) ||f||_B).

    Bloch functions stay at or below 1/log 2, which the constant 1
    attains at the origin.
    """
    z = SupGrid().points if z_grid is None else np.asarray(z_grid, dtype=complex).ravel()
    norm = bloch_norm(f).value if norm is None else norm
    if norm == 0.0:
        return GrowthCheck(0.0, 0j)
    ratios = np.abs(evaluate(f, z)) / (np.log(2.0 / (1.0 - np.abs(z) ** 2)) * norm)
    k = int(np.argmax(ratios))
    return GrowthCheck(float(ratios[k]), complex(z[k]))


@dataclass(frozen=True)
class OscillationPair:
    sup_a2: float
    sup_a4: float
    witness: complex


def oscillation_pair(f: AnalyticExpr, a_grid: Optional[AGrid] = None,
                     rule: Optional[DiskRule] = None) -> OscillationPair:
    """
    Grid sups of the A^2 and A^4 oscillations of f.

    The rule weights form a probability measure, so the A^2 value never
    exceeds the A^4 value at the same a.
    """
    rule = rule or build_rule()
    a_grid = a_grid or AGrid()
    best2, best4, witness = 0.0, 0.0, 0j
    for a in a_grid.points():
        values = oscillation_values(f, complex(a), rule)
        v2 = ap_values_norm(values, 2.0, rule)
        v4 = ap_values_norm(values, 4.0, rule)
        if v2 > best2:
            best2, witness = v2, complex(a)
        best4 = max(best4, v4)
    return OscillationPair(best2, best4, witness)


def littlewood_paley_ratio(f: AnalyticExpr, rule: Optional[DiskRule] = None) -> float:
    """||f||_{A^2}^2 / (|f(0)|^2 + integral |f'|^2 (1-|w|^2)^2 dA)"""
    rule = rule or build_rule()
    lhs = disk_integrate(np.abs(evaluate(f, rule.points)) ** 2, rule)
    energy = disk_integrate(
        np.abs(evaluate(derivative(f), rule.points)) ** 2 * (1.0 - np.abs(rule.points) ** 2) ** 2, rule)
    rhs = abs(evaluate(f, 0j)) ** 2 + energy
    if rhs == 0.0:
        return 1.0 if lhs == 0.0 else math.inf
    return lhs / rhs
