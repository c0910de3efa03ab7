"""
Integration over the unit disk against normalized area measure
dA = (1/pi) dx dy, and supremum search over the disk.

Rule: Gauss-Legendre in s on (0, 1) under r = 1 - (1 - s)^q (graded
toward the boundary for q > 1) times the uniform trapezoid in angle.
Reductions run in a fixed order: angular ring sums first, then a
correctly rounded sum over rings.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np
from scipy import special

from config import QUADRATURE_CONFIG, SUP_CONFIG

from bloch_wco.errors import InvalidParameter, NonFiniteIntegrand

logger = logging.getLogger(__name__)

Integrand = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]

# Returned by disk_sup when the integrand blows up on the grid
LARGE_VALUE = float(np.finfo(float).max)


# =============================================================================
# DISK RULE
# =============================================================================

@dataclass(frozen=True)
class DiskRule:
    radii: Tuple[float, ...]
    radial_weights: Tuple[float, ...]   # sum to 1: the measure 2r dr on (0, 1)
    angular_count: int
    grading_exponent: float

    @property
    def radial_nodes(self):
        return list(zip(self.radii, self.radial_weights))

    @cached_property
    def points(self) -> np.ndarray:
        """Nodes as an (n_r, M) complex array, radius-major."""
        theta = 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count
        return np.outer(np.asarray(self.radii), np.exp(1j * theta))

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.asarray(self.radial_weights) / self.angular_count
        return np.repeat(w[:, None], self.angular_count, axis=1)

    @property
    def size(self) -> int:
        return len(self.radii) * self.angular_count

    def describe(self) -> dict:
        return {
            "radial_nodes": len(self.radii),
            "angular_nodes": self.angular_count,
            "grading": self.grading_exponent,
        }


def build_rule(n_r: Optional[int] = None, M: Optional[int] = None, q: Optional[float] = None) -> DiskRule:
    """
    Tensor rule for the normalized area measure.

    Parameters:
    -----------
    n_r : int
        Radial Gauss-Legendre nodes (>= 16).
    M : int
        Angular nodes (>= 64).
    q : float
        Grading exponent (>= 1).

    Returns:
    --------
    DiskRule
    """
    n_r = QUADRATURE_CONFIG["radial_nodes"] if n_r is None else int(n_r)
    M = QUADRATURE_CONFIG["angular_nodes"] if M is None else int(M)
    q = QUADRATURE_CONFIG["grading"] if q is None else float(q)
    if n_r < QUADRATURE_CONFIG["min_radial_nodes"]:
        raise InvalidParameter(f"n_r must be >= {QUADRATURE_CONFIG['min_radial_nodes']}, got {n_r}")
    if M < QUADRATURE_CONFIG["min_angular_nodes"]:
        raise InvalidParameter(f"M must be >= {QUADRATURE_CONFIG['min_angular_nodes']}, got {M}")
    if not q >= 1.0:
        raise InvalidParameter(f"grading exponent must be >= 1, got {q}")

    x, w = special.roots_legendre(n_r)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    r = 1.0 - (1.0 - s) ** q
    dr_ds = q * (1.0 - s) ** (q - 1.0)
    radial = 2.0 * r * dr_ds * ws
    # Exact for integer q; for fractional q this removes the O(n^-2q) mass defect
    radial = radial / math.fsum(radial.tolist())

    return DiskRule(
        radii=tuple(float(v) for v in r),
        radial_weights=tuple(float(v) for v in radial),
        angular_count=M,
        grading_exponent=q,
    )


def _values_on(g: Integrand, points: np.ndarray) -> np.ndarray:
    if callable(g):
        values = np.asarray(g(points), dtype=float)
    else:
        values = np.asarray(g, dtype=float)
    return np.broadcast_to(values, points.shape)


def disk_integrate(g: Integrand, rule: DiskRule) -> float:
    """
    Quadrature sum of a real integrand over the disk.

    g is either a vectorized callable taking the (n_r, M) node array,
    or an array of values already evaluated at rule.points.

    Raises:
    -------
    NonFiniteIntegrand
        first offending node in radius-major order.
    """
    values = _values_on(g, rule.points)
    finite = np.isfinite(values)
    if not np.all(finite):
        index = int(np.argmin(finite.ravel()))
        raise NonFiniteIntegrand(index, complex(rule.points.ravel()[index]))
    ring_means = values.mean(axis=1)
    return math.fsum((ring_means * np.asarray(rule.radial_weights)).tolist())


# =============================================================================
# SUPREMUM OVER THE DISK
# =============================================================================

@dataclass(frozen=True)
class SupGrid:
    radial_count: int = SUP_CONFIG["radial_count"]
    angular_count: int = SUP_CONFIG["angular_count"]
    boundary_levels: int = SUP_CONFIG["boundary_levels"]
    probe_radius: float = SUP_CONFIG["probe_radius"]
    step_tol: float = SUP_CONFIG["step_tol"]
    max_iter: int = SUP_CONFIG["max_iter"]
    starts: int = SUP_CONFIG["starts"]

    def __post_init__(self):
        if self.radial_count < 2 or self.angular_count < 8:
            raise InvalidParameter("sup grid too coarse")
        if self.boundary_levels < 1:
            raise InvalidParameter("sup grid needs at least one boundary level")
        if not 0.0 < self.probe_radius < 1.0:
            raise InvalidParameter(f"probe radius must lie in (0, 1), got {self.probe_radius}")

    @cached_property
    def radii(self) -> np.ndarray:
        j = np.arange(self.radial_count)
        graded = 1.0 - (1.0 - j / self.radial_count) ** 2
        exponents = 6.0 * np.arange(1, self.boundary_levels + 1) / self.boundary_levels
        boundary = 1.0 - 10.0 ** (-exponents)
        radii = np.unique(np.concatenate([graded, boundary]))
        return radii[radii <= self.probe_radius]

    @property
    def max_radius(self) -> float:
        # r e^{i theta} can land an ulp past r
        return self.probe_radius * (1.0 - 4.0 * np.finfo(float).eps)

    @cached_property
    def points(self) -> np.ndarray:
        """Flat array of grid points; the origin appears once, none past probe_radius."""
        theta = 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count
        ring = np.exp(1j * theta)
        rest = np.minimum(self.radii[self.radii > 0.0], self.max_radius)
        return np.concatenate([np.array([0j]), np.outer(rest, ring).ravel()])

    def describe(self) -> dict:
        return {
            "sup_radial": self.radial_count,
            "sup_angular": self.angular_count,
            "sup_boundary_levels": self.boundary_levels,
            "probe_radius": self.probe_radius,
        }


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: complex
    converged: bool
    grid_max: float = 0.0
    meta: dict = field(default_factory=dict)


def _pattern_search(g, r: np.ndarray, theta: np.ndarray, best: np.ndarray, grid: SupGrid):
    """
    Coordinate descent in (r, theta) for several starts at once.

    Each round tries r +- dr and theta +- dtheta for every start; a
    start moves to its best improving trial, otherwise its steps halve.
    """
    n = len(r)
    dr = np.maximum(0.25 * (1.0 - r), 1e-3)
    dtheta = np.full(n, 2.0 * np.pi / grid.angular_count)
    offsets_r = np.array([1.0, -1.0, 0.0, 0.0])
    offsets_t = np.array([0.0, 0.0, 1.0, -1.0])

    for _ in range(grid.max_iter):
        active = (dr >= grid.step_tol) | (dtheta >= grid.step_tol)
        if not np.any(active):
            break
        tr = np.clip(r[:, None] + offsets_r[None, :] * dr[:, None], 0.0, grid.max_radius)
        tt = theta[:, None] + offsets_t[None, :] * dtheta[:, None]
        values = np.asarray(g(tr * np.exp(1j * tt)), dtype=float)
        values = np.where(np.isfinite(values), values, -np.inf)
        k = np.argmax(values, axis=1)
        rows = np.arange(n)
        improved = active & (values[rows, k] > best)
        r = np.where(improved, tr[rows, k], r)
        theta = np.where(improved, tt[rows, k], theta)
        best = np.where(improved, values[rows, k], best)
        shrink = active & ~improved
        dr = np.where(shrink, 0.5 * dr, dr)
        dtheta = np.where(shrink, 0.5 * dtheta, dtheta)

    converged = (dr < grid.step_tol) & (dtheta < grid.step_tol)
    return r, theta, best, converged


def disk_sup(g: Callable[[np.ndarray], np.ndarray],
             grid: Optional[SupGrid] = None,
             refine: bool = True,
             hints: Iterable[complex] = ()) -> SupResult:
    """
    Supremum of a non-negative function over the disk.

    Parameters:
    -----------
    g : callable
        Vectorized real function of complex points.
    grid : SupGrid
        Coarse polar grid and refinement controls.
    refine : bool
        Run the pattern search from the best grid points and hints.
    hints : iterable of complex
        Extra start points, e.g. where a test function concentrates.

    Returns:
    --------
    SupResult
        value >= max over the coarse grid.
    """
    grid = grid or SupGrid()
    points = grid.points
    hint_points = np.array([complex(h) for h in hints], dtype=complex)
    if hint_points.size:
        mod = np.abs(hint_points)
        hint_points = np.where(mod > grid.max_radius, hint_points * grid.max_radius / np.maximum(mod, 1e-300),
                               hint_points)
        points = np.concatenate([points, hint_points])

    values = np.asarray(g(points), dtype=float)
    finite = np.isfinite(values)
    if not np.all(finite):
        bad = int(np.argmin(finite))
        logger.warning("disk_sup: non-finite integrand at %s, reporting divergence", points[bad])
        return SupResult(LARGE_VALUE, complex(points[bad]), False, LARGE_VALUE, grid.describe())

    n_grid = grid.points.size
    grid_max = float(values[:n_grid].max())
    order = np.argsort(-values[:n_grid], kind="stable")[: grid.starts]
    starts = np.concatenate([order, np.arange(n_grid, points.size)])
    k_best = int(np.argmax(values))
    value, argmax, converged = float(values[k_best]), complex(points[k_best]), False

    if refine:
        start_pts = points[starts]
        r, theta, best, conv = _pattern_search(
            g, np.abs(start_pts), np.angle(start_pts), values[starts].copy(), grid)
        j = int(np.argmax(best))
        if best[j] >= value:
            value, argmax = float(best[j]), complex(r[j] * np.exp(1j * theta[j]))
        converged = bool(conv[j])

    if value > 1e300:
        converged = False
    return SupResult(value, argmax, converged, grid_max, grid.describe())
