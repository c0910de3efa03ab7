"""
Disk automorphisms sigma_a and pseudo-hyperbolic geometry.

Besides the sigma_a expression node this module owns the a-grid used
for every sup over a in the disk, and the local search that refines a
grid maximum by stepping a fixed pseudo-hyperbolic distance from the
current point.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from config import A_GRID_CONFIG

from bloch_wco.analytic_core import AnalyticExpr, Mobius
from bloch_wco.errors import InvalidParameter

logger = logging.getLogger(__name__)

# Largest |a| admitted for sigma_a
MAX_MODULUS = 1.0 - 1e-8


@dataclass(frozen=True)
class DiskPoint:
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        if not abs(self.value) < 1.0:
            raise InvalidParameter(f"Point must lie in the open disk, got |z| = {abs(self.value)}")

    def __complex__(self):
        return self.value


def make_mobius(a) -> AnalyticExpr:
    """sigma_a as an expression; sigma_a(0) = a, sigma_a(a) = 0, sigma_a o sigma_a = id."""
    a = complex(a)
    if abs(a) > MAX_MODULUS:
        raise InvalidParameter(f"|a| = {abs(a)} exceeds the admitted maximum {MAX_MODULUS}")
    return Mobius(a)


def mobius_values(a: complex, z):
    """sigma_a evaluated directly on numpy points."""
    return (a - z) / (1.0 - np.conj(a) * z)


def mobius_derivative_values(a: complex, z):
    return -(1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2


def pseudo_hyperbolic(z, w):
    """|sigma_w(z)| = |z - w| / |1 - conj(w) z|; symmetric in z and w."""
    z = np.asarray(complex(z) if isinstance(z, DiskPoint) else z, dtype=complex)
    w = np.asarray(complex(w) if isinstance(w, DiskPoint) else w, dtype=complex)
    value = np.abs(z - w) / np.abs(1.0 - np.conj(w) * z)
    return float(value) if value.ndim == 0 else value


def schwarz_pick_defect(a: complex, z):
    """(1-|z|^2)|sigma_a'(z)| - (1-|sigma_a(z)|^2); zero for every automorphism."""
    z = np.asarray(z, dtype=complex)
    lhs = (1.0 - np.abs(z) ** 2) * np.abs(mobius_derivative_values(a, z))
    rhs = 1.0 - np.abs(mobius_values(a, z)) ** 2
    return lhs - rhs


# =============================================================================
# A-GRID AND LOCAL REFINEMENT
# =============================================================================

@dataclass(frozen=True)
class AGrid:
    radii: Tuple[float, ...] = field(default_factory=lambda: tuple(A_GRID_CONFIG["radii"]))
    angles: int = A_GRID_CONFIG["angles"]
    boundary_probes: Tuple[float, ...] = field(
        default_factory=lambda: tuple(A_GRID_CONFIG["boundary_probes"]))
    refine_step: float = A_GRID_CONFIG["refine_step"]
    refine_tol: float = A_GRID_CONFIG["refine_tol"]
    refine_max_iter: int = A_GRID_CONFIG["refine_max_iter"]

    def __post_init__(self):
        if any(not 0.0 <= r <= MAX_MODULUS for r in self.radii):
            raise InvalidParameter(f"a-grid radii must lie in [0, 1): {self.radii}")
        if self.angles < 1:
            raise InvalidParameter("a-grid needs at least one angle")

    def points(self, witness: Optional[complex] = None) -> np.ndarray:
        """
        Grid points in radius-major order, radius 0 listed once.

        When a boundary contact witness is given, points on the ray
        through it at the boundary probe radii are appended.
        """
        theta = 2.0 * np.pi * np.arange(self.angles) / self.angles
        rings = []
        for r in self.radii:
            rings.append(np.array([0j]) if r == 0.0 else r * np.exp(1j * theta))
        if witness is not None and abs(witness) > 0.0:
            direction = witness / abs(witness)
            rings.append(np.array([min(rho, MAX_MODULUS) * direction for rho in self.boundary_probes]))
        return np.concatenate(rings)

    def describe(self) -> dict:
        return {
            "a_radii": list(self.radii),
            "a_angles": self.angles,
            "a_boundary_probes": list(self.boundary_probes),
        }


def hyperbolic_ascent(objective: Callable[[complex], float],
                      start: complex,
                      start_value: Optional[float] = None,
                      step: float = A_GRID_CONFIG["refine_step"],
                      tol: float = A_GRID_CONFIG["refine_tol"],
                      max_iter: int = A_GRID_CONFIG["refine_max_iter"]) -> Tuple[complex, float, bool]:
    """
    Pattern search for a local max of objective over the disk.

    Trial points are sigma_a(delta * i^k), k = 0..3, all at
    pseudo-hyperbolic distance delta from the current a. delta halves
    when no trial improves.

    Returns:
    --------
    (argmax, value, converged)
    """
    a = complex(start)
    best = objective(a) if start_value is None else start_value
    delta = step
    directions = np.array([1, 1j, -1, -1j])

    for _ in range(max_iter):
        if delta < tol:
            return a, best, True
        trials = mobius_values(a, delta * directions)
        trials = [t if abs(t) <= MAX_MODULUS else t * MAX_MODULUS / abs(t) for t in trials]
        values = [objective(complex(t)) for t in trials]
        k = int(np.argmax(values))
        if values[k] > best:
            a, best = complex(trials[k]), values[k]
        else:
            delta *= 0.5

    logger.debug("hyperbolic ascent stopped at max_iter with delta=%.3g", delta)
    return a, best, delta < tol
