"""
Toolkit Configuration
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# =============================================================================
# PROJECT PATHS
# =============================================================================

PROJECT_ROOT = Path(__file__).parent.parent

PATHS = {
    "project_root": PROJECT_ROOT,
    "seeds": PROJECT_ROOT / "data" / "seeds",
    "corpus": PROJECT_ROOT / "data" / "seeds" / "corpus",
    "reports": PROJECT_ROOT / "data" / "reports",
}

# =============================================================================
# DISK QUADRATURE
# =============================================================================

QUADRATURE_CONFIG = {
    # Default tensor rule: Gauss-Legendre radial x trapezoid angular
    "radial_nodes": 64,
    "angular_nodes": 256,
    "grading": 2.0,               # r = 1 - (1 - s)^q

    # Indicator integrands (level sets) need a finer radial rule
    "level_radial_nodes": 128,
    "level_angular_nodes": 256,

    # Hard limits from the rule definition
    "min_radial_nodes": 16,
    "min_angular_nodes": 64,
}

# =============================================================================
# SUPREMUM SEARCH OVER THE DISK
# =============================================================================

SUP_CONFIG = {
    "radial_count": 48,           # graded interior radii
    "angular_count": 256,
    "boundary_levels": 8,         # radii 1 - 10^(-6k/L), k = 1..L
    "probe_radius": 1.0 - 1e-6,   # sup probes never go past this
    "step_tol": 1e-10,
    "max_iter": 200,
    "starts": 3,                  # best grid points refined
}

# =============================================================================
# A-GRID (sup over a in the disk)
# =============================================================================

A_GRID_CONFIG = {
    "radii": [0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999],
    "angles": 64,
    # Extra points on the ray toward the boundary contact witness
    "boundary_probes": [0.9, 0.99, 0.999, 0.9999],
    "refine_step": 0.1,           # initial pseudo-hyperbolic step
    "refine_tol": 1e-4,
    "refine_max_iter": 60,
}

# =============================================================================
# SELF-MAP VALIDATION
# =============================================================================

SELF_MAP_CONFIG = {
    "angular_count": 1024,
    "probe_radius": 1.0 - 1e-6,
    "tol_selfmap": 1e-9,
    "tol_boundary": 1e-3,
}

# =============================================================================
# ESTIMATORS AND CLASSIFICATION
# =============================================================================

ESTIMATOR_CONFIG = {
    "powers": 200,
    "tail_window": 50,
    "levels": [0.9, 0.99, 0.999, 0.9999],
    "gamma_r_levels": [0.9, 0.99],
    "t_levels": [0.9, 0.99, 0.999],

    "divergence_threshold": 1e6,
    "eps_compact": 0.02,
    "growth_ratio": 1.1,          # tail/head power-norm ratio that means growth
    "inconclusive_factor": 2.0,

    "lower_bound_samples": 16,
    "lower_bound_degree": 10,
    "audit_constant": 20.0,
    "audit_radii": [0.0, 0.5, 0.9],
    "audit_angles": 8,
}

# =============================================================================
# RUN CONFIGURATION (per invocation, CLI flags override)
# =============================================================================

RUN_CONFIG = {
    "seed": int(os.getenv("BLOCH_WCO_SEED", "42")),
    "workers": int(os.getenv("BLOCH_WCO_WORKERS", "4")),
    "format": "csv",
    "tol": 1e-8,
    "log_level": os.getenv("BLOCH_WCO_LOG_LEVEL", "INFO"),
}

# =============================================================================
# VALIDATION
# =============================================================================

def _check_levels(name: str, levels: list, errors: list) -> None:
    if not levels:
        errors.append(f"{name} is empty")
        return
    if any(not 0.0 < r < 1.0 for r in levels):
        errors.append(f"{name} must lie in (0, 1): {levels}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        errors.append(f"{name} must be strictly increasing: {levels}")


def validate_config():
    """Check that settings are consistent."""
    errors = []

    if QUADRATURE_CONFIG["radial_nodes"] < QUADRATURE_CONFIG["min_radial_nodes"]:
        errors.append("radial_nodes below minimum")
    if QUADRATURE_CONFIG["angular_nodes"] < QUADRATURE_CONFIG["min_angular_nodes"]:
        errors.append("angular_nodes below minimum")
    if QUADRATURE_CONFIG["grading"] < 1.0:
        errors.append("grading exponent must be >= 1")

    if SELF_MAP_CONFIG["angular_count"] < 256:
        errors.append("self-map probe needs at least 256 angles")

    _check_levels("ESTIMATOR_CONFIG['levels']", ESTIMATOR_CONFIG["levels"], errors)
    _check_levels("ESTIMATOR_CONFIG['gamma_r_levels']", ESTIMATOR_CONFIG["gamma_r_levels"], errors)
    _check_levels("ESTIMATOR_CONFIG['t_levels']", ESTIMATOR_CONFIG["t_levels"], errors)

    if ESTIMATOR_CONFIG["tail_window"] > ESTIMATOR_CONFIG["powers"]:
        errors.append("tail_window larger than powers")

    if RUN_CONFIG["workers"] < 1:
        errors.append("BLOCH_WCO_WORKERS must be >= 1")

    if not PATHS["corpus"].exists():
        errors.append(f"Corpus not found: {PATHS['corpus']}")

    if errors:
        raise ValueError("Config validation failed:\n" + "\n".join(errors))

    return True

# validate_config()
