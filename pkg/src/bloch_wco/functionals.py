"""
Pointwise functionals of a symbol pair (u, phi) and their behaviour
near the boundary.

For a in the disk with c = phi(a):

    alpha(a) = |u(a)| ||sigma_c o phi o sigma_a||_{A^2}
    beta(a)  = log(2/(1-|c|^2)) ||u o sigma_a - u(a)||_{A^2}

A FunctionalProfile collects these over the a-grid together with the
power norms ||u phi^n||_B, the norms of the operator on g_a and the
level-set moments. boundary_limsup turns the samples into sups over
the level sets {|phi(a)| >= r}, one row per level.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import ESTIMATOR_CONFIG, QUADRATURE_CONFIG, RUN_CONFIG, SELF_MAP_CONFIG

from bloch_wco.analytic_core import (
    AnalyticExpr,
    Compose,
    Const,
    Div,
    Exp,
    Log,
    Mobius,
    Mul,
    PowInt,
    SelfMapReport,
    Sub,
    Var,
    Z,
    evaluate,
    validate_self_map,
)
from bloch_wco.errors import AtCriticalValue, InvalidParameter, UnsupportedSymbol
from bloch_wco.mobius import AGrid, make_mobius, mobius_values
from bloch_wco.nevanlinna import (
    change_of_variable_ratio,
    composition_product_bounds,
    counting_function,
    littlewood_check,
    polynomial_map_from_expr,
    sublog_bound_check,
)
from bloch_wco.norms import (
    ap_values_norm,
    bloch_norm,
    bloch_seminorm,
    growth_bound_check,
    invariant_ap_norm,
    littlewood_paley_ratio,
    oscillation_pair,
    oscillation_values,
    sup_over_a,
)
from bloch_wco.quadrature import DiskRule, SupGrid, SupResult, build_rule, disk_integrate, disk_sup
from bloch_wco.utils import parallel_map

logger = logging.getLogger(__name__)

MAX_POWERS = 512
TEST_KINDS = ("f", "h", "g")
QUANTITIES = ("alpha", "beta", "g_norm", "level_moment")


# =============================================================================
# SYMBOL PAIRS AND SETTINGS
# =============================================================================

@dataclass(frozen=True)
class SymbolPair:
    u: AnalyticExpr
    phi: AnalyticExpr
    report: SelfMapReport
    label: str = ""

    @property
    def witness(self) -> Optional[complex]:
        """Boundary contact witness, None for strict self-maps."""
        return self.report.witness if self.report.boundary_contact else None

    def operator(self, f: AnalyticExpr) -> AnalyticExpr:
        """u * (f o phi)"""
        if isinstance(self.phi, Var):
            return Mul(self.u, f)
        return Mul(self.u, Compose(f, self.phi))


def make_pair(u: AnalyticExpr, phi: AnalyticExpr, label: str = "",
              report: Optional[SelfMapReport] = None) -> SymbolPair:
    """
    Validate phi as a self-map and check u evaluates on the probe circle.

    Raises:
    -------
    NotSelfMap
        from validate_self_map.
    NonFiniteValue, DivisionNearZero, LogDomain
        u cannot be evaluated near the boundary.
    """
    report = report or validate_self_map(phi)
    theta = 2.0 * np.pi * np.arange(256) / 256
    evaluate(u, SELF_MAP_CONFIG["probe_radius"] * np.exp(1j * theta))
    return SymbolPair(u, phi, report, label)


def _level_rule() -> DiskRule:
    return build_rule(QUADRATURE_CONFIG["level_radial_nodes"], QUADRATURE_CONFIG["level_angular_nodes"])


def _increasing(name: str, levels: Sequence[float]) -> None:
    if not levels:
        raise InvalidParameter(f"{name} must not be empty")
    if any(not 0.0 < r < 1.0 for r in levels):
        raise InvalidParameter(f"{name} must lie in (0, 1): {list(levels)}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise InvalidParameter(f"{name} must be strictly increasing: {list(levels)}")


@dataclass(frozen=True)
class ProfileSettings:
    rule: DiskRule = field(default_factory=build_rule)
    level_rule: DiskRule = field(default_factory=_level_rule)
    sup_grid: SupGrid = field(default_factory=SupGrid)
    a_grid: AGrid = field(default_factory=AGrid)
    powers: int = ESTIMATOR_CONFIG["powers"]
    tail_window: int = ESTIMATOR_CONFIG["tail_window"]
    levels: Tuple[float, ...] = field(default_factory=lambda: tuple(ESTIMATOR_CONFIG["levels"]))
    gamma_r_levels: Tuple[float, ...] = field(default_factory=lambda: tuple(ESTIMATOR_CONFIG["gamma_r_levels"]))
    t_levels: Tuple[float, ...] = field(default_factory=lambda: tuple(ESTIMATOR_CONFIG["t_levels"]))
    tol: float = RUN_CONFIG["tol"]
    workers: int = RUN_CONFIG["workers"]

    def __post_init__(self):
        if not 0 <= self.powers <= MAX_POWERS:
            raise InvalidParameter(f"powers must lie in [0, {MAX_POWERS}], got {self.powers}")
        if not 1 <= self.tail_window <= self.powers + 1:
            raise InvalidParameter(f"tail_window must lie in [1, {self.powers + 1}], got {self.tail_window}")
        _increasing("levels", self.levels)
        _increasing("gamma_r_levels", self.gamma_r_levels)
        _increasing("t_levels", self.t_levels)
        if self.workers < 1:
            raise InvalidParameter("workers must be >= 1")

    def describe(self) -> dict:
        return {
            **self.rule.describe(),
            "level_radial_nodes": len(self.level_rule.radii),
            **self.sup_grid.describe(),
            **self.a_grid.describe(),
            "powers": self.powers,
            "tail_window": self.tail_window,
            "levels": list(self.levels),
            "gamma_r_levels": list(self.gamma_r_levels),
            "t_levels": list(self.t_levels),
            "tol": self.tol,
        }


# =============================================================================
# POINTWISE FUNCTIONALS
# =============================================================================

def _phi_at(pair: SymbolPair, a: complex) -> complex:
    c = complex(evaluate(pair.phi, complex(a)))
    if not abs(c) < 1.0:
        raise InvalidParameter(f"|phi(a)| = {abs(c)} at a = {a} is not below 1")
    return c


def _log_weight(c: complex) -> float:
    return math.log(2.0 / (1.0 - abs(c) ** 2))


def conjugated_values(pair: SymbolPair, a: complex, rule: DiskRule) -> np.ndarray:
    """sigma_{phi(a)} o phi o sigma_a at the rule nodes."""
    a = complex(a)
    c = _phi_at(pair, a)
    return mobius_values(c, evaluate(pair.phi, mobius_values(a, rule.points)))


def alpha(pair: SymbolPair, a: complex, rule: Optional[DiskRule] = None) -> float:
    rule = rule or build_rule()
    a = complex(a)
    _phi_at(pair, a)
    weight = abs(complex(evaluate(pair.u, a)))
    if weight == 0.0:
        return 0.0
    return weight * ap_values_norm(conjugated_values(pair, a, rule), 2.0, rule)


def beta(pair: SymbolPair, a: complex, rule: Optional[DiskRule] = None) -> float:
    rule = rule or build_rule()
    a = complex(a)
    c = _phi_at(pair, a)
    oscillation = ap_values_norm(oscillation_values(pair.u, a, rule), 2.0, rule)
    if oscillation == 0.0:
        return 0.0
    return _log_weight(c) * oscillation


def _h_expr(c: complex) -> AnalyticExpr:
    return Log(Div(Const(2.0), Sub(Const(1.0), Mul(Const(c.conjugate()), Var()))))


def test_family(phi: AnalyticExpr, a: complex, kind: str = "f") -> AnalyticExpr:
    """
    Test functions attached to c = phi(a).

    f : sigma_c(z) - c
    h : log(2 / (1 - conj(c) z))
    g : h^2 / h(c)
    """
    c = complex(evaluate(phi, complex(a)))
    if not abs(c) < 1.0:
        raise InvalidParameter(f"|phi(a)| = {abs(c)} is not below 1")
    if kind == "f":
        return Sub(make_mobius(c), Const(c))
    if kind == "h":
        return _h_expr(c)
    if kind == "g":
        return Div(PowInt(_h_expr(c), 2), Const(_log_weight(c)))
    raise InvalidParameter(f"unknown test function kind {kind!r}, expected one of {TEST_KINDS}")


def g_norm(pair: SymbolPair, a: complex, grid: Optional[SupGrid] = None) -> float:
    """||u C_phi g_a||_B, searched from a."""
    g = test_family(pair.phi, a, "g")
    return bloch_norm(pair.operator(g), grid, hints=(complex(a),)).value


def power_bloch_norms(pair: SymbolPair, N: int, grid: Optional[SupGrid] = None,
                      workers: int = 1) -> List[float]:
    """[||u||_B, ||u phi||_B, ..., ||u phi^N||_B]"""
    if not 0 <= N <= MAX_POWERS:
        raise InvalidParameter(f"N must lie in [0, {MAX_POWERS}], got {N}")
    grid = grid or SupGrid()
    hints = () if pair.witness is None else (pair.witness,)

    def norm_of(n: int) -> float:
        expr = pair.u if n == 0 else Mul(pair.u, PowInt(pair.phi, n))
        return bloch_norm(expr, grid, hints).value

    return parallel_map(norm_of, range(N + 1), workers)


def level_set_moments(pair: SymbolPair, a: complex, t_levels: Iterable[float],
                      rule: Optional[DiskRule] = None) -> List[float]:
    """
    (integral over E(t) of |u o sigma_a|^4 dA)^(1/4) for each t, where
    E(t) = {|sigma_{phi(a)} o phi o sigma_a| > t}.
    """
    t_levels = [float(t) for t in t_levels]
    if any(not 0.0 < t < 1.0 for t in t_levels):
        raise InvalidParameter(f"t levels must lie in (0, 1): {t_levels}")
    rule = rule or _level_rule()
    a = complex(a)
    modulus = np.abs(conjugated_values(pair, a, rule))
    weights = np.abs(evaluate(pair.u, mobius_values(a, rule.points))) ** 4
    weights = np.broadcast_to(weights, rule.points.shape)
    if not np.any(weights):
        return [0.0] * len(t_levels)
    return [disk_integrate(np.where(modulus > t, weights, 0.0), rule) ** 0.25 for t in t_levels]


def level_set_moment(pair: SymbolPair, a: complex, t: float, rule: Optional[DiskRule] = None) -> float:
    return level_set_moments(pair, a, [t], rule)[0]


# =============================================================================
# PROFILES
# =============================================================================

@dataclass(frozen=True)
class ASample:
    a: complex
    phi_modulus: float
    alpha: float
    beta: float
    g_norm: Optional[float] = None          # only where |phi(a)| reaches the lowest level
    moments: Tuple[float, ...] = ()         # one per t level


@dataclass(frozen=True)
class LevelSup:
    level: float
    value: float
    witness: Optional[complex]
    vacuous: bool
    t_level: Optional[float] = None


@dataclass(frozen=True)
class BoundaryLimsup:
    quantity: str
    levels: Tuple[LevelSup, ...]
    approximant: float
    vacuous: bool
    below_tol: bool = False


@dataclass(frozen=True)
class FunctionalProfile:
    pair: SymbolPair
    settings: ProfileSettings
    a_samples: Tuple[ASample, ...]
    power_norms: Tuple[float, ...]
    sup_alpha: SupResult
    sup_beta: SupResult
    boundary_levels: Dict[str, BoundaryLimsup] = field(default_factory=dict)

    def values(self, quantity: str) -> np.ndarray:
        if quantity == "g_norm":
            return np.array([np.nan if s.g_norm is None else s.g_norm for s in self.a_samples])
        if quantity in ("alpha", "beta"):
            return np.array([getattr(s, quantity) for s in self.a_samples])
        raise InvalidParameter(f"no per-sample values for {quantity!r}")

    @property
    def moduli(self) -> np.ndarray:
        return np.array([s.phi_modulus for s in self.a_samples])

    @property
    def points(self) -> np.ndarray:
        return np.array([s.a for s in self.a_samples], dtype=complex)


def _sample(pair: SymbolPair, a: complex, settings: ProfileSettings, boundary_terms: bool) -> ASample:
    c = _phi_at(pair, a)
    sample = ASample(a, abs(c), alpha(pair, a, settings.rule), beta(pair, a, settings.rule))
    if not boundary_terms:
        return sample
    moments = tuple(level_set_moments(pair, a, settings.t_levels, settings.level_rule))
    g_value = g_norm(pair, a, settings.sup_grid) if abs(c) >= settings.levels[0] else None
    return replace(sample, g_norm=g_value, moments=moments)


def _guarded(objective):
    # Refinement steps that push |phi(a)| onto the circle count as no improvement
    def wrapped(a):
        try:
            return objective(a)
        except InvalidParameter:
            return -math.inf
    return wrapped


def build_profile(pair: SymbolPair, settings: Optional[ProfileSettings] = None,
                  boundary_terms: bool = True) -> FunctionalProfile:
    """
    Evaluate every functional over the a-grid, refine the sups of alpha
    and beta, and compute the power norms.

    Parameters:
    -----------
    pair : SymbolPair
    settings : ProfileSettings
        Rules, grids, level schedules and worker count.
    boundary_terms : bool
        Also compute level-set moments and ||u C_phi g_a||_B, which only
        the essential-norm estimates need.
    """
    settings = settings or ProfileSettings()
    points = [complex(a) for a in settings.a_grid.points(pair.witness)]
    logger.info("profile %s: %d a-points, %d powers", pair.label or "<pair>", len(points), settings.powers)

    samples = tuple(parallel_map(lambda a: _sample(pair, a, settings, boundary_terms), points, settings.workers))

    sups = {}
    for name, fn in (("alpha", alpha), ("beta", beta)):
        sups[name] = sup_over_a(
            _guarded(lambda a, fn=fn: fn(pair, a, settings.rule)),
            settings.a_grid, witness=pair.witness,
            values=[getattr(s, name) for s in samples])
        logger.debug("sup %s = %.10g at %s (converged=%s)", name, sups[name].value,
                     sups[name].argmax, sups[name].converged)

    power_norms = tuple(power_bloch_norms(pair, settings.powers, settings.sup_grid, settings.workers))
    profile = FunctionalProfile(pair, settings, samples, power_norms, sups["alpha"], sups["beta"])

    quantities = QUANTITIES if boundary_terms else ("alpha", "beta")
    return replace(profile, boundary_levels={q: boundary_limsup(profile, q) for q in quantities})


# =============================================================================
# BOUNDARY LEVELS
# =============================================================================

def _finish(quantity: str, rows: List[LevelSup], tol: float) -> BoundaryLimsup:
    live = [row for row in rows if not row.vacuous]
    if not live:
        return BoundaryLimsup(quantity, tuple(rows), 0.0, vacuous=True)
    value = live[-1].value
    if value < tol:
        return BoundaryLimsup(quantity, tuple(rows), 0.0, vacuous=False, below_tol=True)
    return BoundaryLimsup(quantity, tuple(rows), value, vacuous=False)


def level_sups(quantity: str, moduli, values, points, levels: Sequence[float],
               tol: float = 0.0) -> BoundaryLimsup:
    """
    Sup of values over {moduli >= r} for each level r.

    NaN values are treated as not sampled. Empty level sets give 0 with
    the vacuous flag; the approximant is the value at the largest
    non-vacuous level, snapped to 0 below tol.
    """
    moduli = np.asarray(moduli, dtype=float)
    values = np.asarray(values, dtype=float)
    points = np.asarray(points, dtype=complex)
    rows = []
    for r in levels:
        idx = np.flatnonzero((moduli >= r) & ~np.isnan(values))
        if idx.size == 0:
            rows.append(LevelSup(float(r), 0.0, None, True))
            continue
        k = int(idx[np.argmax(values[idx])])
        rows.append(LevelSup(float(r), float(values[k]), complex(points[k]), False))
    return _finish(quantity, rows, tol)


def _nested_moment_levels(profile: FunctionalProfile, r_levels: Sequence[float],
                          t_levels: Sequence[float], tol: float) -> BoundaryLimsup:
    settings_t = list(profile.settings.t_levels)
    missing = [t for t in t_levels if t not in settings_t]
    if missing:
        raise InvalidParameter(f"t levels {missing} were not sampled in this profile")
    moduli, points = profile.moduli, profile.points
    moments = np.array([s.moments for s in profile.a_samples], dtype=float)
    rows = []
    for r in r_levels:
        idx = np.flatnonzero(moduli <= r)
        for t in t_levels:
            if idx.size == 0 or moments.size == 0:
                rows.append(LevelSup(float(r), 0.0, None, True, float(t)))
                continue
            column = moments[idx, settings_t.index(t)]
            k = int(np.argmax(column))
            rows.append(LevelSup(float(r), float(column[k]), complex(points[idx[k]]), False, float(t)))
    return _finish("level_moment", rows, tol)


def boundary_limsup(profile: FunctionalProfile, quantity: str,
                    levels: Optional[Sequence[float]] = None,
                    t_levels: Optional[Sequence[float]] = None) -> BoundaryLimsup:
    """
    Per-level sups of a profile quantity as |phi(a)| approaches 1.

    alpha, beta and g_norm use {|phi(a)| >= r}. level_moment follows the
    nested r/t schedule over {|phi(a)| <= r}, rows in r-major order, so
    the approximant sits at the largest r and largest t.
    """
    settings = profile.settings
    if quantity == "level_moment":
        return _nested_moment_levels(profile,
                                     settings.gamma_r_levels if levels is None else levels,
                                     settings.t_levels if t_levels is None else t_levels,
                                     settings.tol)
    if quantity not in QUANTITIES:
        raise InvalidParameter(f"unknown quantity {quantity!r}, expected one of {QUANTITIES}")
    levels = settings.levels if levels is None else tuple(levels)
    _increasing("levels", levels)
    return level_sups(quantity, profile.moduli, profile.values(quantity), profile.points,
                      levels, settings.tol)


def power_tail(power_norms: Sequence[float], window: int) -> float:
    """Max over the last `window` power norms."""
    if not power_norms:
        return 0.0
    return float(max(power_norms[-window:]))


# =============================================================================
# INEQUALITY AUDIT
# =============================================================================

@dataclass(frozen=True)
class AuditRow:
    check: str
    lhs: float
    rhs: float
    constant: float
    margin: float
    ratio: float
    witness: Optional[complex] = None
    note: str = ""

    def holds(self, tol: float = 1e-6) -> bool:
        return math.isnan(self.margin) or self.margin >= -tol


def audit_row(check: str, lhs: float, rhs: float, constant: float = 1.0,
              witness: Optional[complex] = None, note: str = "") -> AuditRow:
    """lhs <= constant * rhs; margin = constant * rhs - lhs, ratio = lhs / rhs."""
    if lhs == 0.0:
        ratio = 0.0
    elif rhs == 0.0:
        ratio = math.inf
    else:
        ratio = lhs / rhs
    return AuditRow(check, float(lhs), float(rhs), constant, constant * rhs - lhs, ratio, witness, note)


def margin_row(check: str, margin: float, note: str = "") -> AuditRow:
    """Row for checks that only produce a margin."""
    return AuditRow(check, math.nan, math.nan, 1.0, float(margin), math.nan, None, note)


@dataclass(frozen=True)
class AuditTable:
    label: str
    rows: Tuple[AuditRow, ...]

    def holds(self, tol: float = 1e-6) -> bool:
        return all(row.holds(tol) for row in self.rows)

    def row(self, check: str) -> AuditRow:
        for row in self.rows:
            if row.check == check:
                return row
        raise KeyError(check)

    def checks(self) -> List[str]:
        return [row.check for row in self.rows]


@dataclass(frozen=True)
class AuditControls:
    constant: float = ESTIMATOR_CONFIG["audit_constant"]
    tol: float = 1e-6
    radii: Tuple[float, ...] = field(default_factory=lambda: tuple(ESTIMATOR_CONFIG["audit_radii"]))
    angles: int = ESTIMATOR_CONFIG["audit_angles"]

    @property
    def a_grid(self) -> AGrid:
        return AGrid(radii=self.radii, angles=self.angles, boundary_probes=())

    def points(self) -> List[complex]:
        return [complex(a) for a in self.a_grid.points()]


def _worst(rows: List[AuditRow]) -> AuditRow:
    return min(rows, key=lambda row: row.margin)


def _pointwise_rows(pair: SymbolPair, profile: FunctionalProfile, controls: AuditControls) -> List[AuditRow]:
    settings = profile.settings
    rule, grid, C = settings.rule, settings.sup_grid, controls.constant
    u0 = abs(complex(evaluate(pair.u, 0j)))
    estimate = u0 * _log_weight(_phi_at(pair, 0j)) + profile.sup_alpha.value + profile.sup_beta.value
    sup_beta = profile.sup_beta.value

    rows: Dict[str, List[AuditRow]] = {}

    def add(row: AuditRow) -> None:
        rows.setdefault(row.check, []).append(row)

    for a in controls.points():
        c = _phi_at(pair, a)
        L = _log_weight(c)
        al, be = alpha(pair, a, rule), beta(pair, a, rule)
        u_osc = oscillation_values(pair.u, a, rule)
        inner = evaluate(pair.phi, mobius_values(a, rule.points))

        f_a = test_family(pair.phi, a, "f")
        g_a = test_family(pair.phi, a, "g")
        h_a = test_family(pair.phi, a, "h")
        f_prod = ap_values_norm(u_osc * (evaluate(f_a, inner) - evaluate(f_a, c)), 2.0, rule)
        g_prod = ap_values_norm(u_osc * (evaluate(g_a, inner) - evaluate(g_a, c)), 2.0, rule)
        Tf_osc = invariant_ap_norm(pair.operator(f_a), a, 2.0, rule).value
        Tg_osc = invariant_ap_norm(pair.operator(g_a), a, 2.0, rule).value
        f_norm = bloch_norm(f_a, grid, hints=(c,)).value

        add(audit_row("alpha_vs_test_f", al, be / L + Tf_osc, C, a))
        add(audit_row("beta_vs_test_g", be, al + g_prod + Tg_osc, C, a))
        add(audit_row("oscillation_split", Tf_osc, f_prod + (al + be) * f_norm, C, a))
        add(audit_row("product_oscillation", f_prod, f_norm * min(sup_beta, estimate / math.sqrt(L)), C, a))

        f_sup = disk_sup(lambda z, f=f_a: np.abs(evaluate(f, z)), grid).value
        add(audit_row("test_f_bloch", f_norm, 4.0, 1.0, a))
        add(audit_row("test_f_sup", f_sup, 2.0, 1.0, a))
        add(audit_row("test_h_bloch", bloch_norm(h_a, grid, hints=(c,)).value, 2.0 + math.log(2.0), 1.0, a))

    return [_worst(group) for group in rows.values()]


def _power_rows(pair: SymbolPair, profile: FunctionalProfile, controls: AuditControls) -> List[AuditRow]:
    settings = profile.settings
    grid, C = settings.sup_grid, controls.constant
    power_sup = max(profile.power_norms)
    tail = power_tail(profile.power_norms, settings.tail_window)

    def operator_f_norm(a: complex) -> float:
        return bloch_norm(pair.operator(test_family(pair.phi, a, "f")), grid, hints=(a,)).value

    test_norms = [(operator_f_norm(a), a) for a in controls.points()]
    test_sup, test_at = max(test_norms, key=lambda item: item[0])
    rows = [
        audit_row("test_f_vs_power", test_sup, power_sup, C, test_at),
        audit_row("power_vs_test_f", power_sup, test_sup, C, test_at),
    ]

    top = [row for row in profile.boundary_levels["alpha"].levels if not row.vacuous]
    if top:
        r = top[-1].level
        near = [s.a for s in profile.a_samples if s.phi_modulus >= r]
        boundary = [(operator_f_norm(a), a) for a in near]
        value, at = max(boundary, key=lambda item: item[0])
        rows.append(audit_row("test_f_vs_power_tail", value, tail, C, at, note=f"|phi(a)| >= {r}"))
    else:
        rows.append(audit_row("test_f_vs_power_tail", 0.0, tail, C, note="vacuous"))

    gamma = profile.boundary_levels.get("level_moment")
    if gamma is not None:
        rows.append(audit_row("level_moment_vs_power_tail", gamma.approximant, tail, C,
                              note="vacuous" if gamma.vacuous else ""))
    return rows


def _single_function_rows(pair: SymbolPair, settings: ProfileSettings, controls: AuditControls) -> List[AuditRow]:
    rule, grid, C = settings.rule, settings.sup_grid, controls.constant
    rows = []
    for name, f in (("u", pair.u), ("phi", pair.phi)):
        norm = bloch_norm(f, grid)
        growth = growth_bound_check(f, grid.points, norm=norm.value)
        rows.append(audit_row(f"growth[{name}]", growth.max_ratio, 1.0 / math.log(2.0), 1.0, growth.argmax))

        pair_osc = oscillation_pair(f, controls.a_grid, rule)
        rows.append(audit_row(f"holder[{name}]", pair_osc.sup_a2, pair_osc.sup_a4, 1.0, pair_osc.witness))

        rows.append(audit_row(f"littlewood_paley[{name}]", littlewood_paley_ratio(f, rule), 1.0, C))

        semi = bloch_seminorm(f, grid).value
        garsia = max(invariant_ap_norm(f, a, 2.0, rule).value for a in controls.points())
        rows.append(audit_row(f"garsia[{name}]", garsia, semi, C))
    return rows


def _counting_rows(pair: SymbolPair, settings: ProfileSettings, controls: AuditControls) -> List[AuditRow]:
    try:
        phi = polynomial_map_from_expr(pair.phi, validate=False)
    except UnsupportedSymbol:
        return []
    rule, C = settings.rule, controls.constant
    rows = []
    if phi.at_zero != 0:
        try:
            n0 = counting_function(phi, 0j, 1.0)
            for fraction in (0.25, 0.5):
                r = fraction * abs(phi.at_zero)
                margin = littlewood_check(phi, 1.0, r, rule)
                rows.append(audit_row(f"littlewood[r={fraction}|phi(0)|]", n0, n0 + margin, 1.0))
        except AtCriticalValue as e:
            logger.info("littlewood rows skipped for %s: %s", pair.label, e)
    else:
        rows.append(margin_row("sublog", sublog_bound_check(phi)))
    cov = change_of_variable_ratio(Z, phi, rule)
    rows.append(audit_row("change_of_variable[z]", cov.lhs, cov.rhs, C))
    return rows


def inequality_audit(pair: SymbolPair, controls: Optional[AuditControls] = None,
                     profile: Optional[FunctionalProfile] = None,
                     settings: Optional[ProfileSettings] = None) -> AuditTable:
    """
    Both sides of every pointwise, power and single-function inequality
    for one pair, worst case over the audit a-grid.

    Each row reads lhs <= constant * rhs. Rows with constant 1 are
    sharp bounds; the others carry the configured audit constant and
    their ratio is the measured constant.
    """
    controls = controls or AuditControls()
    profile = profile or build_profile(pair, settings)
    settings = profile.settings
    rows = []
    rows.extend(_pointwise_rows(pair, profile, controls))
    rows.extend(_power_rows(pair, profile, controls))
    rows.extend(_single_function_rows(pair, settings, controls))
    rows.extend(_counting_rows(pair, settings, controls))
    failed = [row.check for row in rows if not row.holds(controls.tol)]
    if failed:
        logger.warning("audit %s: %d row(s) fail: %s", pair.label, len(failed), ", ".join(failed))
    return AuditTable(pair.label, tuple(rows))


# =============================================================================
# COMPOSITION PRODUCT AUDIT (pairs g, psi with g(0) = psi(0) = 0)
# =============================================================================

def default_composition_library() -> List[Tuple[str, AnalyticExpr, AnalyticExpr]]:
    outer = {
        "0": Const(0),
        "z": Z,
        "z^2": Z ** 2,
        "z^3": Z ** 3,
        "z(1+z)/2": Z * (1 + Z) / 2,
        "exp(z)-1": Exp(Z) - 1,
    }
    inner = {
        "z": Z,
        "z^2": Z ** 2,
        "z/2": Z / 2,
        "z^2/2": Z ** 2 / 2,
        "z(1+z)/2": Z * (1 + Z) / 2,
        "z*sigma_0.5": Z * Mobius(0.5),
    }
    return [(f"{gn} o {pn}", g, p) for gn, g in outer.items() for pn, p in inner.items()]


def composition_audit(library: Optional[List[Tuple[str, AnalyticExpr, AnalyticExpr]]] = None,
                      rule: Optional[DiskRule] = None,
                      constant: float = ESTIMATOR_CONFIG["audit_constant"]) -> AuditTable:
    """
    ||g o psi||_{A^2} <= constant * ||psi||_{A^2} ||g||_{A^2} over a library,
    plus the two sub-bounds for every polynomial psi.
    """
    rule = rule or build_rule()
    library = default_composition_library() if library is None else library
    rows = []
    bounds_done = set()
    for name, g, psi in library:
        if abs(complex(evaluate(g, 0j))) > 1e-14 or abs(complex(evaluate(psi, 0j))) > 1e-14:
            raise InvalidParameter(f"composition audit needs g(0) = psi(0) = 0 ({name})")
        lhs = ap_values_norm(evaluate(g, evaluate(psi, rule.points)), 2.0, rule)
        rhs = (ap_values_norm(evaluate(psi, rule.points), 2.0, rule)
               * ap_values_norm(evaluate(g, rule.points), 2.0, rule))
        rows.append(audit_row(f"composition[{name}]", lhs, rhs, constant))

        if psi in bounds_done:
            continue
        bounds_done.add(psi)
        try:
            poly = polynomial_map_from_expr(psi, validate=False)
        except UnsupportedSymbol:
            continue
        sub = composition_product_bounds(poly, rule)
        psi_name = name.split(" o ", 1)[1]
        rows.append(margin_row(f"composition_mobius[{psi_name}]", sub.mobius_margin))
        rows.append(margin_row(f"composition_counting[{psi_name}]", sub.counting_margin))
    return AuditTable("composition", tuple(rows))
