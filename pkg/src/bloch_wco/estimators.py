"""
Norm and essential-norm estimates for u C_phi on the Bloch space and
the bounded/compact verdicts built from them.

Two norm estimates are available:

    alpha_beta : |u(0)| log(2/(1-|phi(0)|^2)) + sup_a alpha + sup_a beta
    power_beta : |u(0)| log(2/(1-|phi(0)|^2)) + sup_n ||u phi^n||_B + sup_a beta

Each is equivalent to ||u C_phi|| up to absolute constants. The
essential norm is reported in four equivalent forms built from the
boundary approximants of a FunctionalProfile.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import ESTIMATOR_CONFIG, RUN_CONFIG

from bloch_wco.analytic_core import (
    AnalyticExpr,
    Compose,
    Const,
    Mul,
    PowInt,
    Sub,
    Var,
    Z,
    derivative,
    evaluate,
    polynomial,
)
from bloch_wco.errors import BlochToolkitError, InvalidParameter, NotBounded
from bloch_wco.functionals import (
    TEST_KINDS,
    AuditControls,
    BoundaryLimsup,
    FunctionalProfile,
    ProfileSettings,
    SymbolPair,
    build_profile,
    level_sups,
    make_pair,
    power_bloch_norms,
    power_tail,
    test_family,
)
from bloch_wco.norms import bloch_norm
from bloch_wco.utils import parallel_map

logger = logging.getLogger(__name__)

METHODS = ("alpha_beta", "power_beta")


class Trilean(str, enum.Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Thresholds:
    divergence: float = ESTIMATOR_CONFIG["divergence_threshold"]
    eps_compact: float = ESTIMATOR_CONFIG["eps_compact"]
    growth_ratio: float = ESTIMATOR_CONFIG["growth_ratio"]
    inconclusive_factor: float = ESTIMATOR_CONFIG["inconclusive_factor"]


# =============================================================================
# NORM ESTIMATES
# =============================================================================

@dataclass(frozen=True)
class EstimateReport:
    method: str
    value: float
    parts: Dict[str, float]
    metadata: dict = field(default_factory=dict)
    diverged: bool = False


def _estimate(method: str, parts: Dict[str, float], metadata: dict,
              threshold: float = ESTIMATOR_CONFIG["divergence_threshold"]) -> EstimateReport:
    diverged = any(not math.isfinite(v) or v > threshold for v in parts.values())
    value = math.fsum(parts.values()) if all(map(math.isfinite, parts.values())) else math.inf
    if diverged:
        logger.warning("%s estimate diverged: %s", method, parts)
    return EstimateReport(method, value, dict(parts), metadata, diverged)


def _u0_term(pair: SymbolPair) -> float:
    u0 = abs(complex(evaluate(pair.u, 0j)))
    if u0 == 0.0:
        return 0.0
    c0 = abs(complex(evaluate(pair.phi, 0j)))
    return u0 * math.log(2.0 / (1.0 - c0 ** 2))


def norm_estimate(pair: SymbolPair, method: str = "alpha_beta",
                  profile: Optional[FunctionalProfile] = None,
                  settings: Optional[ProfileSettings] = None) -> EstimateReport:
    """
    Two-sided estimate of ||u C_phi||_{B -> B}.

    Parameters:
    -----------
    pair : SymbolPair
    method : str
        "alpha_beta" or "power_beta".
    profile : FunctionalProfile
        Reused when given; otherwise built without boundary terms.

    Returns:
    --------
    EstimateReport
        value is the correctly rounded sum of parts; diverged when a part
        exceeds the divergence threshold.
    """
    if method not in METHODS:
        raise InvalidParameter(f"unknown method {method!r}, expected one of {METHODS}")
    profile = profile or build_profile(pair, settings, boundary_terms=False)
    parts = {"u0_term": _u0_term(pair)}
    if method == "alpha_beta":
        parts["sup_alpha"] = profile.sup_alpha.value
    else:
        parts["power_sup"] = float(max(profile.power_norms))
    parts["sup_beta"] = profile.sup_beta.value

    metadata = {
        **profile.settings.describe(),
        "sup_alpha_at": profile.sup_alpha.argmax,
        "sup_beta_at": profile.sup_beta.argmax,
        "converged": profile.sup_alpha.converged and profile.sup_beta.converged,
    }
    return _estimate(method, parts, metadata)


def multiplication_estimate(u: AnalyticExpr, settings: Optional[ProfileSettings] = None,
                            label: str = "") -> EstimateReport:
    """||M_u|| ~ |u(0)| log 2 + sup_a log(2/(1-|a|^2)) ||u o sigma_a - u(a)||_{A^2}"""
    pair = make_pair(u, Z, label)
    settings = replace(settings or ProfileSettings(), powers=0, tail_window=1)
    profile = build_profile(pair, settings, boundary_terms=False)
    parts = {
        "u0_term": abs(complex(evaluate(u, 0j))) * math.log(2.0),
        "sup_beta": profile.sup_beta.value,
    }
    return _estimate("multiplication", parts, {**settings.describe(), "sup_beta_at": profile.sup_beta.argmax})


# =============================================================================
# CLASSIFICATION
# =============================================================================

@dataclass(frozen=True)
class Verdict:
    bounded: Trilean
    compact: Trilean
    evidence: Dict[str, Tuple[float, float]]   # name -> (value, threshold)


def power_growth(power_norms: Sequence[float], window: int) -> float:
    """
    Ratio of the tail max to the max over n in [N/10, N/5].

    Near 1 for bounded pairs; sequences that grow without bound push
    it up.
    """
    N = len(power_norms) - 1
    if N < 1:
        return 1.0
    head = max(power_norms[N // 10: N // 5 + 1])
    tail = power_tail(power_norms, window)
    if head == 0.0:
        return 0.0 if tail == 0.0 else math.inf
    return tail / head


def level_growth(limsup: BoundaryLimsup) -> float:
    """Last over first non-vacuous level sup; 1 when undetermined."""
    live = [row for row in limsup.levels if not row.vacuous]
    if len(live) < 2 or live[0].value == 0.0:
        return 1.0
    return live[-1].value / live[0].value


def _bounded(profile: FunctionalProfile, estimate: EstimateReport,
             thresholds: Thresholds) -> Tuple[Trilean, Dict[str, Tuple[float, float]]]:
    evidence = {f"part.{k}": (v, thresholds.divergence) for k, v in estimate.parts.items()}
    growth = power_growth(profile.power_norms, profile.settings.tail_window)
    beta_trend = level_growth(profile.boundary_levels["beta"])
    evidence["power_growth"] = (growth, thresholds.growth_ratio)
    evidence["beta_level_growth"] = (beta_trend, thresholds.growth_ratio)

    soft = 1.0 + (thresholds.growth_ratio - 1.0) / thresholds.inconclusive_factor
    if estimate.diverged or growth > thresholds.growth_ratio or beta_trend > thresholds.growth_ratio:
        return Trilean.NO, evidence
    near_divergence = any(v > thresholds.divergence / thresholds.inconclusive_factor
                          for v in estimate.parts.values())
    if near_divergence or growth > soft or beta_trend > soft:
        return Trilean.INCONCLUSIVE, evidence
    return Trilean.YES, evidence


def _snap(value: float, tol: float) -> float:
    return 0.0 if value < tol else value


def classify(pair: SymbolPair, thresholds: Optional[Thresholds] = None,
             profile: Optional[FunctionalProfile] = None,
             settings: Optional[ProfileSettings] = None) -> Verdict:
    """
    Bounded when the power_beta parts stay finite and neither the power
    norms nor the boundary beta sups trend upward. Compact when bounded
    and both the power-norm tail and the beta approximant sit below
    eps_compact; values within the inconclusive factor of eps_compact
    give INCONCLUSIVE.
    """
    thresholds = thresholds or Thresholds()
    profile = profile or build_profile(pair, settings)
    estimate = norm_estimate(pair, "power_beta", profile)
    bounded, evidence = _bounded(profile, estimate, thresholds)

    tol = profile.settings.tol
    eps, factor = thresholds.eps_compact, thresholds.inconclusive_factor
    criteria = {
        "power_tail": _snap(power_tail(profile.power_norms, profile.settings.tail_window), tol),
        "beta_tilde": profile.boundary_levels["beta"].approximant,
    }
    for name, value in criteria.items():
        evidence[name] = (value, eps)
    for name in ("alpha", "g_norm", "level_moment"):
        if name in profile.boundary_levels:
            evidence[f"{name}_tilde"] = (profile.boundary_levels[name].approximant, eps)

    if bounded is not Trilean.YES:
        compact = Trilean.NO if bounded is Trilean.NO else Trilean.INCONCLUSIVE
    elif all(v < eps / factor for v in criteria.values()):
        compact = Trilean.YES
    elif any(v > eps * factor for v in criteria.values()):
        compact = Trilean.NO
    else:
        compact = Trilean.INCONCLUSIVE
    return Verdict(bounded, compact, evidence)


# =============================================================================
# ESSENTIAL NORM
# =============================================================================

@dataclass(frozen=True)
class EssNormReport:
    v1: float       # power tail + g limsup
    v2: float       # alpha + beta + gamma approximants
    v3: float       # alpha + g limsup + gamma
    v4: float       # power tail + beta
    ratio: float
    components: Dict[str, float]
    vacuous: Dict[str, bool]
    below_tol: Dict[str, bool]
    metadata: dict = field(default_factory=dict)

    @property
    def variants(self) -> Dict[str, float]:
        return {"v1": self.v1, "v2": self.v2, "v3": self.v3, "v4": self.v4}


def variant_ratio(values: Sequence[float]) -> float:
    """max/min of the variants; 1 when all vanish, inf when only some do."""
    positive = [v for v in values if v > 0.0]
    if not positive:
        return 1.0
    if len(positive) < len(values):
        return math.inf
    return max(positive) / min(positive)


def essnorm_estimate(pair: SymbolPair, profile: Optional[FunctionalProfile] = None,
                     settings: Optional[ProfileSettings] = None,
                     thresholds: Optional[Thresholds] = None) -> EssNormReport:
    """
    Raises:
    -------
    NotBounded
        the power_beta estimate diverged or the bounded verdict is NO.
    """
    thresholds = thresholds or Thresholds()
    profile = profile or build_profile(pair, settings)
    if "level_moment" not in profile.boundary_levels:
        raise InvalidParameter("essential norm needs a profile built with boundary terms")
    estimate = norm_estimate(pair, "power_beta", profile)
    bounded, _ = _bounded(profile, estimate, thresholds)
    if estimate.diverged or bounded is Trilean.NO:
        raise NotBounded(f"{pair.label or 'pair'}: operator is not bounded on the sampled data")

    tol = profile.settings.tol
    raw_tail = power_tail(profile.power_norms, profile.settings.tail_window)
    levels = profile.boundary_levels
    c = {
        "power_tail": _snap(raw_tail, tol),
        "g_limsup": levels["g_norm"].approximant,
        "alpha_tilde": levels["alpha"].approximant,
        "beta_tilde": levels["beta"].approximant,
        "gamma_tilde": levels["level_moment"].approximant,
    }
    variants = (
        math.fsum([c["power_tail"], c["g_limsup"]]),
        math.fsum([c["alpha_tilde"], c["beta_tilde"], c["gamma_tilde"]]),
        math.fsum([c["alpha_tilde"], c["g_limsup"], c["gamma_tilde"]]),
        math.fsum([c["power_tail"], c["beta_tilde"]]),
    )
    vacuous = {name: levels[q].vacuous for name, q in
               (("g_limsup", "g_norm"), ("alpha_tilde", "alpha"), ("beta_tilde", "beta"),
                ("gamma_tilde", "level_moment"))}
    below_tol = {name: levels[q].below_tol for name, q in
                 (("g_limsup", "g_norm"), ("alpha_tilde", "alpha"), ("beta_tilde", "beta"),
                  ("gamma_tilde", "level_moment"))}
    below_tol["power_tail"] = raw_tail < tol
    vacuous["power_tail"] = False

    return EssNormReport(*variants, ratio=variant_ratio(variants), components=c,
                         vacuous=vacuous, below_tol=below_tol,
                         metadata=profile.settings.describe())


@dataclass(frozen=True)
class ZhaoQuantities:
    composition_essnorm: float          # (e/2) limsup ||phi^n||_B
    phi_power_tail: float
    derivative_ratio: BoundaryLimsup    # |u phi'| (1-|z|^2) / (1-|phi|^2)
    log_derivative: BoundaryLimsup      # log(e/(1-|phi|^2)) |u'| (1-|z|^2)


def _z_points(pair: SymbolPair, profile: FunctionalProfile) -> np.ndarray:
    points = profile.settings.sup_grid.points
    if pair.witness is None:
        return points
    direction = pair.witness / abs(pair.witness)
    ray = direction * (1.0 - 10.0 ** -np.arange(1, 7, dtype=float))
    return np.concatenate([points, ray])


def zhao_quantities(pair: SymbolPair, profile: Optional[FunctionalProfile] = None,
                    settings: Optional[ProfileSettings] = None) -> ZhaoQuantities:
    """
    The composition-operator essential norm (e/2) limsup ||phi^n||_B and
    the two pointwise boundary quantities, on the profile's level
    schedule.
    """
    profile = profile or build_profile(pair, settings, boundary_terms=False)
    s = profile.settings
    if isinstance(pair.u, Const) and pair.u.value == 1:
        phi_norms = list(profile.power_norms)
    else:
        phi_norms = power_bloch_norms(SymbolPair(Const(1), pair.phi, pair.report, pair.label),
                                      s.powers, s.sup_grid, s.workers)
    tail = _snap(power_tail(phi_norms, s.tail_window), s.tol)

    z = _z_points(pair, profile)
    phi_z = evaluate(pair.phi, z)
    moduli = np.abs(phi_z)
    defect = 1.0 - moduli ** 2
    weight = 1.0 - np.abs(z) ** 2
    u_z = np.broadcast_to(evaluate(pair.u, z), z.shape)
    dphi = np.broadcast_to(evaluate(derivative(pair.phi), z), z.shape)
    du = np.broadcast_to(evaluate(derivative(pair.u), z), z.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(u_z * dphi) * weight / defect
        log_term = np.log(math.e / defect) * np.abs(du) * weight

    return ZhaoQuantities(
        composition_essnorm=0.5 * math.e * tail,
        phi_power_tail=tail,
        derivative_ratio=level_sups("derivative_ratio", moduli, ratio, z, s.levels, s.tol),
        log_derivative=level_sups("log_derivative", moduli, log_term, z, s.levels, s.tol),
    )


# =============================================================================
# LOWER BOUND AND COMPACT APPROXIMATION
# =============================================================================

@dataclass(frozen=True)
class LowerBound:
    value: float
    witness: str
    candidates: int
    seed: int
    skipped: int = 0


def _monomials() -> List[Tuple[str, AnalyticExpr]]:
    return [("1", Const(1)), ("z", Var())] + [(f"z^{k}", PowInt(Var(), k)) for k in range(2, 9)]


def _test_candidates(pair: SymbolPair, controls: AuditControls, kinds=TEST_KINDS) -> List[Tuple[str, AnalyticExpr]]:
    out = []
    for a in controls.points():
        for kind in kinds:
            out.append((f"{kind}_a[{a.real:.3g}{a.imag:+.3g}j]", test_family(pair.phi, a, kind)))
    return out


def random_polynomials(count: int, seed: int,
                       degree: int = ESTIMATOR_CONFIG["lower_bound_degree"]) -> List[Tuple[str, AnalyticExpr]]:
    """Seeded complex Gaussian polynomials with coefficients damped by 1/(k+1)."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(count):
        d = int(rng.integers(1, degree + 1))
        coeffs = (rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)) / np.arange(1, d + 2)
        out.append((f"random[{j}]", polynomial(coeffs)))
    return out


def _operator_ratio(pair: SymbolPair, f: AnalyticExpr, settings: ProfileSettings,
                    numerator: Optional[AnalyticExpr] = None) -> Optional[float]:
    """None when the candidate cannot be evaluated."""
    grid = settings.sup_grid
    hints = () if pair.witness is None else (pair.witness,)
    try:
        denom = bloch_norm(f, grid).value
        if denom == 0.0 or not math.isfinite(denom):
            return 0.0
        return bloch_norm(pair.operator(numerator or f), grid, hints).value / denom
    except BlochToolkitError as e:
        logger.warning("candidate skipped: %s", e)
        return None


def opnorm_lower_bound(pair: SymbolPair, samples: int = ESTIMATOR_CONFIG["lower_bound_samples"],
                       seed: int = RUN_CONFIG["seed"],
                       settings: Optional[ProfileSettings] = None,
                       controls: Optional[AuditControls] = None) -> LowerBound:
    """max of ||u C_phi f||_B / ||f||_B over monomials, test functions and random polynomials."""
    if samples < 1:
        raise InvalidParameter(f"samples must be >= 1, got {samples}")
    settings = settings or ProfileSettings()
    controls = controls or AuditControls()
    candidates = _monomials() + _test_candidates(pair, controls) + random_polynomials(samples, seed)
    ratios = parallel_map(lambda item: _operator_ratio(pair, item[1], settings), candidates, settings.workers)
    skipped = sum(r is None for r in ratios)
    if skipped == len(ratios):
        return LowerBound(0.0, "", len(candidates), seed, skipped)
    k = max((i for i, r in enumerate(ratios) if r is not None), key=lambda i: ratios[i])
    return LowerBound(float(ratios[k]), candidates[k][0], len(candidates), seed, skipped)


def compact_approximation_gap(pair: SymbolPair, n_values: Sequence[int] = (4, 16, 64),
                              settings: Optional[ProfileSettings] = None,
                              controls: Optional[AuditControls] = None) -> Dict[int, float]:
    """
    For the dilations K_n f(z) = f(n z / (n + 1)), the sampled
    max of ||u C_phi (f - K_n f)||_B / ||f||_B. Each K_n is compact, so
    these bound the essential norm from above along the candidates.
    """
    settings = settings or ProfileSettings()
    controls = controls or AuditControls()
    candidates = _monomials()[1:] + _test_candidates(pair, controls, kinds=("f", "h"))
    gaps = {}
    for n in n_values:
        if n < 1:
            raise InvalidParameter(f"dilation index must be >= 1, got {n}")
        dilation = Mul(Const(n / (n + 1.0)), Var())
        ratios = parallel_map(
            lambda item: _operator_ratio(pair, item[1], settings,
                                         numerator=Sub(item[1], Compose(item[1], dilation))),
            candidates, settings.workers)
        gaps[int(n)] = float(max((r for r in ratios if r is not None), default=0.0))
    return gaps
