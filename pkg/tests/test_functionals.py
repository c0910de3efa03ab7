"""Pointwise functionals, profiles, boundary levels and audits."""

import math

import numpy as np
import pytest

from bloch_wco import functionals
from bloch_wco.analytic_core import Const, Z, derivative, evaluate
from bloch_wco.errors import InvalidParameter
from bloch_wco.functionals import (
    AuditControls,
    ProfileSettings,
    alpha,
    audit_row,
    beta,
    boundary_limsup,
    build_profile,
    composition_audit,
    inequality_audit,
    level_set_moment,
    level_set_moments,
    level_sups,
    make_pair,
    margin_row,
    power_bloch_norms,
    power_tail,
)
from bloch_wco.harness.corpus import load_corpus
from bloch_wco.norms import bloch_norm
from bloch_wco.quadrature import SupGrid, build_rule, disk_sup

LOG2 = math.log(2.0)


def _shifted_mobius_a2(a: float) -> float:
    t = a * a
    return (1 - t) * math.sqrt((-math.log(1 - t) - t) / t ** 2)


@pytest.fixture(scope="module")
def z_weight_pair():
    return make_pair(Z, Z, "z_weight")


def test_beta_closed_forms(z_weight_pair):
    assert beta(z_weight_pair, 0j) == pytest.approx(LOG2 / math.sqrt(2), rel=1e-9)
    expected = math.log(2 / 0.75) * _shifted_mobius_a2(0.5)
    assert beta(z_weight_pair, 0.5) == pytest.approx(expected, rel=1e-9)
    assert beta(z_weight_pair, 0.5) == pytest.approx(0.5712, abs=1e-4)


def test_beta_vanishes_for_constant_weight(identity_pair):
    assert beta(identity_pair, 0.7j) == 0.0


def test_alpha_for_identity_map(identity_pair, z_weight_pair):
    assert alpha(identity_pair, 0.3 + 0.4j) == pytest.approx(1 / math.sqrt(2), rel=1e-9)
    assert alpha(z_weight_pair, 0j) == 0.0
    with pytest.raises(InvalidParameter):
        alpha(identity_pair, 1.0)


def test_test_family_shapes():
    f = functionals.test_family(Z, 0.5, "f")
    assert evaluate(f, 0j) == pytest.approx(0.0)

    h = functionals.test_family(Z, 0.5, "h")
    assert evaluate(derivative(h), 0j) == pytest.approx(0.5)

    g = functionals.test_family(Z, 0.5, "g")
    assert evaluate(g, 0.5) == pytest.approx(math.log(2 / 0.75))

    with pytest.raises(InvalidParameter):
        functionals.test_family(Z, 0.5, "q")


def test_power_norms_of_identity(identity_pair, small_grid):
    norms = power_bloch_norms(identity_pair, 3, small_grid)
    expected = [1.0, 1.0, 4 / (3 * math.sqrt(3)), 3 * 0.5 * 0.5]
    assert norms == pytest.approx(expected, rel=1e-6)
    with pytest.raises(InvalidParameter):
        power_bloch_norms(identity_pair, 600)


def test_level_set_moment_of_identity(identity_pair):
    rule = build_rule(1024, 64)
    t = 0.99
    assert level_set_moment(identity_pair, 0j, t, rule) == pytest.approx((1 - t * t) ** 0.25, abs=5e-3)


def test_level_set_moment_with_default_rule(identity_pair):
    t = 0.99
    assert level_set_moment(identity_pair, 0j, t) == pytest.approx((1 - t * t) ** 0.25, abs=2e-3)


def test_level_set_moment_edge_cases(identity_pair):
    rule = build_rule(32, 64)
    zero_weight = make_pair(Const(0), Z)
    assert level_set_moments(zero_weight, 0.2, [0.5, 0.9], rule) == [0.0, 0.0]
    with pytest.raises(InvalidParameter):
        level_set_moments(identity_pair, 0.0, [1.0], rule)


def test_level_sups_and_vacuous_levels():
    limsup = level_sups("alpha", [0.5, 0.95, 0.995, 0.97], [1.0, 2.0, 3.0, np.nan],
                        [0.1, 0.2, 0.3, 0.4], (0.9, 0.99, 0.999))
    assert [row.value for row in limsup.levels] == [3.0, 3.0, 0.0]
    assert [row.vacuous for row in limsup.levels] == [False, False, True]
    assert limsup.approximant == 3.0
    assert not limsup.vacuous

    empty = level_sups("beta", [0.1], [5.0], [0.1], (0.9,))
    assert empty.vacuous and empty.approximant == 0.0

    tiny = level_sups("beta", [0.95], [1e-12], [0.1], (0.9,), tol=1e-8)
    assert tiny.below_tol and tiny.approximant == 0.0


def test_power_tail():
    assert power_tail([1.0, 2.0, 3.0, 4.0], 2) == 4.0
    assert power_tail([4.0, 3.0, 2.0, 1.0], 2) == 2.0
    assert power_tail([], 3) == 0.0


def test_settings_validation(small_rule):
    with pytest.raises(InvalidParameter):
        ProfileSettings(rule=small_rule, powers=10, tail_window=20)
    with pytest.raises(InvalidParameter):
        ProfileSettings(rule=small_rule, levels=(0.99, 0.9))
    with pytest.raises(InvalidParameter):
        ProfileSettings(rule=small_rule, workers=0)


def test_profile_of_strict_map(half_disk_pair, small_settings):
    profile = build_profile(half_disk_pair, small_settings)
    assert half_disk_pair.witness is None
    assert len(profile.power_norms) == small_settings.powers + 1
    for quantity in ("alpha", "beta", "g_norm"):
        assert profile.boundary_levels[quantity].vacuous
        assert profile.boundary_levels[quantity].approximant == 0.0
    moments = profile.boundary_levels["level_moment"]
    assert moments.approximant == 0.0
    assert np.all(np.isnan(profile.values("g_norm")))
    with pytest.raises(InvalidParameter):
        profile.values("level_moment")


def test_profile_of_identity(identity_pair, small_settings):
    profile = build_profile(identity_pair, small_settings)
    assert profile.sup_alpha.value == pytest.approx(1 / math.sqrt(2), rel=1e-6)
    assert profile.sup_beta.value == 0.0
    levels = profile.boundary_levels
    assert not levels["alpha"].vacuous
    assert levels["alpha"].approximant == pytest.approx(1 / math.sqrt(2), rel=1e-6)
    assert levels["g_norm"].approximant > 0.0
    assert [row.t_level for row in levels["level_moment"].levels] == [0.9, 0.99, 0.9, 0.99]

    alpha_only = boundary_limsup(profile, "alpha", levels=(0.9,))
    assert len(alpha_only.levels) == 1
    with pytest.raises(InvalidParameter):
        boundary_limsup(profile, "level_moment", t_levels=(0.5,))


def test_profile_without_boundary_terms(identity_pair, small_settings):
    profile = build_profile(identity_pair, small_settings, boundary_terms=False)
    assert set(profile.boundary_levels) == {"alpha", "beta"}
    assert all(sample.moments == () for sample in profile.a_samples)


def test_audit_rows():
    row = audit_row("x", 1.0, 2.0)
    assert row.margin == 1.0 and row.ratio == 0.5 and row.holds()
    assert audit_row("x", 0.0, 0.0).ratio == 0.0
    assert audit_row("x", 1.0, 0.0).ratio == math.inf
    assert not audit_row("x", 3.0, 1.0, constant=2.0).holds()
    assert margin_row("m", -1e-9).holds(tol=1e-6)
    assert not margin_row("m", -1.0).holds()


def test_inequality_audit_for_identity(identity_pair, small_settings, small_controls):
    profile = build_profile(identity_pair, small_settings)
    table = inequality_audit(identity_pair, small_controls, profile)
    checks = table.checks()
    for name in ("alpha_vs_test_f", "beta_vs_test_g", "oscillation_split", "product_oscillation",
                 "test_f_bloch", "test_f_sup", "test_h_bloch", "test_f_vs_power", "power_vs_test_f",
                 "test_f_vs_power_tail", "level_moment_vs_power_tail", "growth[u]", "holder[phi]",
                 "littlewood_paley[phi]", "garsia[phi]", "sublog", "change_of_variable[z]"):
        assert name in checks
    assert table.holds()
    assert table.row("littlewood_paley[phi]").lhs == pytest.approx(1.5, rel=1e-9)
    assert table.row("change_of_variable[z]").ratio == pytest.approx(1.0, rel=1e-3)
    with pytest.raises(KeyError):
        table.row("missing")


def test_composition_audit_anchor(small_rule):
    table = composition_audit([("z^2 o z^2/2", Z ** 2, Z ** 2 / 2)], small_rule)
    row = table.row("composition[z^2 o z^2/2]")
    assert row.lhs == pytest.approx(0.25 / math.sqrt(5), rel=1e-9)
    assert row.rhs == pytest.approx(1 / 6, rel=1e-9)
    assert table.checks() == ["composition[z^2 o z^2/2]", "composition_mobius[z^2/2]",
                              "composition_counting[z^2/2]"]
    assert table.holds()


def test_composition_audit_default_library(small_rule):
    table = composition_audit(rule=small_rule)
    assert table.holds()
    assert "composition_mobius[z*sigma_0.5]" not in table.checks()
    with pytest.raises(InvalidParameter):
        composition_audit([("bad", Z + 1, Z)], small_rule)


def test_audit_controls_grid():
    controls = AuditControls(radii=(0.0, 0.5), angles=4)
    assert len(controls.points()) == 5
    assert controls.a_grid.boundary_probes == ()


@pytest.mark.slow
def test_test_functions_stay_in_the_bloch_ball(corpus_dir, small_grid):
    a_points = SupGrid(radial_count=4, angular_count=8, boundary_levels=1).points
    for entry in load_corpus(corpus_dir):
        for a in a_points:
            f = functionals.test_family(entry.pair.phi, a, "f")
            h = functionals.test_family(entry.pair.phi, a, "h")
            assert bloch_norm(f, small_grid).value <= 4.0 + 1e-6, (entry.label, a)
            assert disk_sup(lambda z: np.abs(evaluate(f, z)), small_grid).value <= 2.0 + 1e-9
            assert bloch_norm(h, small_grid).value <= 2.0 + LOG2 + 1e-6, (entry.label, a)
