"""Disk quadrature rule and supremum search."""

import math

import numpy as np
import pytest

from bloch_wco.errors import InvalidParameter, NonFiniteIntegrand
from bloch_wco.quadrature import LARGE_VALUE, SupGrid, build_rule, disk_integrate, disk_sup


def test_rule_is_a_probability_measure():
    rule = build_rule()
    assert math.fsum(rule.radial_weights) == pytest.approx(1.0, abs=1e-15)
    assert disk_integrate(lambda z: np.ones(z.shape), rule) == pytest.approx(1.0, abs=1e-14)
    assert rule.points.shape == (64, 256)
    assert rule.size == 64 * 256


@pytest.mark.parametrize("k", [1, 2, 5])
def test_radial_moments_are_exact(k):
    rule = build_rule()
    assert disk_integrate(lambda z: np.abs(z) ** (2 * k), rule) == pytest.approx(1.0 / (k + 1), rel=1e-12)


def test_angular_moments_vanish():
    rule = build_rule(32, 64)
    for k in (1, 3, 17):
        assert abs(disk_integrate(lambda z: (z ** k).real, rule)) < 1e-14


def test_fractional_grading_keeps_unit_mass():
    rule = build_rule(32, 64, q=1.5)
    assert disk_integrate(np.ones((32, 64)), rule) == pytest.approx(1.0, abs=1e-14)


def test_rule_limits():
    with pytest.raises(InvalidParameter):
        build_rule(8)
    with pytest.raises(InvalidParameter):
        build_rule(32, 32)
    with pytest.raises(InvalidParameter):
        build_rule(32, 64, q=0.5)


def test_non_finite_integrand_reports_first_node():
    rule = build_rule(16, 64)
    values = np.ones(rule.points.shape)
    values[0, 3] = np.nan
    values[2, 0] = np.inf
    with pytest.raises(NonFiniteIntegrand) as info:
        disk_integrate(values, rule)
    assert info.value.index == 3
    assert info.value.point == pytest.approx(rule.points[0, 3])


def test_sup_grid_contains_origin_and_boundary_levels():
    grid = SupGrid(radial_count=16, angular_count=32, boundary_levels=4)
    assert grid.points[0] == 0j
    outer = np.max(np.abs(grid.points))
    assert 0.9999 < outer <= grid.probe_radius
    assert np.all(np.abs(SupGrid().points) <= SupGrid().probe_radius)
    near = disk_sup(lambda z: np.abs(z), grid, hints=(1.0,))
    assert abs(near.argmax) <= grid.probe_radius
    with pytest.raises(InvalidParameter):
        SupGrid(boundary_levels=0)


def test_disk_sup_smooth_maximum():
    result = disk_sup(lambda z: (1 - np.abs(z) ** 2) * np.abs(z))
    assert result.value == pytest.approx(2 / (3 * math.sqrt(3)), rel=1e-8)
    assert abs(result.argmax) == pytest.approx(1 / math.sqrt(3), abs=1e-4)
    assert result.converged
    assert result.value >= result.grid_max


def test_disk_sup_at_origin_and_near_boundary():
    assert disk_sup(lambda z: 1 - np.abs(z) ** 2).value == pytest.approx(1.0)
    assert disk_sup(lambda z: np.abs(z)).value == pytest.approx(1 - 1e-6, abs=1e-9)


def test_disk_sup_without_refinement_is_not_converged():
    result = disk_sup(lambda z: np.abs(z), SupGrid(radial_count=16, angular_count=32), refine=False)
    assert not result.converged
    assert result.value == result.grid_max


def test_disk_sup_uses_hints():
    grid = SupGrid(radial_count=4, angular_count=8, boundary_levels=1)
    peak = 0.55 + 0.35j
    result = disk_sup(lambda z: np.exp(-1e4 * np.abs(z - peak) ** 2), grid, hints=[peak])
    assert result.value == pytest.approx(1.0)


def test_disk_sup_reports_divergence():
    result = disk_sup(lambda z: np.where(np.abs(z) > 0.9, np.inf, 1.0))
    assert result.value == LARGE_VALUE
    assert not result.converged
