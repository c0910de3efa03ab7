"""Shared fixtures: small rules and grids so estimator tests stay quick."""

import pytest

from config import PATHS

from bloch_wco.analytic_core import Const, Z
from bloch_wco.functionals import AuditControls, ProfileSettings, make_pair
from bloch_wco.mobius import AGrid
from bloch_wco.quadrature import SupGrid, build_rule


@pytest.fixture(scope="session")
def corpus_dir():
    return PATHS["corpus"]


@pytest.fixture(scope="session")
def small_rule():
    return build_rule(32, 128)


@pytest.fixture(scope="session")
def small_grid():
    return SupGrid(radial_count=16, angular_count=32, boundary_levels=4)


@pytest.fixture(scope="session")
def small_a_grid():
    return AGrid(radii=(0.0, 0.5, 0.9, 0.99), angles=8)


@pytest.fixture(scope="session")
def small_settings(small_rule, small_grid, small_a_grid):
    return ProfileSettings(
        rule=small_rule,
        level_rule=build_rule(64, 128),
        sup_grid=small_grid,
        a_grid=small_a_grid,
        powers=40,
        tail_window=10,
        levels=(0.9, 0.99),
        gamma_r_levels=(0.9, 0.99),
        t_levels=(0.9, 0.99),
        workers=1,
    )


@pytest.fixture(scope="session")
def small_controls():
    return AuditControls(radii=(0.0, 0.5), angles=4)


@pytest.fixture(scope="session")
def identity_pair():
    return make_pair(Const(1), Z, "identity")


@pytest.fixture(scope="session")
def half_disk_pair():
    return make_pair(Const(1), Z / 2, "half_disk")
