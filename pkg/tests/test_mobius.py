"""Disk automorphisms, pseudo-hyperbolic distance and the a-grid search."""

import numpy as np
import pytest

from bloch_wco.analytic_core import Compose, evaluate
from bloch_wco.errors import InvalidParameter
from bloch_wco.mobius import (
    MAX_MODULUS,
    AGrid,
    DiskPoint,
    hyperbolic_ascent,
    make_mobius,
    mobius_values,
    pseudo_hyperbolic,
    schwarz_pick_defect,
)


def _disk_points(seed, n=32, radius=0.95):
    rng = np.random.default_rng(seed)
    return radius * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


@pytest.mark.parametrize("a", [0.0, 0.5, -0.3 + 0.6j, 0.9j])
def test_mobius_is_an_involution_swapping_zero_and_a(a):
    sigma = make_mobius(a)
    z = _disk_points(1, n=10_000)
    assert np.allclose(evaluate(Compose(sigma, sigma), z), z, rtol=0.0, atol=1e-10)
    assert evaluate(sigma, 0j) == pytest.approx(a)
    assert abs(evaluate(sigma, complex(a))) < 1e-15


def test_mobius_values_match_expression():
    z = _disk_points(2)
    assert np.allclose(mobius_values(0.4 - 0.2j, z), evaluate(make_mobius(0.4 - 0.2j), z))


def test_pseudo_hyperbolic_distance():
    z, w = _disk_points(3, n=10_000), _disk_points(4, n=10_000)
    assert np.allclose(pseudo_hyperbolic(z, w), pseudo_hyperbolic(w, z), rtol=0.0, atol=1e-14)
    assert pseudo_hyperbolic(0.0, 0.5) == pytest.approx(0.5)
    assert pseudo_hyperbolic(DiskPoint(0.5), DiskPoint(0.5)) == 0.0
    assert np.all(pseudo_hyperbolic(z, w) < 1.0)


def test_schwarz_pick_equality_for_automorphisms():
    z = _disk_points(5)
    for a in (0.2, 0.7j, -0.5 - 0.5j):
        assert np.allclose(schwarz_pick_defect(a, z), 0.0, atol=1e-12)


def test_parameter_limits():
    with pytest.raises(InvalidParameter):
        make_mobius(1.0 - 1e-9)
    with pytest.raises(InvalidParameter):
        DiskPoint(1.0)
    with pytest.raises(InvalidParameter):
        AGrid(radii=(0.0, 1.0))
    assert make_mobius(MAX_MODULUS).a == MAX_MODULUS


def test_a_grid_points_and_boundary_probes():
    grid = AGrid(radii=(0.0, 0.5), angles=4)
    points = grid.points()
    assert points.shape == (5,)
    assert points[0] == 0j
    assert np.allclose(np.abs(points[1:]), 0.5)

    probed = grid.points(witness=0.999j)
    assert probed.shape == (5 + len(grid.boundary_probes),)
    assert np.allclose(probed[5:].real, 0.0)
    assert probed[-1].imag == pytest.approx(grid.boundary_probes[-1])


def test_hyperbolic_ascent_finds_interior_maximum():
    target = 0.3 - 0.2j
    a, value, converged = hyperbolic_ascent(lambda a: -abs(a - target) ** 2, 0j)
    assert converged
    assert abs(a - target) < 1e-2
    assert value <= 0.0
