"""Polynomial symbols, preimages and counting-function checks."""

import math

import numpy as np
import pytest

from bloch_wco.analytic_core import Exp, Mobius, Z, evaluate
from bloch_wco.errors import AtCriticalValue, InvalidParameter, NotSelfMap, PreconditionViolated, UnsupportedSymbol
from bloch_wco.nevanlinna import (
    change_of_variable_ratio,
    composition_product_bounds,
    counting_function,
    counting_values,
    littlewood_check,
    make_polynomial_map,
    polynomial_coefficients,
    polynomial_map_from_expr,
    preimages,
    sublog_bound_check,
)
from bloch_wco.quadrature import build_rule

SQUARE = make_polynomial_map([0, 0, 1])
HOROCYCLE = make_polynomial_map([0.5, 0.5])


def test_polynomial_coefficients_from_trees():
    assert np.allclose(polynomial_coefficients(Z * (1 + Z) / 2), [0, 0.5, 0.5])
    assert np.allclose(polynomial_coefficients((1 + Z) ** 2 / 4), [0.25, 0.5, 0.25])
    assert np.allclose(polynomial_coefficients((Z ** 2).compose(1 - Z)), [1, -2, 1])
    with pytest.raises(UnsupportedSymbol):
        polynomial_coefficients(Exp(Z))
    with pytest.raises(UnsupportedSymbol):
        polynomial_coefficients(Z * Mobius(0.5))


def test_polynomial_map_construction():
    phi = polynomial_map_from_expr(0.2 + 0.2 * Z + 0.4 * Z ** 2)
    assert phi.degree == 2
    assert phi.at_zero == pytest.approx(0.2)
    assert phi.report is not None and not phi.report.boundary_contact
    z = np.array([0.1, 0.5j, -0.3 + 0.2j])
    assert np.allclose(evaluate(phi.as_expr(), z), phi(z))

    with pytest.raises(InvalidParameter):
        make_polynomial_map([0.5, 0.0])
    with pytest.raises(NotSelfMap):
        make_polynomial_map([0, 2])


def test_preimages_with_multiplicity():
    two = preimages(SQUARE, 0.25)
    assert two.total_multiplicity == 2
    assert sorted(round(z.real, 9) for z, _ in two.roots) == [-0.5, 0.5]

    double = preimages(SQUARE, 0.0)
    assert len(double.roots) == 1
    assert double.roots[0][1] == 2

    assert preimages(HOROCYCLE, -0.2).total_multiplicity == 0


def test_counting_function_of_square():
    assert counting_function(SQUARE, 0.25, 1.0) == pytest.approx(2 * math.log(2), rel=1e-12)
    assert counting_function(SQUARE, 0.25, 2.0) == pytest.approx(2 * math.log(2) ** 2, rel=1e-12)


def test_counting_at_critical_value():
    with pytest.raises(AtCriticalValue):
        counting_function(SQUARE, 0.0, 1.0)
    values = counting_values(SQUARE, np.array([0.0, 0.25]), 1.0, skip_critical=True)
    assert values[0] == 0.0
    assert values[1] == pytest.approx(2 * math.log(2))
    with pytest.raises(InvalidParameter):
        counting_values(SQUARE, np.array([0.25]), 0.0)


@pytest.mark.parametrize("gamma", [1.0, 2.0])
@pytest.mark.parametrize("fraction", [0.25, 0.5])
def test_littlewood_sub_mean_value(gamma, fraction):
    margin = littlewood_check(HOROCYCLE, gamma, fraction * 0.5, build_rule(32, 128))
    assert margin >= -1e-9


def test_littlewood_preconditions():
    with pytest.raises(PreconditionViolated):
        littlewood_check(SQUARE, 1.0, 0.1)
    with pytest.raises(PreconditionViolated):
        littlewood_check(HOROCYCLE, 1.0, 0.5)


def test_change_of_variable_for_square():
    cov = change_of_variable_ratio(Z, SQUARE)
    assert cov.lhs == pytest.approx(1 / 3, rel=1e-12)
    assert cov.ratio == pytest.approx(4 / 3, rel=1e-3)


def test_change_of_variable_is_sharp_for_identity():
    cov = change_of_variable_ratio(Z, make_polynomial_map([0, 1]))
    assert cov.lhs == pytest.approx(0.5, rel=1e-12)
    assert cov.ratio == pytest.approx(1.0, rel=1e-3)


def test_sublog_bound_holds_for_maps_fixing_zero():
    assert sublog_bound_check(SQUARE) >= -1e-12
    assert sublog_bound_check(make_polynomial_map([0, 0.5, 0.5])) >= -1e-12
    with pytest.raises(PreconditionViolated):
        sublog_bound_check(HOROCYCLE)


def test_composition_product_bounds():
    bounds = composition_product_bounds(SQUARE, build_rule(32, 128))
    assert bounds.psi_norm == pytest.approx(1 / math.sqrt(3), rel=1e-10)
    assert bounds.mobius_margin >= 0.0
    assert bounds.counting_margin >= 0.0
    with pytest.raises(PreconditionViolated):
        composition_product_bounds(HOROCYCLE)
