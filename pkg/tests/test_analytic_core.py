"""Expression trees: evaluation, differentiation, self-map probe, Taylor fit."""

import math

import numpy as np
import pytest

from bloch_wco.analytic_core import (
    Compose,
    Const,
    Div,
    Exp,
    Log,
    Mobius,
    PowInt,
    Var,
    Z,
    derivative,
    evaluate,
    polynomial,
    taylor_truncate,
    validate_self_map,
)
from bloch_wco.errors import (
    DivisionNearZero,
    InvalidParameter,
    LogDomain,
    NonFiniteValue,
    NotSelfMap,
    PoorConvergence,
)


def test_evaluate_scalar_and_array():
    f = Z ** 2 + 3 * Z + 1
    assert evaluate(f, 0.5) == pytest.approx(2.75)
    assert isinstance(evaluate(f, 0.5), complex)

    values = evaluate(Const(2), np.zeros((3, 4)))
    assert values.shape == (3, 4)
    assert np.all(values == 2)


def test_operator_overloads_build_equal_trees():
    assert Z ** 2 == PowInt(Var(), 2)
    assert hash(Z ** 2) == hash(PowInt(Var(), 2))
    assert Z + 1 != Z + 2


@pytest.mark.parametrize("f", [
    Z ** 3,
    Exp(Z),
    Log(1 + Z),
    Div(Z, 1 - Z),
    Compose(Exp(Z), Z ** 2),
    Mobius(0.3 + 0.4j),
    Exp(Z) * Mobius(0.5) - Z ** 4 / 3,
])
def test_derivative_matches_central_difference(f):
    rng = np.random.default_rng(3)
    z = 0.6 * np.sqrt(rng.uniform(size=16)) * np.exp(2j * np.pi * rng.uniform(size=16))
    h = 1e-6
    numeric = (evaluate(f, z + h) - evaluate(f, z - h)) / (2 * h)
    exact = evaluate(derivative(f), z)
    assert np.allclose(exact, numeric, rtol=1e-6, atol=1e-8)


def test_derivative_closed_forms():
    assert evaluate(derivative(Mobius(0.5)), 0j) == pytest.approx(-0.75)
    assert evaluate(derivative(Div(Z, 1 - Z)), 0.5) == pytest.approx(4.0)
    assert evaluate(derivative(Compose(Exp(Z), Z ** 2)), 0.5) == pytest.approx(math.exp(0.25))
    assert derivative(Const(7)) == Const(0)


def test_evaluation_errors():
    with pytest.raises(DivisionNearZero):
        evaluate(Div(Const(1), Z), 0j)
    with pytest.raises(LogDomain):
        evaluate(Log(Z), 0j)
    with pytest.raises(NonFiniteValue):
        evaluate(Exp(Const(1000)), 0.0)


def test_node_parameter_validation():
    with pytest.raises(InvalidParameter):
        Const(float("inf"))
    with pytest.raises(InvalidParameter):
        PowInt(Z, -1)
    with pytest.raises(InvalidParameter):
        Mobius(1.0)


def test_self_map_probe_strict_and_contact():
    strict = validate_self_map(Z / 2)
    assert strict.is_self_map
    assert not strict.boundary_contact
    assert strict.sup_modulus == pytest.approx(0.4999995, abs=1e-9)

    contact = validate_self_map((1 + Z) / 2)
    assert contact.boundary_contact
    assert contact.sup_modulus == pytest.approx(1 - 5e-7, abs=1e-9)
    assert contact.witness.real > 0.99


def test_self_map_probe_rejects_expanding_map():
    with pytest.raises(NotSelfMap) as info:
        validate_self_map(2 * Z)
    assert info.value.report.sup_modulus == pytest.approx(2.0, abs=1e-5)


def test_self_map_probe_needs_enough_angles():
    with pytest.raises(InvalidParameter):
        validate_self_map(Z, angular_count=64)


def test_taylor_truncate_exponential():
    coeffs = taylor_truncate(Exp(Z), 20)
    expected = [1.0 / math.factorial(k) for k in range(21)]
    assert np.allclose(coeffs, expected, atol=1e-10)


def test_taylor_truncate_detects_short_expansion():
    with pytest.raises(PoorConvergence) as info:
        taylor_truncate(Div(Const(1), 1 - Z), 10)
    assert info.value.residual > 1e-8


def test_polynomial_horner_tree():
    assert evaluate(polynomial([1, 0, 2]), 0.5) == pytest.approx(1.5)
    assert evaluate(polynomial([0.2, 0.2, 0.4]), 1j) == pytest.approx(0.2 + 0.2j - 0.4)
    assert polynomial([]) == Const(0)
