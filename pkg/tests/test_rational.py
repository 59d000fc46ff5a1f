from __future__ import annotations

import numpy as np
import pytest

from errors import DegenerateTuple
from greedy import PolarGrid
from kernels import ParameterTuple
from nbest import NBestConfig, solve
from ortho import gram_schmidt, project
from rational import (
    HAS_ZEROS,
    INDETERMINATE,
    ZERO_FREE,
    BlaschkeForm,
    RationalForm,
    admissible,
    blaschke_form_of,
    blaschke_product,
    degree,
    rational_of_projection,
    resultant,
    tm_to_rational,
)
from space import boundary_values, evaluate
from targets import TargetSpec


def test_single_point_form():
    rational = tm_to_rational(BlaschkeForm([1.0], ParameterTuple((0.5,))))
    np.testing.assert_allclose(rational.p, [np.sqrt(0.75)])
    np.testing.assert_allclose(rational.q, [1.0, -0.5])
    assert rational.degree_bound == 1


def test_two_point_form_with_leading_zero():
    form = BlaschkeForm([0.0, 1.0], ParameterTuple((0.5, 0.3)))
    rational = tm_to_rational(form)
    c = np.sqrt(1 - 0.09)
    np.testing.assert_allclose(rational.p, [-0.5 * c, c], atol=1e-15)
    np.testing.assert_allclose(rational.q, [1.0, -0.8, 0.15], atol=1e-15)
    assert form.n_degenerate


def test_center_point_gives_constant():
    rational = tm_to_rational(BlaschkeForm([2.0 - 1.0j], ParameterTuple((0.0,))))
    assert rational.p_degree == 0 and rational.q_degree == 0
    assert rational(0.3 + 0.1j) == pytest.approx(2.0 - 1.0j)


def test_conversion_matches_direct_evaluation(rng):
    points = ParameterTuple((0.4, -0.3 + 0.5j, 0.1 - 0.7j, 0.6j))
    coefficients = rng.normal(size=4) + 1j * rng.normal(size=4)
    form = BlaschkeForm(coefficients, points)
    rational = tm_to_rational(form)
    z = np.array([0.0, 0.5, -0.2 + 0.8j, 0.9j])
    np.testing.assert_allclose(rational(z), form.evaluate(z), atol=1e-12)
    assert rational.p_degree <= 4 and rational.q_degree == 4


def test_repeated_points_are_rejected():
    with pytest.raises(DegenerateTuple):
        tm_to_rational(BlaschkeForm([1.0, 1.0], ParameterTuple((0.2, 0.2))))


def test_admissibility_examples():
    ok = admissible(RationalForm([1.0], [1.0, -0.5], 1), 1)
    assert ok.admissible and ok.zero_free == ZERO_FREE
    assert ok.roots == pytest.approx((2.0,))

    inside = admissible(RationalForm([1.0], [1.0, -2.0], 1), 1)
    assert not inside.admissible and inside.zero_free == HAS_ZEROS

    on_circle = admissible(RationalForm([1.0], [1.0, -1.0], 1), 1)
    assert on_circle.zero_free == INDETERMINATE

    common = np.array([1.0, -0.5])
    shared = admissible(RationalForm(common, np.convolve(common, [1.0, -0.25]), 2), 2)
    assert not shared.coprime
    assert shared.resultant < 1e-10

    too_high = admissible(RationalForm([1.0, 0.0, 1.0], [1.0, -0.5], 1), 1)
    assert not too_high.degree_ok


def test_converted_projection_is_admissible(hardy):
    f = TargetSpec.builtin("f1").expand(hardy)
    params = ParameterTuple((0.5, -0.3j, 0.2 + 0.6j))
    rational = rational_of_projection(f, hardy, params)
    report = admissible(rational, len(params))
    assert report.admissible, report.failures


def test_resultant_and_degree_helpers():
    assert degree(np.array([1.0, 2.0, 0.0, 0.0])) == 1
    assert degree(np.zeros(3)) == -1
    assert resultant(np.array([0.0]), np.array([1.0, 2.0])) == 0.0
    # Res(z - 1, z - 2) = 1 prima della normalizzazione
    assert resultant(np.array([-1.0, 1.0]), np.array([-2.0, 1.0])) > 0.1


def test_blaschke_product_values(hardy):
    phi = blaschke_product(ParameterTuple((0.5,)), hardy.truncation)
    assert evaluate(phi, 0.0) == pytest.approx(-0.5)

    phi = blaschke_product(ParameterTuple((0.3, 0.3, -0.4j)), hardy.truncation)
    np.testing.assert_allclose(np.abs(boundary_values(phi, 256)), 1.0, atol=1e-10)
    assert abs(evaluate(phi, 0.3)) < 1e-12


def test_rational_form_agrees_with_projection(hardy):
    f = TargetSpec.builtin("f1").expand(hardy)
    params = ParameterTuple((0.5, -0.3j))
    _, residual = project(f, gram_schmidt(hardy, params))
    projection = f - residual
    rational = rational_of_projection(f, hardy, params)
    for z in (0.0, 0.3, -0.2 + 0.4j, 0.7j):
        assert rational(z) == pytest.approx(evaluate(projection, z), abs=1e-10)


def test_blaschke_form_coefficients_reconstruct_projection(hardy):
    f = TargetSpec.builtin("f2").expand(hardy)
    params = ParameterTuple((0.1 + 0.2j, -0.5))
    form = blaschke_form_of(f, hardy, params)
    coeffs, _ = project(f, gram_schmidt(hardy, params))
    np.testing.assert_allclose(np.abs(form.coefficients), np.abs(coeffs), atol=1e-12)


def test_rational_form_validation():
    with pytest.raises(ValueError):
        RationalForm([1.0], [0.0], 1)
    with pytest.raises(ValueError):
        BlaschkeForm([1.0, 2.0], ParameterTuple((0.1,)))


def test_rational_form_of_two_point_solution(hardy, rng):
    grid = PolarGrid(radial=8, angular=16)
    f = TargetSpec.builtin("f2").expand(hardy)
    result = solve(f, hardy, NBestConfig(n=2, starts=2, grid=grid, greedy_grid=grid, max_cycles=10))
    rational = rational_of_projection(f, hardy, result.parameters)
    assert admissible(rational, 2).admissible

    _, residual = project(f, gram_schmidt(hardy, result.parameters))
    projection = f - residual
    z = 0.9 * np.sqrt(rng.uniform(size=64)) * np.exp(2j * np.pi * rng.uniform(size=64))
    expected = np.array([evaluate(projection, w) for w in z])
    np.testing.assert_allclose(rational(z), expected, atol=1e-8)
