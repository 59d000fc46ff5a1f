from __future__ import annotations

import numpy as np
import pytest

from conftest import random_polynomial, separated_points
from errors import DegenerateSystem, DegenerateTuple
from kernels import ParameterTuple, normalized_kernel
from ortho import (
    empty_system,
    extend,
    gram_matrix,
    gram_schmidt,
    lic_check,
    project,
    tm_closed_form,
)
from rational import blaschke_product
from space import SpaceSpec, inner_product, norm


def _phase_error(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - phase * b| col fattore unimodulare ottimo."""
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(a - phase * b)))


def test_gram_schmidt_matches_tm_closed_form(rng):
    spec = SpaceSpec(kind="hardy", truncation=512, r_max=0.9)
    for trial in range(50):
        n = 2 + trial % 5
        params = ParameterTuple(tuple(separated_points(rng, n, 0.85, 0.1)))
        system = gram_schmidt(spec, params)
        closed = tm_closed_form(spec, params)
        for b, tm in zip(system.basis, closed):
            assert _phase_error(b.coeffs, tm.coeffs) <= 1e-9


def test_basis_is_orthonormal_with_repeated_parameters(bergman1):
    params = ParameterTuple((0.3, 0.3, -0.2 + 0.5j, 0.3))
    system = gram_schmidt(bergman1, params)
    gram = np.array([[inner_product(a, b, bergman1) for b in system.basis] for a in system.basis])
    np.testing.assert_allclose(gram, np.eye(len(params)), atol=1e-10)


def test_phase_convention_first_coefficient_real_positive(hardy):
    system = gram_schmidt(hardy, ParameterTuple((0.4j, -0.3)))
    for b in system.basis:
        lead = b.coeffs[np.flatnonzero(np.abs(b.coeffs) > 1e-10 * np.abs(b.coeffs).max())[0]]
        assert lead.real > 0 and lead.imag == pytest.approx(0.0, abs=1e-14)


def test_extend_preserves_existing_basis(bergman):
    base = gram_schmidt(bergman, ParameterTuple((0.1, 0.5j)))
    grown = base.extended(-0.6)
    for old, new in zip(base.basis, grown.basis):
        np.testing.assert_array_equal(old.coeffs, new.coeffs)
    element, denom = extend(base, -0.6)
    np.testing.assert_allclose(element.coeffs, grown.basis[-1].coeffs)
    assert 0.0 < denom <= 1.0


def test_extend_rejects_point_within_delta(hardy):
    base = gram_schmidt(hardy, ParameterTuple((0.2,)))
    with pytest.raises(DegenerateSystem):
        extend(base, 0.2 + 1e-8, delta=1e-6)


def test_nearly_dependent_kernels_raise_with_denominator(hardy):
    with pytest.raises(DegenerateSystem) as info:
        gram_schmidt(hardy, ParameterTuple((0.3, 0.3 + 1e-11)), lic_floor=1e-8)
    assert info.value.denom <= 1e-8


def test_project_energy_identity(bergman, rng):
    f = random_polynomial(rng, 12, bergman.truncation)
    system = gram_schmidt(bergman, ParameterTuple((0.1, -0.5 + 0.2j, 0.7j)))
    coeffs, residual = project(f, system)
    assert norm(residual, bergman) ** 2 + np.sum(np.abs(coeffs) ** 2) == pytest.approx(norm(f, bergman) ** 2, abs=1e-8)
    for b in system.basis:
        assert abs(inner_product(residual, b, bergman)) < 1e-12


def test_project_on_empty_system_returns_f(hardy, rng):
    f = random_polynomial(rng, 4, hardy.truncation)
    coeffs, residual = project(f, empty_system(hardy))
    assert coeffs.size == 0
    assert residual is f


def test_lic_check_examples(hardy, rng):
    assert lic_check(hardy, ParameterTuple((0.0, 0.5))) == pytest.approx(1.0 - np.sqrt(0.75), abs=1e-9)
    for trial in range(100):
        params = ParameterTuple(tuple(separated_points(rng, 1 + trial % 6, 0.8, 0.2)))
        assert lic_check(hardy, params) > 1e-6


def test_gram_matrix_is_hermitian_with_unit_diagonal(bergman1):
    gram = gram_matrix(bergman1, ParameterTuple((0.1, 0.4j, -0.5)))
    np.testing.assert_allclose(gram.entries, gram.entries.conj().T)
    np.testing.assert_allclose(np.diag(gram.entries), 1.0)
    assert gram.min_eigenvalue > 0


def test_tm_closed_form_requirements(hardy, bergman):
    with pytest.raises(DegenerateTuple):
        tm_closed_form(hardy, ParameterTuple((0.2, 0.2)))
    with pytest.raises(ValueError):
        tm_closed_form(bergman, ParameterTuple((0.2,)))


def test_first_basis_element_is_normalized_kernel(bergman1):
    system = gram_schmidt(bergman1, ParameterTuple((0.45 - 0.1j,)))
    expected = normalized_kernel(bergman1, 0.45 - 0.1j).series
    assert _phase_error(system.basis[0].coeffs, expected.coeffs) < 1e-13


def test_extension_is_blaschke_product_times_normalized_kernel(rng):
    spec = SpaceSpec(kind="hardy", truncation=512, r_max=0.9)
    for trial in range(12):
        n = 1 + trial % 4
        points = separated_points(rng, n + 1, 0.8, 0.1)
        head = ParameterTuple(tuple(points[:n]))
        element, _ = extend(gram_schmidt(spec, head), points[n])
        expected = blaschke_product(head, spec.truncation).multiply(normalized_kernel(spec, points[n]).series)
        assert _phase_error(element.coeffs, expected.coeffs) <= 1e-8
