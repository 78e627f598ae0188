"""
Tests for the Riesz functional, coefficient matrices and moment matrices
"""
import numpy as np
import pytest

from conftest import poly
from momentsos.errors import DegreeError, MomentError
from momentsos.models.moments import AtomicMeasure, PseudoMomentSequence
from momentsos.models.polynomial import Polynomial, canonical_basis
from momentsos.services.moment_service import (
    KIND_ATOMIC,
    KIND_UNIFORM_BOX,
    coefficient_matrices,
    localizing_matrix,
    measure_moments,
    moment_matrix,
    riesz,
)


def dirac(point, order):
    return measure_moments(KIND_ATOMIC, [(point, 1.0)], len(point), 2 * order)


def test_riesz():
    y = dirac((2.0,), 2)
    assert riesz(y, Polynomial.monomial((2,))) == pytest.approx(4.0)
    assert riesz(y, Polynomial.constant(1, 1.0)) == pytest.approx(1.0)
    uniform = measure_moments(KIND_UNIFORM_BOX, [(0.0, 1.0)], 1, 2)
    assert riesz(uniform, Polynomial.variable(1, 0)) == pytest.approx(0.5)


def test_riesz_rejects_degree_overflow():
    with pytest.raises(DegreeError):
        riesz(dirac((1.0,), 1), Polynomial.monomial((3,)))


def test_riesz_is_linear(rng):
    y = measure_moments(KIND_UNIFORM_BOX, [(-1.0, 1.0), (0.0, 2.0)], 2, 4)
    basis = canonical_basis(2, 4)
    f = Polynomial.from_vector(2, rng.standard_normal(len(basis)), basis)
    h = Polynomial.from_vector(2, rng.standard_normal(len(basis)), basis)
    assert riesz(y, 2.0 * f - 3.0 * h) == pytest.approx(2.0 * riesz(y, f) - 3.0 * riesz(y, h),
                                                          abs=1e-12)


def test_coefficient_matrices_of_one():
    B = coefficient_matrices(Polynomial.constant(1, 1.0), 1)
    np.testing.assert_array_equal(B.dense((0,)), [[1, 0], [0, 0]])
    np.testing.assert_array_equal(B.dense((1,)), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(B.dense((2,)), [[0, 0], [0, 1]])


def test_coefficient_matrices_of_x():
    B = coefficient_matrices(Polynomial.variable(1, 0), 1)
    assert B.dense((1,))[0, 0] == 1
    assert B.dense((2,))[0, 1] == B.dense((2,))[1, 0] == 1
    assert B.dense((3,))[1, 1] == 1
    assert not B.dense((0,)).any()


def test_coefficient_matrices_reproduce_outer_product(rng):
    n, d = 2, 2
    B = coefficient_matrices(Polynomial.constant(n, 1.0), d)
    x = rng.uniform(-1, 1, n)
    v = np.array([np.prod(x ** np.array(alpha)) for alpha in canonical_basis(n, d)])
    np.testing.assert_allclose(B.evaluate(x), np.outer(v, v), atol=1e-12)


def test_moment_matrix_of_dirac_has_rank_one():
    x0 = (0.3, -0.7)
    M = moment_matrix(dirac(x0, 2), 2)
    v = np.array([np.prod(np.array(x0) ** np.array(alpha)) for alpha in canonical_basis(2, 2)])
    np.testing.assert_allclose(M, np.outer(v, v), atol=1e-14)
    assert np.linalg.matrix_rank(M, tol=1e-10) == 1


def test_moment_matrix_of_uniform_interval():
    y = measure_moments(KIND_UNIFORM_BOX, [(-1.0, 1.0)], 1, 2, normalized=True)
    np.testing.assert_allclose(moment_matrix(y, 1), [[1.0, 0.0], [0.0, 1.0 / 3.0]])


def test_moment_matrix_of_unit_mass_at_zero_moments():
    values = np.zeros(6)
    values[0] = 1.0
    M = moment_matrix(PseudoMomentSequence(2, 1, values), 1)
    np.testing.assert_array_equal(M, np.diag([1.0, 0.0, 0.0]))


def test_moment_matrix_rejects_large_order():
    with pytest.raises(MomentError):
        moment_matrix(dirac((1.0,), 1), 2)


def test_moment_matrix_matches_coefficient_matrices():
    y = measure_moments(KIND_UNIFORM_BOX, [(0.0, 1.0), (-1.0, 2.0)], 2, 4)
    B = coefficient_matrices(Polynomial.constant(2, 1.0), 2)
    assembled = sum(value * B.dense(alpha) for alpha, value in zip(y.basis, y.values))
    np.testing.assert_allclose(moment_matrix(y, 2), assembled, atol=1e-14)


def test_localizing_matrix():
    x0 = (0.5,)
    g = poly(1, {(0,): 1.0, (2,): -1.0})
    y = dirac(x0, 3)
    np.testing.assert_allclose(localizing_matrix(y, g, 2), g(np.array(x0)) * moment_matrix(y, 2),
                               atol=1e-14)
    np.testing.assert_array_equal(localizing_matrix(y, Polynomial.constant(1, 1.0), 2),
                                  moment_matrix(y, 2))

    uniform = measure_moments(KIND_UNIFORM_BOX, [(-1.0, 1.0)], 1, 2, normalized=True)
    np.testing.assert_allclose(localizing_matrix(uniform, g, 0), [[2.0 / 3.0]])


def test_localizing_matrix_rejects_degree_overflow():
    with pytest.raises(DegreeError):
        localizing_matrix(dirac((0.5,), 2), poly(1, {(2,): 1.0}), 2)


def test_atomic_moment_matrices_are_psd(rng):
    points = rng.uniform(-1, 1, (4, 2))
    weights = rng.uniform(0.1, 1.0, 4)
    y = measure_moments(KIND_ATOMIC, list(zip(points, weights)), 2, 6)
    M = moment_matrix(y, 3)
    assert np.linalg.eigvalsh(M).min() >= -1e-9 * np.linalg.norm(M)
    g = poly(2, {(0, 0): 2.0, (2, 0): -1.0, (0, 2): -1.0})
    L = localizing_matrix(y, g, 2)
    assert np.linalg.eigvalsh(L).min() >= -1e-9 * np.linalg.norm(L)


def test_measure_moments():
    box = measure_moments(KIND_UNIFORM_BOX, [(-1.0, 1.0)], 1, 2)
    assert box[(2,)] == pytest.approx(2.0 / 3.0)
    atoms = measure_moments(KIND_ATOMIC, AtomicMeasure.from_atoms([((0.5,), 1.0)]), 1, 4)
    assert atoms[(3,)] == pytest.approx(0.125)
    square = measure_moments(KIND_UNIFORM_BOX, [(0.0, 1.0), (0.0, 1.0)], 2, 2)
    assert square[(1, 1)] == pytest.approx(0.25)


def test_measure_moments_rejects_bad_requests():
    with pytest.raises(MomentError):
        measure_moments('gaussian', None, 1, 2)
    with pytest.raises(MomentError):
        measure_moments(KIND_UNIFORM_BOX, [(0.0, 1.0)], 1, 3)
    with pytest.raises(MomentError):
        measure_moments(KIND_UNIFORM_BOX, [(1.0, 0.0)], 1, 2)


def test_sequence_requires_every_moment():
    with pytest.raises(MomentError):
        PseudoMomentSequence.from_mapping(1, 1, {(0,): 1.0, (1,): 0.0})
    y = PseudoMomentSequence.from_mapping(1, 1, {(0,): 1.0, (1,): 0.0, (2,): 0.5})
    assert y.mass == 1.0
    assert y.truncate(0).values.tolist() == [1.0]
