"""
Tests for polynomials, monomial bases and semialgebraic sets
"""
import numpy as np
import pytest

from conftest import poly
from momentsos.errors import DegreeError, DimensionMismatchError, SetError, SizingError
from momentsos.models.polynomial import (
    Polynomial,
    SemialgebraicSet,
    augment_with_ball,
    basis_index,
    basis_size,
    box_constraints,
    canonical_basis,
    poly_eval,
    poly_mul,
)


@pytest.mark.parametrize('n, d, expected', [(2, 2, 6), (5, 0, 1), (3, 4, 35), (1, 7, 8)])
def test_basis_size(n, d, expected):
    assert basis_size(n, d) == expected


def test_basis_size_rejects_bad_arguments():
    with pytest.raises(SizingError):
        basis_size(0, 2)
    with pytest.raises(SizingError):
        basis_size(2, -1)


def test_canonical_basis_is_graded_lex():
    assert canonical_basis(1, 2) == [(0,), (1,), (2,)]
    assert canonical_basis(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert canonical_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


@pytest.mark.parametrize('n, d', [(1, 5), (2, 4), (3, 3)])
def test_canonical_basis_length_and_prefix(n, d):
    basis = canonical_basis(n, d)
    assert len(basis) == basis_size(n, d)
    assert canonical_basis(n, d + 1)[:len(basis)] == basis
    assert basis_index(n, d)[basis[-1]] == len(basis) - 1


def test_zero_coefficients_are_pruned():
    p = poly(1, {(2,): 1.0, (1,): 0.0})
    q = poly(1, {(2,): 1.0, (1,): 2.0}) + poly(1, {(1,): -2.0})
    assert p == q
    assert q.terms() == [((2,), 1.0)]
    assert (p - p).is_zero
    assert (p - p).degree == 0


def test_poly_eval():
    x = Polynomial.variable(1, 0)
    assert poly_eval(x * x - 1, [2.0]) == pytest.approx(3.0)
    assert poly_eval(Polynomial.constant(3, 5.0), [0.3, -1.0, 2.0]) == 5.0
    p = poly(2, {(2, 1): 1.0, (0, 1): 2.0})
    assert poly_eval(p, [2.0, 3.0]) == pytest.approx(18.0)


def test_poly_eval_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        poly_eval(poly(2, {(1, 0): 1.0}), [1.0])


def test_poly_mul():
    x = Polynomial.variable(1, 0)
    assert poly_mul(x, x) == Polynomial.monomial((2,))
    assert poly_mul(x, Polynomial.zero(1)).is_zero
    assert poly_mul(x + 1, x - 1) == poly(1, {(2,): 1.0, (0,): -1.0})


def test_poly_mul_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        poly_mul(Polynomial.variable(1, 0), Polynomial.variable(2, 1))


def test_product_evaluates_as_product_of_values(rng):
    basis = canonical_basis(3, 3)
    for _ in range(5):
        p = Polynomial.from_vector(3, rng.standard_normal(len(basis)), basis)
        q = Polynomial.from_vector(3, rng.standard_normal(len(basis)), basis)
        x = rng.uniform(-1, 1, 3)
        assert poly_eval(p * q, x) == pytest.approx(p(x) * q(x), rel=1e-12, abs=1e-12)


def test_derivative_and_power():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    p = (x + y) ** 3
    assert p.coefficient((2, 1)) == 3.0
    assert p.derivative(0) == 3 * (x + y) ** 2
    with pytest.raises(DegreeError):
        x ** -1


def test_batch_evaluation():
    p = poly(2, {(1, 1): 1.0})
    values = p(np.array([[1.0, 2.0], [-1.0, 3.0]]))
    np.testing.assert_allclose(values, [2.0, -3.0])


def test_records_are_canonical():
    p = poly(2, {(0, 2): 1.0, (1, 0): 2.0, (0, 0): -1.0})
    assert p.to_records() == [
        {'exponents': [0, 0], 'coeff': -1.0},
        {'exponents': [1, 0], 'coeff': 2.0},
        {'exponents': [0, 2], 'coeff': 1.0},
    ]
    assert Polynomial.from_records(2, p.to_records()) == p


def test_augment_with_ball():
    S = SemialgebraicSet(1, (Polynomial.variable(1, 0),))
    augmented = augment_with_ball(S, 1.0)
    assert augmented.constraints == S.constraints
    assert augmented.polynomials[-1] == poly(1, {(0,): 1.0, (2,): -1.0})

    empty = augment_with_ball(SemialgebraicSet(2), 4.0)
    assert empty.polynomials == [poly(2, {(0, 0): 4.0, (2, 0): -1.0, (0, 2): -1.0})]


def test_augment_with_ball_rejects_non_positive_radius():
    with pytest.raises(SetError):
        augment_with_ball(SemialgebraicSet(1), 0.0)
    with pytest.raises(SetError):
        SemialgebraicSet(1, (), -1.0)


def test_augmenting_twice_keeps_both_balls():
    wide = augment_with_ball(SemialgebraicSet(2, (poly(2, {(1, 0): 1.0}),)), 4.0)
    narrow = augment_with_ball(wide, 1.0)
    assert len(narrow.polynomials) == 3
    assert poly(2, {(0, 0): 4.0, (2, 0): -1.0, (0, 2): -1.0}) in narrow.polynomials
    assert narrow.polynomials[-1] == poly(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})

    widened = augment_with_ball(narrow, 9.0)
    assert not widened.contains([1.5, 0.0])
    assert widened.contains([0.5, 0.0])


def test_ball_keeps_membership_inside_the_ball():
    box = box_constraints([(-1.0, 1.0), (-1.0, 1.0)])
    augmented = augment_with_ball(box, 2.0)
    axis = np.linspace(-1.2, 1.2, 25)
    grid = np.array([(a, b) for a in axis for b in axis])
    inside_ball = (grid ** 2).sum(axis=1) <= 2.0
    np.testing.assert_array_equal(box.contains(grid)[inside_ball],
                                  augmented.contains(grid)[inside_ball])


def test_set_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatchError):
        SemialgebraicSet(2, (Polynomial.variable(1, 0),))
