"""
Shared fixtures for the momentsos test suite
"""
from pathlib import Path

import numpy as np
import pytest

from momentsos.models.polynomial import Polynomial, SemialgebraicSet
from momentsos.models.problems import PopProblem

PROBLEMS_DIR = Path(__file__).resolve().parent.parent / 'problems'


def poly(n, terms):
    """Shorthand: poly(2, {(1, 1): 1.0}) is x1*x2."""
    return Polynomial(n, terms)


@pytest.fixture
def problems_dir():
    return PROBLEMS_DIR


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def interval():
    """[-1, 1] as {1 - x^2 >= 0}."""
    return SemialgebraicSet(1, (poly(1, {(0,): 1.0, (2,): -1.0}),))


@pytest.fixture
def univariate_problem(interval):
    """x^4 - x^2 on [-1, 1]; minimum -1/4 at +-1/sqrt(2)."""
    return PopProblem(poly(1, {(4,): 1.0, (2,): -1.0}), interval)


@pytest.fixture
def box_problem():
    """x1*x2 on [-1, 1]^2; minimum -1 at (1, -1) and (-1, 1)."""
    S = SemialgebraicSet(2, (poly(2, {(0, 0): 1.0, (2, 0): -1.0}),
                             poly(2, {(0, 0): 1.0, (0, 2): -1.0})))
    return PopProblem(poly(2, {(1, 1): 1.0}), S)


@pytest.fixture
def motzkin():
    return poly(2, {(4, 2): 1.0, (2, 4): 1.0, (2, 2): -3.0, (0, 0): 1.0})
