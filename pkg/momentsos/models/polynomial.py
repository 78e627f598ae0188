"""
Polynomial Models - Sparse multivariate polynomials and semialgebraic sets
"""
import math
import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from momentsos.errors import DegreeError, DimensionMismatchError, SetError, SizingError

Monomial = Tuple[int, ...]


def monomial(exponents):
    """Validate an exponent vector and return it as a Monomial."""
    alpha = tuple(int(e) for e in exponents)
    if any(e < 0 for e in alpha):
        raise DegreeError(f'negative exponent in {alpha}')
    return alpha


def monomial_degree(alpha):
    return sum(alpha)


def monomial_add(alpha, beta):
    return tuple(a + b for a, b in zip(alpha, beta))


def grlex_key(alpha):
    """Sort key of the graded lexicographic order (x1 > x2 > ... within a degree)."""
    return (sum(alpha), tuple(-a for a in alpha))


def basis_size(n, d):
    """Number of monomials of degree <= d in n variables, C(n+d, n)."""
    if n < 1 or d < 0:
        raise SizingError(f'basis_size needs n >= 1 and d >= 0, got n={n}, d={d}')
    size = math.comb(n + d, n)
    if size > sys.maxsize:
        raise SizingError(f'basis of {n} variables at degree {d} overflows')
    return size


def _compositions(n, k):
    """All exponent vectors of total degree k, in descending lexicographic order."""
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(n - 1, k - first):
            yield (first,) + rest


@lru_cache(maxsize=256)
def _basis(n, d):
    basis_size(n, d)
    return tuple(alpha for k in range(d + 1) for alpha in _compositions(n, k))


def canonical_basis(n, d):
    """Monomials of degree <= d in graded lexicographic order."""
    return list(_basis(n, d))


@lru_cache(maxsize=256)
def basis_index(n, d):
    """Map from monomial to its position in canonical_basis(n, d)."""
    return {alpha: i for i, alpha in enumerate(_basis(n, d))}


class Polynomial:
    """Real polynomial in n variables stored as exponent -> coefficient."""

    __slots__ = ('n', '_terms', '_degree')

    def __init__(self, n, terms=None):
        if n < 1:
            raise DimensionMismatchError(f'polynomial needs at least one variable, got {n}')
        collected: Dict[Monomial, float] = {}
        for alpha, coeff in (terms or {}).items():
            alpha = monomial(alpha)
            if len(alpha) != n:
                raise DimensionMismatchError(
                    f'exponent {alpha} has length {len(alpha)}, expected {n}')
            collected[alpha] = collected.get(alpha, 0.0) + float(coeff)
        self.n = n
        self._terms = {a: c for a, c in collected.items() if c != 0.0}
        self._degree = max((sum(a) for a in self._terms), default=0)

    # Constructors

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def constant(cls, n, value):
        return cls(n, {(0,) * n: value})

    @classmethod
    def variable(cls, n, i):
        """The coordinate polynomial x_i (0-based)."""
        if not 0 <= i < n:
            raise DimensionMismatchError(f'variable index {i} out of range for n={n}')
        alpha = [0] * n
        alpha[i] = 1
        return cls(n, {tuple(alpha): 1.0})

    @classmethod
    def monomial(cls, alpha, coeff=1.0):
        alpha = monomial(alpha)
        return cls(len(alpha), {alpha: coeff})

    @classmethod
    def from_records(cls, n, records):
        """Build from [{'exponents': [...], 'coeff': c}, ...]."""
        terms: Dict[Monomial, float] = {}
        for record in records:
            alpha = monomial(record['exponents'])
            terms[alpha] = terms.get(alpha, 0.0) + float(record['coeff'])
        return cls(n, terms)

    @classmethod
    def from_vector(cls, n, coefficients, basis):
        return cls(n, {alpha: c for alpha, c in zip(basis, coefficients)})

    # Inspection

    @property
    def degree(self):
        return self._degree

    @property
    def is_zero(self):
        return not self._terms

    def terms(self):
        """(monomial, coefficient) pairs in graded lexicographic order."""
        return sorted(self._terms.items(), key=lambda item: grlex_key(item[0]))

    def coefficient(self, alpha):
        return self._terms.get(tuple(alpha), 0.0)

    def coefficient_vector(self, basis):
        """Dense coefficients aligned to a monomial basis; terms outside it are dropped."""
        return np.array([self._terms.get(alpha, 0.0) for alpha in basis])

    def coefficient_norm(self):
        """Euclidean norm of the coefficient vector."""
        return math.sqrt(sum(c * c for c in self._terms.values()))

    def half_degree(self):
        """ceil(deg / 2), the order offset d_j of a constraint polynomial."""
        return (self._degree + 1) // 2

    # Arithmetic

    def _check(self, other):
        if self.n != other.n:
            raise DimensionMismatchError(
                f'polynomials in {self.n} and {other.n} variables cannot be combined')

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self.n, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for alpha, c in other._terms.items():
            terms[alpha] = terms.get(alpha, 0.0) + c
        return Polynomial(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial(self.n, {a: c * float(other) for a, c in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        terms: Dict[Monomial, float] = {}
        for alpha, a in self._terms.items():
            for beta, b in other._terms.items():
                gamma = monomial_add(alpha, beta)
                terms[gamma] = terms.get(gamma, 0.0) + a * b
        return Polynomial(self.n, terms)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise DegreeError('polynomial powers must be non-negative integers')
        result = Polynomial.constant(self.n, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def derivative(self, i):
        """Partial derivative with respect to x_i."""
        terms = {}
        for alpha, c in self._terms.items():
            if alpha[i] > 0:
                beta = list(alpha)
                beta[i] -= 1
                terms[tuple(beta)] = c * alpha[i]
        return Polynomial(self.n, terms)

    # Evaluation

    def __call__(self, x):
        """Evaluate at a point (shape (n,)) or at a batch of points (shape (k, n))."""
        points = np.asarray(x, dtype=float)
        single = points.ndim == 1
        if single:
            points = points[None, :]
        if points.shape[1] != self.n:
            raise DimensionMismatchError(
                f'point of dimension {points.shape[1]} for polynomial in {self.n} variables')
        values = np.zeros(points.shape[0])
        for alpha, c in self._terms.items():
            values += c * np.prod(points ** np.array(alpha), axis=1)
        return float(values[0]) if single else values

    # Comparison and display

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self):
        if not self._terms:
            return f'<Polynomial n={self.n} 0>'
        parts = []
        for alpha, c in self.terms():
            factors = '*'.join(
                f'x{i + 1}' + (f'^{e}' if e > 1 else '') for i, e in enumerate(alpha) if e)
            parts.append(f'{c:g}' + (f'*{factors}' if factors else ''))
        return f'<Polynomial n={self.n} {" + ".join(parts)}>'

    def to_records(self):
        """Serialize as exponent/coefficient records in canonical order."""
        return [{'exponents': list(alpha), 'coeff': c} for alpha, c in self.terms()]

    def to_dict(self):
        return {'n': self.n, 'degree': self.degree, 'terms': self.to_records()}


def poly_eval(p, x):
    """Evaluate p at the point x."""
    return p(x)


def poly_mul(p, q):
    """Coefficient-exact product of two polynomials in the same variables."""
    return p * q


def squared_norm(n):
    """The polynomial x_1^2 + ... + x_n^2."""
    terms = {}
    for i in range(n):
        alpha = [0] * n
        alpha[i] = 2
        terms[tuple(alpha)] = 1.0
    return Polynomial(n, terms)


@dataclass(frozen=True)
class SemialgebraicSet:
    """Basic closed set {x : g_j(x) >= 0}, optionally intersected with a ball."""

    n: int
    constraints: Tuple[Polynomial, ...] = ()
    ball_radius_sq: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'constraints', tuple(self.constraints))
        for g in self.constraints:
            if g.n != self.n:
                raise DimensionMismatchError(
                    f'constraint in {g.n} variables for a set in {self.n} variables')
        if self.ball_radius_sq is not None and self.ball_radius_sq <= 0:
            raise SetError(f'ball_radius_sq must be positive, got {self.ball_radius_sq}')

    @property
    def polynomials(self):
        """Constraint list including the ball constraint M - |x|^2 when set."""
        if self.ball_radius_sq is None:
            return list(self.constraints)
        return list(self.constraints) + [self.ball_radius_sq - squared_norm(self.n)]

    @property
    def max_degree(self):
        return max((g.degree for g in self.polynomials), default=0)

    @property
    def max_half_degree(self):
        return max((g.half_degree() for g in self.polynomials), default=0)

    def contains(self, x, tol=0.0):
        """Membership test; accepts a single point or a batch of points."""
        points = np.asarray(x, dtype=float)
        single = points.ndim == 1
        if single:
            points = points[None, :]
        inside = np.ones(points.shape[0], dtype=bool)
        for g in self.polynomials:
            inside &= g(points) >= -tol
        return bool(inside[0]) if single else inside

    def to_dict(self):
        return {
            'n': self.n,
            'constraints': [g.to_records() for g in self.constraints],
            'ball_radius_sq': self.ball_radius_sq,
        }


def augment_with_ball(S, M):
    """Return S with M - |x|^2 >= 0 added, M > 0.

    An existing ball stays as an ordinary constraint, so augmenting never enlarges S.
    """
    if M <= 0:
        raise SetError(f'ball radius squared must be positive, got {M}')
    constraints = S.constraints
    if S.ball_radius_sq is not None:
        constraints = constraints + (S.ball_radius_sq - squared_norm(S.n),)
    return SemialgebraicSet(S.n, constraints, float(M))


def box_constraints(bounds):
    """Affine description x_i - lo_i >= 0, hi_i - x_i >= 0 of a box."""
    n = len(bounds)
    constraints = []
    for i, (lo, hi) in enumerate(bounds):
        xi = Polynomial.variable(n, i)
        constraints.append(xi - lo)
        constraints.append(hi - xi)
    return SemialgebraicSet(n, tuple(constraints))
