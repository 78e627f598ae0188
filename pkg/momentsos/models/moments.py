"""
Moment Models - Pseudo-moment sequences, coefficient matrices and atomic measures
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from momentsos.errors import DimensionMismatchError, MomentError
from momentsos.models.polynomial import basis_index, basis_size, canonical_basis


class PseudoMomentSequence:
    """Truncated sequence y = (y_alpha), |alpha| <= 2*order, indexed by the grlex basis."""

    __slots__ = ('n', 'order', 'values')

    def __init__(self, n, order, values):
        values = np.array(values, dtype=float)
        expected = basis_size(n, 2 * order)
        if values.shape != (expected,):
            raise MomentError(
                f'order-{order} sequence in {n} variables needs {expected} values, '
                f'got {values.shape}')
        self.n = n
        self.order = order
        self.values = values
        self.values.setflags(write=False)

    @classmethod
    def from_mapping(cls, n, order, moments):
        """Build from {alpha: value}; every alpha with |alpha| <= 2*order is required."""
        basis = canonical_basis(n, 2 * order)
        missing = [alpha for alpha in basis if tuple(alpha) not in moments]
        if missing:
            raise MomentError(f'missing moments for {missing[:5]}'
                              + (' ...' if len(missing) > 5 else ''))
        return cls(n, order, [moments[tuple(alpha)] for alpha in basis])

    @property
    def basis(self):
        return canonical_basis(self.n, 2 * self.order)

    @property
    def mass(self):
        return float(self.values[0])

    def __getitem__(self, alpha):
        alpha = tuple(alpha)
        if len(alpha) != self.n:
            raise DimensionMismatchError(f'exponent {alpha} for a sequence in {self.n} variables')
        index = basis_index(self.n, 2 * self.order).get(alpha)
        if index is None:
            raise MomentError(f'moment {alpha} exceeds degree {2 * self.order}')
        return float(self.values[index])

    def truncate(self, order):
        """The leading sub-sequence of a lower order."""
        if order > self.order:
            raise MomentError(f'cannot extend an order-{self.order} sequence to order {order}')
        return PseudoMomentSequence(self.n, order, self.values[:basis_size(self.n, 2 * order)])

    def to_records(self):
        return [{'alpha': list(alpha), 'value': float(v)}
                for alpha, v in zip(self.basis, self.values)]

    def to_dict(self):
        return {'n': self.n, 'order': self.order, 'moments': self.to_records()}


@dataclass
class CoefficientMatrixSet:
    """Sparse symmetric matrices B_{g,alpha} with g(x) v_d(x) v_d(x)^T = sum B_{g,alpha} x^alpha.

    Each entry list holds upper-triangle triplets (i, j, value), i <= j.
    """

    g: object
    d: int
    size: int
    entries: Dict[Tuple[int, ...], List[Tuple[int, int, float]]] = field(default_factory=dict)

    def dense(self, alpha):
        """B_{g,alpha} as a dense symmetric array (zero if alpha has no entries)."""
        matrix = np.zeros((self.size, self.size))
        for i, j, value in self.entries.get(tuple(alpha), ()):
            matrix[i, j] = value
            matrix[j, i] = value
        return matrix

    def evaluate(self, x):
        """sum_alpha B_{g,alpha} x^alpha at a point."""
        x = np.asarray(x, dtype=float)
        total = np.zeros((self.size, self.size))
        for alpha, triplets in self.entries.items():
            weight = float(np.prod(x ** np.array(alpha)))
            for i, j, value in triplets:
                total[i, j] += value * weight
                if i != j:
                    total[j, i] += value * weight
        return total


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported measure sum_k w_k delta_{x_k}; weights may be signed."""

    points: Tuple[Tuple[float, ...], ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        points = tuple(tuple(float(c) for c in p) for p in self.points)
        weights = tuple(float(w) for w in self.weights)
        if len(points) != len(weights):
            raise DimensionMismatchError('atoms and weights differ in number')
        if len({len(p) for p in points}) > 1:
            raise DimensionMismatchError('atoms have different dimensions')
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def from_atoms(cls, atoms):
        """Build from [(point, weight), ...]."""
        atoms = list(atoms)
        return cls(tuple(p for p, _ in atoms), tuple(w for _, w in atoms))

    @classmethod
    def empty(cls):
        return cls((), ())

    @property
    def atoms(self):
        return list(zip(self.points, self.weights))

    @property
    def size(self):
        return len(self.points)

    @property
    def total_variation(self):
        return sum(abs(w) for w in self.weights)

    @property
    def mass(self):
        return sum(self.weights)

    def moment(self, alpha):
        return sum(w * float(np.prod(np.array(p) ** np.array(alpha)))
                   for p, w in zip(self.points, self.weights))

    def combine(self, other, sign=1.0):
        """self + sign * other as one atomic measure (atoms are not merged)."""
        return AtomicMeasure(self.points + other.points,
                             self.weights + tuple(sign * w for w in other.weights))

    def to_dict(self):
        return {
            'atoms': [{'point': list(p), 'weight': w} for p, w in self.atoms],
            'total_variation': self.total_variation,
        }
