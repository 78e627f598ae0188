"""
Moment Service - Riesz functional, coefficient matrices, moment and localizing matrices
"""
import numpy as np

from momentsos.errors import DegreeError, DimensionMismatchError, MomentError
from momentsos.models.moments import AtomicMeasure, CoefficientMatrixSet, PseudoMomentSequence
from momentsos.models.polynomial import Polynomial, basis_index, canonical_basis, monomial_add

KIND_UNIFORM_BOX = 'uniform_box'
KIND_ATOMIC = 'atomic'

VALID_KINDS = [KIND_UNIFORM_BOX, KIND_ATOMIC]


def _check_dimension(y, p):
    if p.n != y.n:
        raise DimensionMismatchError(
            f'polynomial in {p.n} variables against a sequence in {y.n} variables')


def riesz(y, f):
    """L_y(f) = sum_alpha f_alpha y_alpha."""
    _check_dimension(y, f)
    if f.degree > 2 * y.order:
        raise DegreeError(f'degree {f.degree} exceeds the sequence truncation {2 * y.order}')
    index = basis_index(y.n, 2 * y.order)
    return float(sum(c * y.values[index[alpha]] for alpha, c in f.terms()))


def coefficient_matrices(g, d):
    """B_{g,alpha} with g(x) v_d(x) v_d(x)^T = sum_alpha B_{g,alpha} x^alpha."""
    if d < 0:
        raise DegreeError(f'half-degree must be non-negative, got {d}')
    basis = canonical_basis(g.n, d)
    result = CoefficientMatrixSet(g=g, d=d, size=len(basis))
    terms = g.terms()
    for i, beta_i in enumerate(basis):
        for j in range(i, len(basis)):
            base = monomial_add(beta_i, basis[j])
            for gamma, c in terms:
                result.entries.setdefault(monomial_add(base, gamma), []).append((i, j, c))
    return result


def moment_matrix(y, d):
    """M_d(y) with entries y_{beta_i + beta_j}."""
    if d > y.order:
        raise MomentError(f'moment matrix of order {d} needs a sequence of order >= {d}, got {y.order}')
    return localizing_matrix(y, Polynomial.constant(y.n, 1.0), d)


def localizing_matrix(y, g, d):
    """M_d(g y) with entries sum_gamma g_gamma y_{beta_i + beta_j + gamma}."""
    _check_dimension(y, g)
    if 2 * d + g.degree > 2 * y.order:
        raise DegreeError(
            f'localizing matrix of order {d} for a degree-{g.degree} polynomial '
            f'exceeds the sequence truncation {2 * y.order}')
    basis = canonical_basis(y.n, d)
    index = basis_index(y.n, 2 * y.order)
    terms = g.terms()
    size = len(basis)
    matrix = np.zeros((size, size))
    for i in range(size):
        for j in range(i, size):
            base = monomial_add(basis[i], basis[j])
            value = 0.0
            for gamma, c in terms:
                value += c * y.values[index[monomial_add(base, gamma)]]
            matrix[i, j] = value
            matrix[j, i] = value
    return matrix


def _interval_moment(lo, hi, k):
    return (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)


def measure_moments(kind, support, n, up_to, normalized=False):
    """Exact moments of a reference measure for all |alpha| <= up_to (up_to even).

    uniform_box: support is [(lo, hi), ...]; Lebesgue moments, divided by the box
    volume when normalized. atomic: support is an AtomicMeasure or [(point, weight), ...].
    """
    if up_to < 0 or up_to % 2:
        raise MomentError(f'moment sequences are truncated at an even degree, got {up_to}')
    order = up_to // 2
    basis = canonical_basis(n, up_to)
    if kind == KIND_UNIFORM_BOX:
        bounds = [(float(lo), float(hi)) for lo, hi in support]
        if len(bounds) != n:
            raise DimensionMismatchError(f'box has {len(bounds)} sides for n={n}')
        if any(not (np.isfinite(lo) and np.isfinite(hi) and lo < hi) for lo, hi in bounds):
            raise MomentError(f'box bounds must be finite with lo < hi, got {bounds}')
        values = [float(np.prod([_interval_moment(lo, hi, k) for (lo, hi), k in zip(bounds, alpha)]))
                  for alpha in basis]
        if normalized:
            volume = float(np.prod([hi - lo for lo, hi in bounds]))
            values = [v / volume for v in values]
        return PseudoMomentSequence(n, order, values)
    if kind == KIND_ATOMIC:
        measure = support if isinstance(support, AtomicMeasure) else AtomicMeasure.from_atoms(support)
        if measure.size and len(measure.points[0]) != n:
            raise DimensionMismatchError(f'atoms of dimension {len(measure.points[0])} for n={n}')
        return PseudoMomentSequence(n, order, [measure.moment(alpha) for alpha in basis])
    raise MomentError(f'unsupported reference measure {kind!r}; expected one of {VALID_KINDS}')
