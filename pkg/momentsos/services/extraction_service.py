"""
Extraction Service - Numerical rank, flat-extension test and atom extraction

Atoms are read from the column space of M_d(y): a column echelon form
of a rank-t factor selects a monomial basis, shifted rows give one
multiplication matrix per variable, and a real Schur decomposition of a
random combination of them diagonalizes all of them at once.
"""
import logging

import numpy as np
from scipy import linalg as la

from momentsos.errors import ExtractionFailed, OrderError
from momentsos.models.moments import AtomicMeasure
from momentsos.models.polynomial import basis_index, canonical_basis
from momentsos.models.problems import RankReport
from momentsos.services.moment_service import moment_matrix

logger = logging.getLogger(__name__)

MOMENT_TOL = 1e-5
FEASIBILITY_TOL = 1e-5


def numerical_rank(M, tol_rel=1e-8):
    """Count singular values above tol_rel * sigma_max * dim; also returns the spectrum."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0, np.zeros(0)
    spectrum = la.svdvals(M)
    if spectrum[0] == 0.0:
        return 0, spectrum
    return int(np.sum(spectrum > tol_rel * spectrum[0] * M.shape[0])), spectrum


def rank_test(y, d, s, tol_rel=1e-8):
    """Compare rank M_d(y) with rank M_{d-s}(y) under the threshold of the full matrix."""
    if d - s < 0:
        raise OrderError(f'rank test needs d >= s, got d={d}, s={s}')
    full = moment_matrix(y, d)
    sub = moment_matrix(y, d - s)
    _, sigma_full = numerical_rank(full, tol_rel)
    sigma_sub = la.svdvals(sub)
    threshold = tol_rel * (sigma_full[0] if sigma_full.size else 0.0) * full.shape[0]
    rank_full = int(np.sum(sigma_full > threshold)) if sigma_full.size and sigma_full[0] > 0 else 0
    rank_sub = int(np.sum(sigma_sub > threshold)) if rank_full else 0
    report = RankReport(d=d, s=s, rank_full=rank_full, rank_sub=min(rank_sub, rank_full),
                        singular_values_full=sigma_full, singular_values_sub=sigma_sub)
    logger.debug('rank test d=%d s=%d: %d vs %d', d, s, report.rank_full, report.rank_sub)
    return report


def _column_echelon(V, tol):
    """Gauss-Jordan column reduction; returns the reduced factor and its pivot rows."""
    A = V.copy()
    rows, t = A.shape
    pivots = []
    col = 0
    for row in range(rows):
        if col == t:
            break
        c = col + int(np.argmax(np.abs(A[row, col:])))
        if abs(A[row, c]) <= tol:
            continue
        A[:, [col, c]] = A[:, [c, col]]
        A[:, col] /= A[row, col]
        for other in range(t):
            if other != col:
                A[:, other] -= A[row, other] * A[:, col]
        pivots.append(row)
        col += 1
    if col < t:
        raise ExtractionFailed(f'column echelon form found {col} pivots for rank {t}')
    return A, pivots


def extract_atoms(y, d, t, rank_tol=1e-8, seed=0, S=None):
    """Recover an atomic measure with t atoms whose moments reproduce y up to degree 2d."""
    if t == 0:
        return AtomicMeasure.empty()
    n = y.n
    M = moment_matrix(y, d)
    eigenvalues, eigenvectors = la.eigh(M)
    order = np.argsort(-np.abs(eigenvalues))[:t]
    V = eigenvectors[:, order] * np.sqrt(np.abs(eigenvalues[order]))

    A, pivots = _column_echelon(V, rank_tol * V.shape[0] * np.abs(V).max())
    basis = canonical_basis(n, d)
    index = basis_index(n, d)
    chosen = [basis[p] for p in pivots]

    multipliers = []
    for i in range(n):
        rows = []
        for beta in chosen:
            shifted = list(beta)
            shifted[i] += 1
            position = index.get(tuple(shifted))
            if position is None:
                raise ExtractionFailed(f'monomial {tuple(shifted)} is beyond order {d}')
            rows.append(A[position])
        multipliers.append(np.array(rows))

    rng = np.random.default_rng(seed)
    weights = rng.random(n)
    weights /= weights.sum()
    combined = sum(w * N for w, N in zip(weights, multipliers))
    T, Q = la.schur(combined, output='real')
    if t > 1 and np.max(np.abs(np.diag(T, -1))) > 1e-6 * max(1.0, np.abs(T).max()):
        raise ExtractionFailed('multiplication matrices have complex eigenvalues')

    points = [tuple(float(Q[:, k] @ N @ Q[:, k]) for N in multipliers) for k in range(t)]
    points.sort()

    moments_basis = canonical_basis(n, 2 * d)
    values = y.truncate(d).values
    vandermonde = np.array([[np.prod(np.array(p) ** np.array(alpha)) for p in points]
                            for alpha in moments_basis])
    theta = la.lstsq(vandermonde, values)[0]
    mismatch = float(np.abs(vandermonde @ theta - values).max())
    if mismatch > MOMENT_TOL * (1.0 + np.abs(values).max()):
        raise ExtractionFailed(f'extracted atoms reproduce the moments only to {mismatch:.3e}')

    if S is not None:
        for point in points:
            worst = min((g(np.array(point)) for g in S.polynomials), default=0.0)
            if worst < -FEASIBILITY_TOL:
                logger.warning('extracted atom %s violates a constraint by %.2e', point, -worst)
    return AtomicMeasure(tuple(points), tuple(float(w) for w in theta))
