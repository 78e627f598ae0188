"""
Hierarchy Service - Moment relaxations, SOS strengthenings, certificates and the Krivine LP

The moment side is compiled literally: y is a free block, each localizing
matrix M_{d-d_j}(g_j y) is a PSD block whose entries are tied to y by
equality rows. The SOS side puts the Gram matrices in the primal and the
pseudo-moments in the dual multipliers (y = -multipliers).
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
from scipy import linalg as la

from momentsos.errors import CertificateRejected, ExtractionFailed, OrderError, SetError
from momentsos.models.conic import FREE, NONNEG, PSD, ConicProgram, ConicSolution
from momentsos.models.moments import PseudoMomentSequence
from momentsos.models.polynomial import Polynomial, basis_index, canonical_basis
from momentsos.models.problems import (
    HierarchyLevel,
    KrivineResult,
    NotCertified,
    SosCertificate,
)
from momentsos.services.conic_solver import SolverOptions, solve
from momentsos.services.extraction_service import extract_atoms, rank_test
from momentsos.services.moment_service import coefficient_matrices, moment_matrix, riesz

logger = logging.getLogger(__name__)

CERTIFICATE_TOL = 1e-6
GRAM_CUTOFF = 1e-9
MONOTONE_SLACK = 1e-7


@dataclass
class MomentRelaxation:
    """Compiled moment relaxation; y lives in block 0 at positions given by index."""

    program: ConicProgram
    index: Dict[tuple, int]
    n: int
    order: int

    def moments(self, solution):
        return PseudoMomentSequence(self.n, self.order, solution.primal[0])


@dataclass
class SosRelaxation:
    """Compiled SOS strengthening: lambda in block 0, one Gram block per constraint."""

    program: ConicProgram
    grams: List[tuple]
    n: int
    order: int

    def bound(self, solution):
        return float(solution.primal[0][0])

    def moments(self, solution):
        return PseudoMomentSequence(self.n, self.order, -np.asarray(solution.dual))


@dataclass
class KrivineRelaxation:
    """Compiled Krivine LP and the data needed to interpret it."""

    program: Optional[ConicProgram]
    k: int
    products: List[tuple]
    generators: List[Polynomial]
    violations: List[tuple] = field(default_factory=list)

    @property
    def structurally_unbounded(self):
        return self.program is None


@dataclass(frozen=True)
class HierarchyOptions:
    """Settings of the hierarchy driver."""

    solver: SolverOptions = SolverOptions()
    extract: bool = True
    certificates: bool = True
    rank_tol: float = 1e-8
    seed: int = 0
    threads: int = 1
    d_min: Optional[int] = None

    @classmethod
    def from_settings(cls, settings, **overrides):
        options = cls(solver=SolverOptions.from_settings(settings), rank_tol=settings.rank_tol,
                      seed=settings.seed, threads=settings.threads)
        return replace(options, **overrides)


def _check_order(P, d):
    if d < P.min_order:
        raise OrderError(f'order {d} is below the minimal order {P.min_order} of the problem')


def _constraint_list(P):
    """[(g_j, d_j)] with the constant 1 first."""
    return [(Polynomial.constant(P.n, 1.0), 0)] + [(g, g.half_degree()) for g in P.constraints]


def build_primal_relaxation(P, d):
    """Order-d moment relaxation: min L_y(f) s.t. y_0 = 1, M_{d-d_j}(g_j y) PSD."""
    _check_order(P, d)
    n = P.n
    basis = canonical_basis(n, 2 * d)
    index = basis_index(n, 2 * d)
    program = ConicProgram(name=f'moment relaxation d={d}')
    y = program.add_block(FREE, len(basis))
    program.add_constraint([(y, 0, 0, 1.0)], 1.0)
    for alpha, c in P.f.terms():
        program.add_objective(y, index[alpha], index[alpha], c)

    for g, dj in _constraint_list(P):
        B = coefficient_matrices(g, d - dj)
        block = program.add_block(PSD, B.size)
        links = {}
        for alpha, triplets in B.entries.items():
            for i, j, value in triplets:
                links.setdefault((i, j), []).append((index[alpha], value))
        for p in range(B.size):
            for q in range(p, B.size):
                entries = [(block, p, q, 1.0 if p == q else 0.5)]
                entries.extend((y, pos, pos, -value) for pos, value in links.get((p, q), ()))
                program.add_constraint(entries, 0.0)
    return MomentRelaxation(program=program, index=index, n=n, order=d)


def build_dual_sos(P, d):
    """Order-d SOS strengthening: max lambda s.t. f - lambda = sum_j <X_j, B_{g_j, .}>."""
    _check_order(P, d)
    n = P.n
    basis = canonical_basis(n, 2 * d)
    program = ConicProgram(name=f'sos strengthening d={d}')
    lam = program.add_block(FREE, 1)
    program.add_objective(lam, 0, 0, -1.0)
    grams = []
    matrices = []
    for g, dj in _constraint_list(P):
        B = coefficient_matrices(g, d - dj)
        block = program.add_block(PSD, B.size)
        grams.append((g, block, d - dj))
        matrices.append((block, B))
    for position, alpha in enumerate(basis):
        entries = [(lam, 0, 0, 1.0)] if position == 0 else []
        for block, B in matrices:
            entries.extend((block, i, j, value) for i, j, value in B.entries.get(alpha, ()))
        program.add_constraint(entries, P.f.coefficient(alpha))
    return SosRelaxation(program=program, grams=grams, n=n, order=d)


def _gram_factors(X, n, order):
    """Square factors sqrt(l_k) v_k^T v_order(x) of a Gram matrix."""
    values, vectors = la.eigh(0.5 * (X + X.T))
    top = values.max() if values.size else 0.0
    if top <= 0:
        return []
    basis = canonical_basis(n, order)
    return [Polynomial.from_vector(n, np.sqrt(value) * vectors[:, k], basis)
            for k, value in enumerate(values) if value > GRAM_CUTOFF * top]


def _membership_program(f, d):
    """max t s.t. f - t * theta = <X, v_d v_d^T>, X PSD, with theta = sum_b x^(2b).

    theta has the identity as Gram matrix, so the program is strictly feasible
    and its optimum t* is the largest multiple of theta that can be removed from f.
    """
    n = f.n
    B = coefficient_matrices(Polynomial.constant(n, 1.0), d)
    diagonal = {tuple(2 * e for e in beta) for beta in canonical_basis(n, d)}
    program = ConicProgram(name='sos membership')
    t = program.add_block(FREE, 1)
    block = program.add_block(PSD, B.size)
    program.add_objective(t, 0, 0, -1.0)
    for alpha in canonical_basis(n, 2 * d):
        entries = [(block, i, j, v) for i, j, v in B.entries.get(alpha, ())]
        if alpha in diagonal:
            entries.append((t, 0, 0, 1.0))
        program.add_constraint(entries, f.coefficient(alpha))
    return program


def _separating_functional(f, d, solution, limit):
    """Evidence that f is not SOS: L with L(f) < 0, M_d(L) PSD and trace M_d(L) = 1."""
    y = PseudoMomentSequence(f.n, d, -np.asarray(solution.dual))
    matrix = moment_matrix(y, d)
    smallest = float(la.eigvalsh(matrix, subset_by_index=[0, 0])[0])
    value = riesz(y, f)
    evidence = {
        'ray': y.to_records(),
        'value': value,
        'min_eigenvalue': smallest,
        'trace': float(np.trace(matrix)),
    }
    if value >= -limit or smallest < -limit:
        return None, evidence
    return evidence, evidence


def sos_membership(f, options=None):
    """Decide whether f is a sum of squares; returns SosCertificate or NotCertified.

    A negative verdict carries a separating functional as evidence. A solver
    breakdown is reported with the solver's status instead.
    """
    options = options or SolverOptions()
    n = f.n
    one = Polynomial.constant(n, 1.0)
    if f.degree % 2:
        return NotCertified(reason=f'odd degree {f.degree}', status=NotCertified.STATUS_STRUCTURAL)
    if f.degree == 0:
        c = f.coefficient((0,) * n)
        if c < 0:
            return NotCertified(reason='negative constant', status=NotCertified.STATUS_STRUCTURAL)
        return SosCertificate(bound=0.0, sigmas=[(one, [Polynomial.constant(n, np.sqrt(c))])])

    d = f.degree // 2
    solution = solve(_membership_program(f, d), options)
    if not solution.is_optimal:
        return NotCertified(reason=f'numerical breakdown: Gram program ended with status {solution.status}',
                            status=solution.status, evidence={'message': solution.message})

    margin = float(solution.primal[0][0])
    limit = CERTIFICATE_TOL * (1.0 + f.coefficient_norm())
    if margin < -limit:
        ray, evidence = _separating_functional(f, d, solution, limit)
        if ray is None:
            return NotCertified(reason='numerical breakdown: separating functional failed its check',
                                status=ConicSolution.STATUS_NUMERICAL_FAILURE, evidence=evidence)
        logger.info('not SOS: separating functional with L(f)=%.3e', ray['value'])
        return NotCertified(reason=f'separated from the SOS cone, L(f) = {ray["value"]:.6g}',
                            status=NotCertified.STATUS_SEPARATED, evidence=ray)

    gram = solution.primal[1] + margin * np.eye(solution.primal[1].shape[0])
    certificate = SosCertificate(bound=0.0, sigmas=[(one, _gram_factors(gram, n, d))])
    certificate.residual_norm = certificate.residual(f).coefficient_norm()
    if certificate.residual_norm > limit:
        return NotCertified(reason=f'residual {certificate.residual_norm:.3e} too large',
                            status=NotCertified.STATUS_RESIDUAL,
                            evidence={'residual_norm': certificate.residual_norm, 'margin': margin})
    return certificate


def recover_sos_certificate(P, d, solution, relaxation=None):
    """Explicit certificate f - lambda = sum_j sigma_j g_j from an optimal SOS solve."""
    relaxation = relaxation or build_dual_sos(P, d)
    sigmas = [(g, _gram_factors(solution.primal[block], P.n, order))
              for g, block, order in relaxation.grams]
    certificate = SosCertificate(bound=relaxation.bound(solution), sigmas=sigmas)
    certificate.residual_norm = certificate.residual(P.f).coefficient_norm()
    limit = CERTIFICATE_TOL * (1.0 + P.f.coefficient_norm())
    if certificate.residual_norm > limit:
        raise CertificateRejected(
            f'certificate residual {certificate.residual_norm:.3e} exceeds {limit:.3e}',
            residual_norm=certificate.residual_norm)
    return certificate


def _scale_generators(P, scaling):
    generators = list(P.constraints)
    if scaling is None:
        return generators, None
    scaling = list(scaling)
    if scaling and isinstance(scaling[0], (tuple, list)):
        box = [(float(lo), float(hi)) for lo, hi in scaling]
        axes = [np.linspace(lo, hi, 11) for lo, hi in box]
        grid = np.array(list(itertools.product(*axes)))
        divisors = []
        for g in generators:
            top = float(np.max(g(grid)))
            if top <= 0:
                raise SetError(f'constraint {g!r} is not positive anywhere on the box')
            divisors.append(top)
        return [g * (1.0 / s) for g, s in zip(generators, divisors)], box
    if len(scaling) != len(generators) or any(s <= 0 for s in scaling):
        raise SetError(f'scaling needs one positive divisor per constraint, got {scaling}')
    return [g * (1.0 / s) for g, s in zip(generators, scaling)], None


def _sample_points(P, box, seed=0, count=2000):
    rng = np.random.default_rng(seed)
    if box is not None:
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
    else:
        radius = np.sqrt(P.S.ball_radius_sq) if P.S.ball_radius_sq else 1.0
        lo, hi = -radius * np.ones(P.n), radius * np.ones(P.n)
    points = lo + (hi - lo) * rng.random((count, P.n))
    return points[P.S.contains(points, tol=0.0)]


def _exponent_vectors(slots, k):
    """All non-negative integer vectors of the given length with sum <= k, in grlex order."""
    if slots == 0:
        return [()]
    return canonical_basis(slots, k)


def build_krivine_lp(P, k, scaling=None):
    """Degree-k Krivine LP: max lambda s.t. f - lambda = sum c_ab prod g^a (1-g)^b, c >= 0.

    scaling is a list of positive divisors, one per constraint, or a box
    [(lo, hi), ...] from which the divisors are computed so that g_j <= 1.
    """
    if k < 1:
        raise OrderError(f'Krivine degree must be at least 1, got {k}')
    generators, box = _scale_generators(P, scaling)
    m = len(generators)
    relaxation = KrivineRelaxation(program=None, k=k, products=[], generators=generators)

    samples = _sample_points(P, box)
    for point in samples:
        values = [g(point) for g in generators]
        if any(v < -1e-9 or v > 1 + 1e-9 for v in values):
            relaxation.violations.append(tuple(float(c) for c in point))
    if relaxation.violations:
        logger.warning('Krivine scaling violated at %d of %d sampled points',
                       len(relaxation.violations), len(samples))

    one = Polynomial.constant(P.n, 1.0)
    powers = {}

    def power(poly, key, e):
        if (key, e) not in powers:
            powers[(key, e)] = poly ** e
        return powers[(key, e)]

    columns = []
    for exponents in _exponent_vectors(2 * m, k):
        product = one
        for j, g in enumerate(generators):
            product = product * power(g, ('g', j), exponents[j]) * power(1.0 - g, ('h', j), exponents[m + j])
        relaxation.products.append(exponents)
        columns.append(product)

    top = max(p.degree for p in columns)
    if P.f.degree > top:
        logger.info('Krivine degree %d cannot represent a degree-%d objective', k, P.f.degree)
        return relaxation

    basis = canonical_basis(P.n, top)
    program = ConicProgram(name=f'krivine lp k={k}')
    lam = program.add_block(FREE, 1)
    coeffs = program.add_block(NONNEG, len(columns))
    program.add_objective(lam, 0, 0, -1.0)
    for position, alpha in enumerate(basis):
        entries = [(lam, 0, 0, 1.0)] if position == 0 else []
        entries.extend((coeffs, c, c, p.coefficient(alpha)) for c, p in enumerate(columns))
        program.add_constraint(entries, P.f.coefficient(alpha))
    relaxation.program = program
    return relaxation


def solve_krivine(P, k, scaling=None, options=None):
    """Solve the Krivine LP; unrepresentable or infeasible levels give -inf."""
    relaxation = build_krivine_lp(P, k, scaling)
    if relaxation.structurally_unbounded:
        return KrivineResult(k=k, bound=-np.inf, status='Structural', violations=relaxation.violations)
    solution = solve(relaxation.program, options or SolverOptions())
    if solution.is_optimal:
        bound = float(solution.primal[0][0])
    elif solution.status == ConicSolution.STATUS_PRIMAL_INFEASIBLE:
        bound = -np.inf
    else:
        bound = np.nan
    return KrivineResult(k=k, bound=bound, status=solution.status, violations=relaxation.violations)


def _primal_bound(solution):
    if solution.is_optimal:
        return solution.primal_objective
    if solution.status == ConicSolution.STATUS_DUAL_INFEASIBLE:
        return -np.inf
    if solution.status == ConicSolution.STATUS_PRIMAL_INFEASIBLE:
        return np.inf
    return np.nan


def _dual_bound(solution):
    if solution.is_optimal:
        return -solution.primal_objective
    if solution.status == ConicSolution.STATUS_PRIMAL_INFEASIBLE:
        return -np.inf
    if solution.status == ConicSolution.STATUS_DUAL_INFEASIBLE:
        return np.inf
    return np.nan


def solve_level(P, d, options):
    """Solve both sides of one level and run the rank test and extraction."""
    primal = build_primal_relaxation(P, d)
    sol_p = solve(primal.program, options.solver)
    sos = build_dual_sos(P, d)
    sol_d = solve(sos.program, options.solver)
    level = HierarchyLevel(d=d, primal_bound=_primal_bound(sol_p), dual_bound=_dual_bound(sol_d),
                           primal_status=sol_p.status, dual_status=sol_d.status)
    if sol_p.status == ConicSolution.STATUS_DUAL_INFEASIBLE:
        level.notes.append('moment relaxation unbounded; consider adding a ball constraint')

    if sol_d.is_optimal and options.certificates:
        try:
            level.certificate = recover_sos_certificate(P, d, sol_d, sos)
        except CertificateRejected as exc:
            level.notes.append(exc.message)

    s = P.rank_offset
    if sol_p.is_optimal and d - s >= 0:
        y = primal.moments(sol_p)
        level.rank_report = rank_test(y, d, s, options.rank_tol)
        if level.rank_report.passed and options.extract:
            try:
                level.measure = extract_atoms(y, d, level.rank_report.rank_full,
                                              rank_tol=options.rank_tol, seed=options.seed, S=P.S)
            except ExtractionFailed as exc:
                level.notes.append(exc.message)
    logger.info('level d=%d: rho=%.9g rho*=%.9g', d, level.primal_bound, level.dual_bound)
    return level


def _check_monotone(levels):
    for previous, current in zip(levels, levels[1:]):
        for name in ('primal_bound', 'dual_bound'):
            a, b = getattr(previous, name), getattr(current, name)
            if np.isfinite(a) and np.isfinite(b) and a > b + MONOTONE_SLACK:
                logger.warning('%s decreased from d=%d to d=%d by %.3e',
                               name, previous.d, current.d, a - b)


def solve_hierarchy(P, d_max, options=None):
    """Solve levels d_min..d_max, stopping early once atoms are extracted."""
    options = options or HierarchyOptions()
    d_min = max(P.min_order, options.d_min or 0)
    if d_max < d_min:
        raise OrderError(f'd_max={d_max} is below the minimal order {d_min}')
    orders = list(range(d_min, d_max + 1))
    batch = max(1, options.threads)
    levels = []
    with ThreadPoolExecutor(max_workers=batch) as pool:
        for start in range(0, len(orders), batch):
            # levels of one batch run concurrently; results keep the order of d
            for level in pool.map(lambda d: solve_level(P, d, options), orders[start:start + batch]):
                levels.append(level)
                if level.converged:
                    break
            if levels[-1].converged:
                logger.info('finite convergence detected at d=%d', levels[-1].d)
                break
    _check_monotone(levels)
    return levels
