"""
Application Service - Probability bounds, semialgebraic volume and super-resolution

Each driver builds a GpmProblem, compiles it with the GPM service and reads
bounds, pseudo-moments and dual polynomials back from the solution.
"""
import logging

import numpy as np

from momentsos.errors import ExtractionFailed, MomentError, OrderError
from momentsos.models.moments import AtomicMeasure
from momentsos.models.polynomial import Polynomial, box_constraints, canonical_basis
from momentsos.models.problems import (
    BoundEntry,
    BoundSequence,
    GpmMeasure,
    GpmProblem,
    MomentConstraint,
    SuperResolutionResult,
)
from momentsos.services.conic_solver import SolverOptions, solve
from momentsos.services.extraction_service import extract_atoms, rank_test
from momentsos.services.gpm_service import (
    STATUS_OPTIMAL,
    build_gpm_relaxation,
    moment_polynomial,
    stokes_constraints,
)
from momentsos.services.moment_service import KIND_UNIFORM_BOX, measure_moments

logger = logging.getLogger(__name__)

EMPTY_MASS_TOL = 1e-6
REPRODUCTION_TOL = 1e-5


def _moment_equalities(moments, n, measures_signs):
    """One equality sum_i sign_i L_{y_i}(x^alpha) = b_alpha per known moment, with keys."""
    equalities = []
    keys = {}
    for alpha, value in sorted(moments.items()):
        if len(alpha) != n:
            raise MomentError(f'moment {alpha} does not have {n} exponents')
        monomial = Polynomial.monomial(alpha)
        keys[len(equalities)] = tuple(alpha)
        equalities.append(MomentConstraint(
            tuple((i, monomial * sign) for i, sign in measures_signs), value))
    return equalities, keys


def _rank_offset(S):
    return max([1] + [g.half_degree() for g in S.polynomials])


def _extract(y, d, s, seed, S):
    """Atoms of y when its rank test passes; (measure or None, report)."""
    if d - s < 0:
        return None, None
    report = rank_test(y, d, s)
    if not report.passed:
        return None, report
    try:
        return extract_atoms(y, d, report.rank_full, seed=seed, S=S), report
    except ExtractionFailed as exc:
        logger.info('extraction at d=%d failed: %s', d, exc)
        return None, report


def probability_problem(moments, omega1, omega2, direction=BoundSequence.DIRECTION_UPPER):
    """Two-measure GPM: extremal mass of phi_2 on omega2 with phi_1 + phi_2 matching moments."""
    n = omega1.n
    zero = (0,) * n
    if zero not in moments or abs(moments[zero] - 1.0) > 1e-12:
        raise MomentError('probability bounds need the moment b_0 = 1')
    equalities, keys = _moment_equalities(moments, n, [(0, 1.0), (1, 1.0)])
    sense = GpmProblem.SENSE_MAX if direction == BoundSequence.DIRECTION_UPPER else GpmProblem.SENSE_MIN
    problem = GpmProblem(
        measures=(GpmMeasure(omega1, Polynomial.zero(n)),
                  GpmMeasure(omega2, Polynomial.constant(n, 1.0))),
        equalities=tuple(equalities),
        sense=sense,
    )
    return problem, keys


def probability_bound(moments, omega1, omega2, d, direction=BoundSequence.DIRECTION_UPPER,
                      options=None, extract=True, seed=0):
    """Best bound on Prob(Z in omega2) over distributions on omega1 with the given moments."""
    problem, keys = probability_problem(moments, omega1, omega2, direction)
    relaxation = build_gpm_relaxation(problem, d)
    solution = solve(relaxation.program, options or SolverOptions())
    entry = BoundEntry(d=d, bound=relaxation.value(solution), status=relaxation.status(solution))
    if entry.status == STATUS_OPTIMAL:
        entry.dual_polynomial = moment_polynomial(relaxation, solution, keys)
        y2 = relaxation.moments(solution, 1)
        entry.moments = y2.to_records()
        if extract and y2.mass > EMPTY_MASS_TOL:
            entry.measure, _ = _extract(y2, d, _rank_offset(omega2), seed, omega2)
    logger.info('probability bound d=%d (%s): %.9g [%s]', d, direction, entry.bound, entry.status)
    return entry


def probability_bounds(moments, omega1, omega2, orders, direction=BoundSequence.DIRECTION_UPPER,
                       options=None):
    sequence = BoundSequence(direction=direction)
    for d in orders:
        sequence.entries.append(probability_bound(moments, omega1, omega2, d, direction,
                                                  options, extract=False))
    _warn_if_not_monotone(sequence)
    return sequence


def volume_problem(omega2, box, d, stokes=False):
    """Two-measure GPM for the Lebesgue volume of omega2 inside a box, at order d."""
    n = omega2.n
    if len(box) != n:
        raise MomentError(f'box has {len(box)} sides for a set in {n} variables')
    lebesgue = measure_moments(KIND_UNIFORM_BOX, box, n, 2 * d)
    moments = {alpha: value for alpha, value in zip(canonical_basis(n, 2 * d), lebesgue.values)}
    equalities, keys = _moment_equalities(moments, n, [(0, 1.0), (1, 1.0)])
    if stokes and omega2.polynomials:
        for p in stokes_constraints(omega2.polynomials[0], d):
            equalities.append(MomentConstraint(((1, p),), 0.0))
    problem = GpmProblem(
        measures=(GpmMeasure(box_constraints(box), Polynomial.zero(n)),
                  GpmMeasure(omega2, Polynomial.constant(n, 1.0))),
        equalities=tuple(equalities),
        sense=GpmProblem.SENSE_MAX,
    )
    return problem, keys


def volume(omega2, box, d, stokes=False, options=None):
    """Upper bound on the Lebesgue volume of omega2 (a subset of the box) at order d."""
    problem, keys = volume_problem(omega2, box, d, stokes)
    relaxation = build_gpm_relaxation(problem, d)
    solution = solve(relaxation.program, options or SolverOptions())
    entry = BoundEntry(d=d, bound=relaxation.value(solution), status=relaxation.status(solution))
    if entry.status == STATUS_OPTIMAL:
        entry.dual_polynomial = moment_polynomial(relaxation, solution, keys)
    logger.info('volume bound d=%d stokes=%s: %.9g [%s]', d, stokes, entry.bound, entry.status)
    return entry


def volumes(omega2, box, orders, stokes=False, options=None):
    sequence = BoundSequence(direction=BoundSequence.DIRECTION_UPPER)
    for d in orders:
        sequence.entries.append(volume(omega2, box, d, stokes, options))
    _warn_if_not_monotone(sequence)
    return sequence


def super_resolution_problem(moments, t, omega):
    """Minimum total variation phi+ - phi- on omega reproducing the moments up to degree t."""
    n = omega.n
    missing = [alpha for alpha in canonical_basis(n, t) if alpha not in moments]
    if missing:
        raise MomentError(f'super-resolution needs all moments up to degree {t}; missing {missing[:5]}')
    known = {alpha: moments[alpha] for alpha in canonical_basis(n, t)}
    equalities, keys = _moment_equalities(known, n, [(0, 1.0), (1, -1.0)])
    one = Polynomial.constant(n, 1.0)
    problem = GpmProblem(
        measures=(GpmMeasure(omega, one), GpmMeasure(omega, one)),
        equalities=tuple(equalities),
        sense=GpmProblem.SENSE_MIN,
    )
    return problem, keys


def super_resolution(moments, t, omega, d, options=None, seed=0):
    """TV-minimal signed measure with the given moments; atoms when both rank tests pass."""
    if d < (t + 1) // 2:
        raise OrderError(f'super-resolution with moments up to degree {t} needs d >= {(t + 1) // 2}')
    problem, keys = super_resolution_problem(moments, t, omega)
    relaxation = build_gpm_relaxation(problem, d)
    solution = solve(relaxation.program, options or SolverOptions())
    result = SuperResolutionResult(d=d, tv_bound=relaxation.value(solution),
                                   status=relaxation.status(solution))
    if result.status != STATUS_OPTIMAL:
        result.message = solution.message
        return result
    result.dual_polynomial = moment_polynomial(relaxation, solution, keys)

    parts = []
    reports = []
    for i in (0, 1):
        y = relaxation.moments(solution, i)
        if y.mass <= EMPTY_MASS_TOL * max(result.tv_bound, 1.0):
            parts.append(AtomicMeasure.empty())
            continue
        measure, report = _extract(y, d, 1, seed, omega)
        reports.append(report)
        parts.append(measure)
    result.rank_reports = tuple(r for r in reports if r is not None)
    if any(part is None for part in parts):
        result.message = f'rank test or extraction failed at d={d}; try d={d + 1}'
        return result

    signed = parts[0].combine(parts[1], sign=-1.0)
    worst = max(abs(signed.moment(alpha) - value) for alpha, value in moments.items()
                if sum(alpha) <= t)
    if worst > REPRODUCTION_TOL * (1.0 + max(abs(v) for v in moments.values())):
        result.message = f'recovered measure reproduces the moments only to {worst:.3e}'
        return result
    result.measure = signed
    return result


def _warn_if_not_monotone(sequence):
    violations = sequence.violations()
    if violations:
        logger.warning('%s bound sequence is not monotone at orders %s',
                       sequence.direction, violations)
