"""
GPM Service - Relaxations of the generalized problem of moments

Level d is compiled in SOS form. There is one equality row per moment y_{i,alpha}
(|alpha| <= 2d) of every measure i, so the conic dual multipliers are the
pseudo-moments themselves:

    PSD blocks       A = -B_{g,alpha}, C = 0      -> S = M(g y_i)
    equality k       free column, entries (h_ik)_alpha, cost c_k
    inequality j     non-negative column, entries -(f_ij)_alpha, cost -b_j
    row (i, alpha)   rhs -(f_i)_alpha for min, +(f_i)_alpha for max

The free-column values are the coefficients of the dual polynomial.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from momentsos.errors import GpmError, OrderError
from momentsos.models.conic import FREE, NONNEG, PSD, ConicProgram, ConicSolution
from momentsos.models.moments import PseudoMomentSequence
from momentsos.models.polynomial import Polynomial, canonical_basis
from momentsos.services.moment_service import coefficient_matrices

logger = logging.getLogger(__name__)

STATUS_OPTIMAL = ConicSolution.STATUS_OPTIMAL
STATUS_INFEASIBLE = 'Infeasible'
STATUS_UNBOUNDED = 'Unbounded'


@dataclass
class GpmRelaxation:
    """Compiled level of a GPM with the maps back to measures and constraints."""

    program: ConicProgram
    problem: object
    order: int
    rows: List[Dict[tuple, int]]
    equalities: List[int]
    inequalities: List[int]
    equality_block: Optional[int] = None
    inequality_block: Optional[int] = None

    def status(self, solution):
        """Status of the moment problem: conic infeasibility statuses swap sides."""
        if solution.status == ConicSolution.STATUS_DUAL_INFEASIBLE:
            return STATUS_INFEASIBLE
        if solution.status == ConicSolution.STATUS_PRIMAL_INFEASIBLE:
            return STATUS_UNBOUNDED
        return solution.status

    def value(self, solution):
        """Bound rho_d in the problem's own sense."""
        status = self.status(solution)
        maximize = self.problem.sense == self.problem.SENSE_MAX
        if status == STATUS_OPTIMAL:
            return solution.primal_objective if maximize else -solution.primal_objective
        if status == STATUS_INFEASIBLE:
            return -np.inf if maximize else np.inf
        if status == STATUS_UNBOUNDED:
            return np.inf if maximize else -np.inf
        return np.nan

    def moments(self, solution, i):
        """Pseudo-moments of measure i."""
        n = self.problem.measures[i].S.n
        positions = list(self.rows[i].values())
        return PseudoMomentSequence(n, self.order, np.asarray(solution.dual)[positions])

    def equality_multipliers(self, solution):
        """Multiplier of each kept equality, keyed by its position in the problem."""
        if self.equality_block is None:
            return {}
        values = solution.primal[self.equality_block]
        return {k: float(v) for k, v in zip(self.equalities, values)}


def _constant_term(p):
    return p.coefficient((0,) * p.n)


def check_mass_bounded(G, equalities, inequalities):
    """Reject problems in which some measure's mass is not bounded by a constraint."""
    unbounded = []
    for i, measure in enumerate(G.measures):
        bounded = False
        for constraint in equalities:
            constants = [_constant_term(p) for _, p in constraint.terms]
            mine = constraint.polynomial(i)
            if mine is not None and _constant_term(mine) != 0:
                if all(c >= 0 for c in constants) or all(c <= 0 for c in constants):
                    bounded = True
        for constraint in inequalities:
            constants = [_constant_term(p) for _, p in constraint.terms]
            mine = constraint.polynomial(i)
            if mine is not None and _constant_term(mine) < 0 and all(c <= 0 for c in constants):
                bounded = True
        if G.sense == G.SENSE_MIN and _constant_term(measure.cost) > 0:
            bounded = True
        if not bounded:
            unbounded.append(i)
    if unbounded:
        raise GpmError(f'mass of measures {unbounded} is not bounded by any constraint')


def build_gpm_relaxation(G, d):
    """Order-d relaxation of a GPM; constraints of degree above 2d are left out."""
    if d < G.min_order:
        raise OrderError(f'order {d} is below the minimal order {G.min_order} of the problem')
    equalities = [k for k, c in enumerate(G.equalities) if c.degree <= 2 * d]
    inequalities = [j for j, c in enumerate(G.inequalities) if c.degree <= 2 * d]
    dropped = len(G.equalities) + len(G.inequalities) - len(equalities) - len(inequalities)
    if dropped:
        logger.debug('level %d leaves out %d constraints above degree %d', d, dropped, 2 * d)
    check_mass_bounded(G, [G.equalities[k] for k in equalities],
                       [G.inequalities[j] for j in inequalities])

    program = ConicProgram(name=f'gpm d={d}')
    sign = 1.0 if G.sense == G.SENSE_MAX else -1.0
    rows = []
    pending = []
    rhs = []
    for measure in G.measures:
        n = measure.S.n
        index = {}
        for alpha in canonical_basis(n, 2 * d):
            index[alpha] = len(pending)
            pending.append([])
            rhs.append(sign * measure.cost.coefficient(alpha))
        rows.append(index)
        generators = [(Polynomial.constant(n, 1.0), 0)] + [
            (g, g.half_degree()) for g in measure.S.polynomials]
        for g, dj in generators:
            B = coefficient_matrices(g, d - dj)
            block = program.add_block(PSD, B.size)
            for alpha, triplets in B.entries.items():
                pending[index[alpha]].extend((block, p, q, -value) for p, q, value in triplets)

    relaxation = GpmRelaxation(program=program, problem=G, order=d, rows=rows,
                               equalities=equalities, inequalities=inequalities)
    if equalities:
        block = program.add_block(FREE, len(equalities))
        relaxation.equality_block = block
        for column, k in enumerate(equalities):
            constraint = G.equalities[k]
            program.add_objective(block, column, column, constraint.rhs)
            _add_column(pending, rows, block, column, constraint, 1.0)
    if inequalities:
        block = program.add_block(NONNEG, len(inequalities))
        relaxation.inequality_block = block
        for column, j in enumerate(inequalities):
            constraint = G.inequalities[j]
            program.add_objective(block, column, column, -constraint.rhs)
            _add_column(pending, rows, block, column, constraint, -1.0)
    for entries, value in zip(pending, rhs):
        program.add_constraint(entries, value)
    return relaxation


def _add_column(pending, rows, block, column, constraint, sign):
    for i, p in constraint.terms:
        for alpha, c in p.terms():
            pending[rows[i][alpha]].append((block, column, column, sign * c))


def stokes_constraints(g, d):
    """Polynomials p with L_y(p) = 0 for measures on {g >= 0} when g vanishes on the boundary.

    One derivative d/dx_i (g x^alpha) per variable i and |alpha| <= 2d - deg g + 1, so every
    functional has degree at most 2d.
    """
    top = 2 * d - g.degree + 1
    if top < 0:
        return []
    functionals = []
    for alpha in canonical_basis(g.n, top):
        product = g * Polynomial.monomial(alpha)
        for i in range(g.n):
            functionals.append(product.derivative(i))
    return functionals


def moment_polynomial(relaxation, solution, keys, measure=0):
    """Dual polynomial sum_k z_k x^{alpha_k}; keys maps an equality position to alpha_k."""
    n = relaxation.problem.measures[measure].S.n
    terms = {}
    for k, value in relaxation.equality_multipliers(solution).items():
        alpha = keys.get(k)
        if alpha is not None:
            terms[alpha] = terms.get(alpha, 0.0) + value
    return Polynomial(n, terms)
