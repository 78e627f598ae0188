"""
Problem Models - Optimization problems, certificates and per-level results
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from momentsos.errors import DimensionMismatchError, GpmError
from momentsos.models.moments import AtomicMeasure
from momentsos.models.polynomial import Polynomial, SemialgebraicSet
from momentsos.utils.serialization import json_float, to_jsonable


@dataclass(frozen=True)
class PopProblem:
    """Polynomial optimization problem: minimize f over a semialgebraic set."""

    f: Polynomial
    S: SemialgebraicSet

    def __post_init__(self):
        if self.f.n != self.S.n:
            raise DimensionMismatchError(
                f'objective in {self.f.n} variables over a set in {self.S.n} variables')

    def __repr__(self):
        return f'<PopProblem n={self.n} deg={self.f.degree} m={len(self.constraints)}>'

    @property
    def n(self):
        return self.S.n

    @property
    def constraints(self):
        return self.S.polynomials

    @property
    def min_order(self):
        """Smallest relaxation order, ceil(max(deg f, deg g_j) / 2)."""
        degree = max([self.f.degree] + [g.degree for g in self.constraints])
        return (degree + 1) // 2

    @property
    def rank_offset(self):
        """Offset s of the flat-extension test; 1 when there are no constraints."""
        return max([1] + [g.half_degree() for g in self.constraints])

    def to_dict(self):
        return {
            'n': self.n,
            'objective': self.f.to_records(),
            'set': self.S.to_dict(),
            'min_order': self.min_order,
        }


@dataclass
class SosCertificate:
    """f - bound = sum_j sigma_j g_j with every sigma_j an explicit sum of squares."""

    bound: float
    sigmas: List[Tuple[Polynomial, List[Polynomial]]]
    residual_norm: float = 0.0

    def sigma(self, j):
        """The SOS multiplier of the j-th constraint (j = 0 is the constant 1)."""
        g, factors = self.sigmas[j]
        total = Polynomial.zero(g.n)
        for factor in factors:
            total = total + factor * factor
        return total

    def residual(self, f):
        """r = f - bound - sum_j sigma_j g_j."""
        r = f - self.bound
        for j, (g, _) in enumerate(self.sigmas):
            r = r - self.sigma(j) * g
        return r

    def to_dict(self):
        return {
            'bound': json_float(self.bound),
            'residual_norm': json_float(self.residual_norm),
            'sigmas': [
                {'g': g.to_records(), 'factors': [q.to_records() for q in factors]}
                for g, factors in self.sigmas
            ],
        }


@dataclass
class NotCertified:
    """Outcome of an SOS test that produced no certificate."""

    STATUS_STRUCTURAL = 'Structural'
    STATUS_SEPARATED = 'Separated'
    STATUS_RESIDUAL = 'ResidualTooLarge'

    reason: str
    status: Optional[str] = None
    evidence: Optional[dict] = None

    @property
    def separated(self):
        """True when the evidence is a verified separating functional."""
        return self.status == self.STATUS_SEPARATED

    def to_dict(self):
        return {'certified': False, 'reason': self.reason, 'status': self.status,
                'evidence': to_jsonable(self.evidence)}


@dataclass
class RankReport:
    """Flat-extension rank test of a moment matrix against its leading submatrix."""

    d: int
    s: int
    rank_full: int
    rank_sub: int
    singular_values_full: np.ndarray
    singular_values_sub: np.ndarray

    @property
    def passed(self):
        return self.rank_full == self.rank_sub

    def to_dict(self):
        return {
            'd': self.d,
            's': self.s,
            'rank_full': self.rank_full,
            'rank_sub': self.rank_sub,
            'passed': self.passed,
            'singular_values_full': [json_float(v) for v in self.singular_values_full],
            'singular_values_sub': [json_float(v) for v in self.singular_values_sub],
        }


@dataclass
class HierarchyLevel:
    """Bounds and diagnostics of one order of the moment-SOS hierarchy."""

    d: int
    primal_bound: float
    dual_bound: float
    primal_status: str
    dual_status: str
    rank_report: Optional[RankReport] = None
    measure: Optional[AtomicMeasure] = None
    certificate: Optional[SosCertificate] = None
    notes: List[str] = field(default_factory=list)

    @property
    def converged(self):
        return self.measure is not None

    def to_dict(self):
        return {
            'd': self.d,
            'primal_bound': json_float(self.primal_bound),
            'dual_bound': json_float(self.dual_bound),
            'primal_status': self.primal_status,
            'dual_status': self.dual_status,
            'rank_report': self.rank_report.to_dict() if self.rank_report else None,
            'atoms': self.measure.to_dict() if self.measure else None,
            'certificate': self.certificate.to_dict() if self.certificate else None,
            'notes': list(self.notes),
        }


@dataclass(frozen=True)
class GpmMeasure:
    """One unknown measure: its support set and its cost polynomial."""

    S: SemialgebraicSet
    cost: Polynomial

    def __post_init__(self):
        if self.cost.n != self.S.n:
            raise DimensionMismatchError('measure cost and support differ in variable count')


@dataclass(frozen=True)
class MomentConstraint:
    """sum_i L_{y_i}(p_i) (= or >=) rhs, with terms (measure index, p_i)."""

    terms: Tuple[Tuple[int, Polynomial], ...]
    rhs: float

    def __post_init__(self):
        object.__setattr__(self, 'terms', tuple((int(i), p) for i, p in self.terms))
        object.__setattr__(self, 'rhs', float(self.rhs))

    @property
    def degree(self):
        return max((p.degree for _, p in self.terms), default=0)

    def polynomial(self, i):
        """Sum of this constraint's polynomials acting on measure i (None if absent)."""
        found = [p for k, p in self.terms if k == i]
        if not found:
            return None
        total = found[0]
        for p in found[1:]:
            total = total + p
        return total


@dataclass(frozen=True)
class GpmProblem:
    """Generalized problem of moments over several measures."""

    SENSE_MIN = 'min'
    SENSE_MAX = 'max'

    VALID_SENSES = [SENSE_MIN, SENSE_MAX]

    measures: Tuple[GpmMeasure, ...]
    equalities: Tuple[MomentConstraint, ...] = ()
    inequalities: Tuple[MomentConstraint, ...] = ()
    sense: str = SENSE_MIN

    def __post_init__(self):
        object.__setattr__(self, 'measures', tuple(self.measures))
        object.__setattr__(self, 'equalities', tuple(self.equalities))
        object.__setattr__(self, 'inequalities', tuple(self.inequalities))
        if self.sense not in self.VALID_SENSES:
            raise GpmError(f'sense must be one of {self.VALID_SENSES}, got {self.sense!r}')
        if not self.measures:
            raise GpmError('a moment problem needs at least one measure')
        for constraint in self.equalities + self.inequalities:
            for i, p in constraint.terms:
                if not 0 <= i < len(self.measures):
                    raise GpmError(f'constraint references measure {i} of {len(self.measures)}')
                if p.n != self.measures[i].S.n:
                    raise DimensionMismatchError(
                        f'constraint polynomial in {p.n} variables for measure {i} '
                        f'in {self.measures[i].S.n} variables')

    @property
    def min_order(self):
        degree = 0
        for measure in self.measures:
            degree = max([degree, measure.cost.degree] + [g.degree for g in measure.S.polynomials])
        return max(1, (degree + 1) // 2)


@dataclass
class BoundEntry:
    """One level of a bound sequence."""

    d: int
    bound: float
    status: str
    moments: Optional[list] = None
    dual_polynomial: Optional[Polynomial] = None
    measure: Optional[AtomicMeasure] = None

    def to_dict(self):
        return {
            'd': self.d,
            'bound': json_float(self.bound),
            'status': self.status,
            'dual_polynomial': self.dual_polynomial.to_records() if self.dual_polynomial else None,
            'atoms': self.measure.to_dict() if self.measure else None,
        }


@dataclass
class BoundSequence:
    """Bounds indexed by relaxation order, upper (non-increasing) or lower (non-decreasing)."""

    DIRECTION_UPPER = 'upper'
    DIRECTION_LOWER = 'lower'

    VALID_DIRECTIONS = [DIRECTION_UPPER, DIRECTION_LOWER]

    direction: str
    entries: List[BoundEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.direction not in self.VALID_DIRECTIONS:
            raise GpmError(f'direction must be one of {self.VALID_DIRECTIONS}, got {self.direction!r}')

    @property
    def bounds(self):
        return [entry.bound for entry in self.entries]

    @property
    def last(self):
        return self.entries[-1] if self.entries else None

    def violations(self, slack=1e-7):
        """Orders at which the sequence moves the wrong way by more than slack."""
        found = []
        finite = [e for e in self.entries if np.isfinite(e.bound)]
        for previous, current in zip(finite, finite[1:]):
            step = current.bound - previous.bound
            if self.direction == self.DIRECTION_UPPER and step > slack:
                found.append(current.d)
            if self.direction == self.DIRECTION_LOWER and step < -slack:
                found.append(current.d)
        return found

    def is_monotone(self, slack=1e-7):
        return not self.violations(slack)

    def to_dict(self):
        return {'direction': self.direction, 'entries': [e.to_dict() for e in self.entries]}


@dataclass
class SuperResolutionResult:
    """Total-variation bound and, when the rank tests pass, the recovered signed measure."""

    d: int
    tv_bound: float
    status: str
    measure: Optional[AtomicMeasure] = None
    rank_reports: Tuple = ()
    dual_polynomial: Optional[Polynomial] = None
    message: str = ''

    @property
    def recovered(self):
        return self.measure is not None

    def to_dict(self):
        return {
            'd': self.d,
            'tv_bound': json_float(self.tv_bound),
            'status': self.status,
            'atoms': self.measure.to_dict() if self.measure else None,
            'rank_reports': [r.to_dict() for r in self.rank_reports],
            'dual_polynomial': self.dual_polynomial.to_records() if self.dual_polynomial else None,
            'message': self.message,
        }


@dataclass
class KrivineResult:
    """Lower bound from the degree-k Krivine linear program."""

    k: int
    bound: float
    status: str
    violations: List[Tuple[float, ...]] = field(default_factory=list)

    def to_dict(self):
        return {
            'k': self.k,
            'bound': json_float(self.bound),
            'status': self.status,
            'scaling_violations': [list(p) for p in self.violations],
        }
