from momentsos.models.conic import FREE, NONNEG, PSD, ConeBlock, ConicProgram, ConicSolution
from momentsos.models.moments import AtomicMeasure, CoefficientMatrixSet, PseudoMomentSequence
from momentsos.models.polynomial import (
    Monomial,
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
from momentsos.models.problems import (
    BoundEntry,
    BoundSequence,
    GpmMeasure,
    GpmProblem,
    HierarchyLevel,
    KrivineResult,
    MomentConstraint,
    NotCertified,
    PopProblem,
    RankReport,
    SosCertificate,
    SuperResolutionResult,
)

__all__ = [
    'FREE', 'NONNEG', 'PSD', 'ConeBlock', 'ConicProgram', 'ConicSolution',
    'AtomicMeasure', 'CoefficientMatrixSet', 'PseudoMomentSequence',
    'Monomial', 'Polynomial', 'SemialgebraicSet', 'augment_with_ball', 'basis_index',
    'basis_size', 'box_constraints', 'canonical_basis', 'poly_eval', 'poly_mul',
    'BoundEntry', 'BoundSequence', 'GpmMeasure', 'GpmProblem', 'HierarchyLevel',
    'KrivineResult', 'MomentConstraint', 'NotCertified', 'PopProblem', 'RankReport',
    'SosCertificate', 'SuperResolutionResult',
]
