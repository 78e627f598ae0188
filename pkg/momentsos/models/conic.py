"""
Conic Models - Standard-form conic programs and their primal-dual solutions

A program reads

    minimize    sum_b <C_b, X_b>
    subject to  sum_b <A_{i,b}, X_b> = b_i,   i = 1..m
                X_b in K_b

with K_b the PSD cone, the non-negative orthant or (for free blocks) the
whole space. Its dual is

    maximize    b^T lam
    subject to  sum_i lam_i A_{i,b} + S_b = C_b,   S_b in K_b^*

where S_b = 0 on free blocks. Matrix data is stored as upper-triangle
triplets with symmetric meaning, the convention of the SDPA format.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from momentsos.errors import ProgramError

PSD = 'psd'
NONNEG = 'nonneg'
FREE = 'free'

VALID_KINDS = [PSD, NONNEG, FREE]


@dataclass(frozen=True)
class ConeBlock:
    """One block of the cone product."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in VALID_KINDS:
            raise ProgramError(f'unknown cone kind {self.kind!r}')
        if self.size < 1:
            raise ProgramError(f'cone block size must be positive, got {self.size}')

    @property
    def is_matrix(self):
        return self.kind == PSD

    @property
    def entries(self):
        """Number of stored scalars of a primal variable in this block."""
        return self.size * self.size if self.is_matrix else self.size

    def zeros(self):
        return np.zeros((self.size, self.size) if self.is_matrix else self.size)

    def to_dict(self):
        return {'kind': self.kind, 'size': self.size}


class ConicProgram:
    """Conic program in standard primal form, built incrementally."""

    def __init__(self, name=None):
        self.name = name
        self.blocks: List[ConeBlock] = []
        self.objective: List[Dict[Tuple[int, int], float]] = []
        self.constraints: List[Dict[int, Dict[Tuple[int, int], float]]] = []
        self.rhs: List[float] = []
        self._dense = None

    def __repr__(self):
        return f'<ConicProgram {self.name or ""} blocks={len(self.blocks)} m={self.num_constraints}>'

    # Construction

    def add_block(self, kind, size):
        """Append a cone block and return its index."""
        self.blocks.append(ConeBlock(kind, int(size)))
        self.objective.append({})
        self._dense = None
        return len(self.blocks) - 1

    def _key(self, block, i, j):
        if not 0 <= block < len(self.blocks):
            raise ProgramError(f'block {block} does not exist')
        cone = self.blocks[block]
        i, j = int(i), int(j)
        if not (0 <= i < cone.size and 0 <= j < cone.size):
            raise ProgramError(f'entry ({i}, {j}) outside block {block} of size {cone.size}')
        if not cone.is_matrix and i != j:
            raise ProgramError(f'vector block {block} only has diagonal entries')
        return (i, j) if i <= j else (j, i)

    def add_objective(self, block, i, j, value):
        """Accumulate value into C_block at (i, j) (and (j, i))."""
        if value == 0.0:
            return
        key = self._key(block, i, j)
        entries = self.objective[block]
        entries[key] = entries.get(key, 0.0) + float(value)
        if entries[key] == 0.0:
            del entries[key]

    def add_constraint(self, entries, rhs):
        """Append sum <A_b, X_b> = rhs from (block, i, j, value) quadruples; returns its row."""
        row: Dict[int, Dict[Tuple[int, int], float]] = {}
        for block, i, j, value in entries:
            if value == 0.0:
                continue
            key = self._key(block, i, j)
            coeffs = row.setdefault(block, {})
            coeffs[key] = coeffs.get(key, 0.0) + float(value)
        for block in list(row):
            row[block] = {k: v for k, v in row[block].items() if v != 0.0}
            if not row[block]:
                del row[block]
        self.constraints.append(row)
        self.rhs.append(float(rhs))
        self._dense = None
        return len(self.constraints) - 1

    # Inspection

    @property
    def num_constraints(self):
        return len(self.constraints)

    @property
    def num_blocks(self):
        return len(self.blocks)

    @property
    def b(self):
        return np.array(self.rhs, dtype=float)

    def total_entries(self):
        return sum(cone.entries for cone in self.blocks)

    def objective_dense(self, block):
        cone = self.blocks[block]
        matrix = cone.zeros()
        for (i, j), value in self.objective[block].items():
            if cone.is_matrix:
                matrix[i, j] = value
                matrix[j, i] = value
            else:
                matrix[i] = value
        return matrix

    def block_data(self):
        """Per block: (rows touching the block, dense coefficient stack)."""
        if self._dense is None:
            touching = [[] for _ in self.blocks]
            for r, row in enumerate(self.constraints):
                for block in row:
                    touching[block].append(r)
            dense = []
            for block, cone in enumerate(self.blocks):
                rows = np.array(touching[block], dtype=int)
                shape = (len(rows), cone.size, cone.size) if cone.is_matrix else (len(rows), cone.size)
                coeffs = np.zeros(shape)
                for k, r in enumerate(rows):
                    for (i, j), value in self.constraints[r][block].items():
                        if cone.is_matrix:
                            coeffs[k, i, j] = value
                            coeffs[k, j, i] = value
                        else:
                            coeffs[k, i] = value
                dense.append((rows, coeffs))
            self._dense = dense
        return self._dense

    def check_primal_shapes(self, x):
        if len(x) != len(self.blocks):
            raise ProgramError(f'expected {len(self.blocks)} primal blocks, got {len(x)}')
        for block, (cone, value) in enumerate(zip(self.blocks, x)):
            expected = (cone.size, cone.size) if cone.is_matrix else (cone.size,)
            if np.shape(value) != expected:
                raise ProgramError(
                    f'block {block} has shape {np.shape(value)}, expected {expected}')

    # Linear maps

    def apply(self, x):
        """A(x) = (sum_b <A_{i,b}, X_b>)_i."""
        self.check_primal_shapes(x)
        out = np.zeros(self.num_constraints)
        for (rows, coeffs), cone, value in zip(self.block_data(), self.blocks, x):
            if len(rows) == 0:
                continue
            if cone.is_matrix:
                out[rows] += np.einsum('rij,ij->r', coeffs, value)
            else:
                out[rows] += coeffs @ value
        return out

    def adjoint(self, lam):
        """A^T(lam) as a list of per-block matrices/vectors."""
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (self.num_constraints,):
            raise ProgramError(f'expected {self.num_constraints} multipliers, got {lam.shape}')
        result = []
        for (rows, coeffs), cone in zip(self.block_data(), self.blocks):
            if len(rows) == 0:
                result.append(cone.zeros())
            elif cone.is_matrix:
                result.append(np.einsum('r,rij->ij', lam[rows], coeffs))
            else:
                result.append(coeffs.T @ lam[rows])
        return result

    def objective_value(self, x):
        self.check_primal_shapes(x)
        return float(sum(np.sum(self.objective_dense(b) * value) for b, value in enumerate(x)))

    def to_dict(self):
        return {
            'name': self.name,
            'blocks': [cone.to_dict() for cone in self.blocks],
            'num_constraints': self.num_constraints,
        }


@dataclass
class ConicSolution:
    """Primal-dual result of a conic solve."""

    STATUS_OPTIMAL = 'Optimal'
    STATUS_PRIMAL_INFEASIBLE = 'PrimalInfeasible'
    STATUS_DUAL_INFEASIBLE = 'DualInfeasible'
    STATUS_MAX_ITER = 'MaxIter'
    STATUS_NUMERICAL_FAILURE = 'NumericalFailure'

    VALID_STATUSES = [
        STATUS_OPTIMAL,
        STATUS_PRIMAL_INFEASIBLE,
        STATUS_DUAL_INFEASIBLE,
        STATUS_MAX_ITER,
        STATUS_NUMERICAL_FAILURE,
    ]

    status: str
    primal: List[np.ndarray]
    dual: np.ndarray
    slacks: List[np.ndarray]
    primal_objective: float
    dual_objective: float
    iterations: int = 0
    residuals: Dict[str, float] = field(default_factory=dict)
    ray: Optional[object] = None
    message: str = ''

    @property
    def is_optimal(self):
        return self.status == self.STATUS_OPTIMAL

    def to_dict(self):
        """Convert solution summary to dictionary for reports."""
        return {
            'status': self.status,
            'primal_objective': self.primal_objective,
            'dual_objective': self.dual_objective,
            'iterations': self.iterations,
            'residuals': dict(self.residuals),
            'message': self.message,
        }
