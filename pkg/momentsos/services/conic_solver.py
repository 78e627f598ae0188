"""
Conic Solver - Dense primal-dual interior-point method for PSD x NonNeg x Free programs

Infeasible-start path following with Nesterov-Todd scaling and Mehrotra
predictor-corrector steps. The Schur complement is formed densely and
factorized by Cholesky; free variables enlarge it to the augmented system

    [ M + dI   A_f ] [ dlam ]   [ r1 ]
    [ A_f^T   -dI  ] [ dx_f ] = [ r2 ]

which is factorized by LU, with the regularization d raised until the
factorization succeeds. Steps are shortened until every block passes a
Cholesky test, so accepted iterates stay strictly inside their cones.
When no further progress is possible the best iterate is kept, and it is
reported optimal if it meets reduced_tol. Infeasibility is detected from
diverging iterates whose normalized residuals form a Farkas ray.
"""
import logging
import time
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg as la

from momentsos.errors import ProgramError, SizingError
from momentsos.models.conic import FREE, PSD, ConicSolution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and limits of the interior-point method."""

    tol: float = 1e-8
    max_iter: int = 200
    max_entries: int = 4_000_000
    infeasibility_tol: float = 1e-8
    step_fraction: float = 0.98
    regularization: float = 1e-10
    presolve_tol: float = 1e-10
    # accuracy at which a run that can no longer make progress still counts as solved
    reduced_tol: float = 1e-7
    backtrack: float = 0.8

    @classmethod
    def from_settings(cls, settings, **overrides):
        options = cls(tol=settings.solver_tol, max_iter=settings.max_iter,
                      max_entries=settings.max_entries)
        return replace(options, **overrides)


EIGEN_FLOOR = 1e-14
REGULARIZATION_ATTEMPTS = 6
BACKTRACK_LIMIT = 60
STALL_ITERATIONS = 8


def _psd_factor(X):
    """(L, L^{-1}) with X = L L^T; falls back to a clipped eigendecomposition."""
    try:
        L = la.cholesky(X, lower=True)
        return L, la.solve_triangular(L, np.eye(X.shape[0]), lower=True)
    except la.LinAlgError:
        values, vectors = la.eigh(0.5 * (X + X.T))
        floor = EIGEN_FLOOR * max(values.max(), 1e-300)
        logger.debug('scaling: cholesky failed, clipping %d eigenvalues', int(np.sum(values < floor)))
        root = np.sqrt(np.maximum(values, floor))
        return vectors * root, (vectors / root).T


class _PsdCone:
    """A PSD block restricted to the rows that touch it."""

    def __init__(self, rows, coeffs, C):
        self.rows = rows
        self.A = coeffs
        self.C = C
        self.size = C.shape[0]
        self.degree = self.size

    def apply(self, X):
        return np.einsum('rij,ij->r', self.A, X)

    def adjoint(self, lam_rows):
        return np.einsum('r,rij->ij', lam_rows, self.A)

    def initial(self, value):
        return value * np.eye(self.size)

    @staticmethod
    def inner(X, S):
        return float(np.sum(X * S))

    @staticmethod
    def interior(X):
        try:
            la.cholesky(X, lower=True)
        except la.LinAlgError:
            return False
        return True

    @staticmethod
    def symmetrize(X):
        return 0.5 * (X + X.T)

    def scaling(self, X, S):
        """Nesterov-Todd scaling G with G^T S G = G^{-1} X G^{-T} = diag(lam)."""
        L, Linv = _psd_factor(X)
        R, _ = _psd_factor(S)
        _, d, Vt = la.svd(R.T @ L)
        d = np.maximum(d, EIGEN_FLOOR * max(d.max(), 1e-300))
        root = np.sqrt(d)
        G = (L @ Vt.T) / root
        Ginv = (root[:, None] * Vt) @ Linv
        return {'G': G, 'Ginv': Ginv, 'lam': d, 'W': G @ G.T}

    def schur(self, sc):
        W = sc['W']
        T = np.matmul(W, np.matmul(self.A, W))
        r = self.A.shape[0]
        M = self.A.reshape(r, -1) @ T.reshape(r, -1).T
        return 0.5 * (M + M.T)

    @staticmethod
    def scale_x(sc, dX):
        return sc['Ginv'] @ dX @ sc['Ginv'].T

    @staticmethod
    def scale_s(sc, dS):
        return sc['G'].T @ dS @ sc['G']

    @staticmethod
    def unscale(sc, Z):
        return sc['G'] @ Z @ sc['G'].T

    @staticmethod
    def congruence(sc, V):
        return sc['W'] @ V @ sc['W']

    @staticmethod
    def lam_square(sc):
        return np.diag(sc['lam'] ** 2)

    @staticmethod
    def identity_like(sc):
        return np.eye(len(sc['lam']))

    @staticmethod
    def jordan(a, b):
        return 0.5 * (a @ b + b @ a)

    @staticmethod
    def lyap_solve(sc, R):
        """Solve lam o Z = R for Z (lam diagonal)."""
        lam = sc['lam']
        return 2.0 * R / (lam[:, None] + lam[None, :])

    @staticmethod
    def max_step(sc, D):
        """Largest a with diag(lam) + a D in the cone."""
        root = np.sqrt(sc['lam'])
        scaled = D / np.outer(root, root)
        smallest = la.eigvalsh(0.5 * (scaled + scaled.T), subset_by_index=[0, 0])[0]
        return np.inf if smallest >= 0 else -1.0 / smallest


class _NonNegCone:
    """A non-negative orthant block restricted to the rows that touch it."""

    def __init__(self, rows, coeffs, C):
        self.rows = rows
        self.A = coeffs
        self.C = C
        self.size = C.shape[0]
        self.degree = self.size

    def apply(self, x):
        return self.A @ x

    def adjoint(self, lam_rows):
        return self.A.T @ lam_rows

    def initial(self, value):
        return value * np.ones(self.size)

    @staticmethod
    def inner(x, s):
        return float(x @ s)

    @staticmethod
    def interior(x):
        return bool(np.all(x > 0))

    @staticmethod
    def symmetrize(x):
        return x

    def scaling(self, x, s):
        if np.any(x <= 0) or np.any(s <= 0):
            raise la.LinAlgError('iterate left the non-negative orthant')
        w = np.sqrt(x / s)
        return {'w': w, 'lam': np.sqrt(x * s)}

    def schur(self, sc):
        weighted = self.A * (sc['w'] ** 2)
        return weighted @ self.A.T

    @staticmethod
    def scale_x(sc, dx):
        return dx / sc['w']

    @staticmethod
    def scale_s(sc, ds):
        return ds * sc['w']

    @staticmethod
    def unscale(sc, Z):
        return Z * sc['w']

    @staticmethod
    def congruence(sc, v):
        return v * sc['w'] ** 2

    @staticmethod
    def lam_square(sc):
        return sc['lam'] ** 2

    @staticmethod
    def identity_like(sc):
        return np.ones_like(sc['lam'])

    @staticmethod
    def jordan(a, b):
        return a * b

    @staticmethod
    def lyap_solve(sc, R):
        return R / sc['lam']

    @staticmethod
    def max_step(sc, d):
        ratios = d / sc['lam']
        smallest = ratios.min() if ratios.size else 0.0
        return np.inf if smallest >= 0 else -1.0 / smallest


class _ReducedProgram:
    """Presolved program: independent rows, independent free columns."""

    def __init__(self, program, rows, free_columns):
        self.program = program
        self.rows = rows
        self.b = program.b[rows]
        self.m = len(rows)
        position = -np.ones(program.num_constraints, dtype=int)
        position[rows] = np.arange(self.m)

        self.cones = []
        self.cone_blocks = []
        free_parts = []
        free_costs = []
        self.free_layout = []
        for block, ((old_rows, coeffs), cone) in enumerate(zip(program.block_data(), program.blocks)):
            new_rows = position[old_rows] if len(old_rows) else old_rows
            keep = new_rows >= 0
            new_rows = new_rows[keep]
            coeffs = coeffs[keep]
            C = program.objective_dense(block)
            if cone.kind == FREE:
                columns = free_columns[block]
                dense = np.zeros((self.m, cone.size))
                if len(new_rows):
                    dense[new_rows] = coeffs
                free_parts.append(dense[:, columns])
                free_costs.append(C[columns])
                self.free_layout.append((block, columns))
            else:
                cls = _PsdCone if cone.kind == PSD else _NonNegCone
                self.cones.append(cls(new_rows, coeffs, C))
                self.cone_blocks.append(block)
        if free_parts:
            self.A_free = np.hstack(free_parts)
            self.c_free = np.concatenate(free_costs)
        else:
            self.A_free = np.zeros((self.m, 0))
            self.c_free = np.zeros(0)
        self.n_free = self.A_free.shape[1]
        self.nu = sum(cone.degree for cone in self.cones)

    def apply(self, X, x_free):
        out = self.A_free @ x_free
        for cone, value in zip(self.cones, X):
            if len(cone.rows):
                out[cone.rows] += cone.apply(value)
        return out

    def adjoint(self, cone, lam):
        if len(cone.rows) == 0:
            return np.zeros_like(cone.C)
        return cone.adjoint(lam[cone.rows])

    def expand(self, X, S, x_free, lam):
        """Map reduced iterates back to the blocks and rows of the original program."""
        program = self.program
        primal = [cone.zeros() for cone in program.blocks]
        slacks = [cone.zeros() for cone in program.blocks]
        for block, value, slack in zip(self.cone_blocks, X, S):
            primal[block] = value.copy()
            slacks[block] = slack.copy()
        offset = 0
        for block, columns in self.free_layout:
            primal[block][columns] = x_free[offset:offset + len(columns)]
            offset += len(columns)
        dual = np.zeros(program.num_constraints)
        dual[self.rows] = lam
        return primal, slacks, dual


def _dense_matrix(program):
    """Constraint matrix with one column per stored scalar of every block."""
    m = program.num_constraints
    columns = []
    spans = []
    start = 0
    for (rows, coeffs), cone in zip(program.block_data(), program.blocks):
        part = np.zeros((m, cone.entries))
        if len(rows):
            part[rows] = coeffs.reshape(len(rows), -1)
        columns.append(part)
        spans.append((start, start + cone.entries))
        start += cone.entries
    matrix = np.hstack(columns) if columns else np.zeros((m, 0))
    return matrix, spans


def _pivoted_rank(matrix, tol):
    """Rank and pivot order of the columns of matrix by QR with column pivoting."""
    if matrix.size == 0:
        return 0, np.arange(matrix.shape[1])
    _, R, pivots = la.qr(matrix, mode='economic', pivoting=True)
    diagonal = np.abs(np.diag(R))
    if diagonal.size == 0 or diagonal[0] == 0.0:
        return 0, pivots
    return int(np.sum(diagonal > tol * diagonal[0])), pivots


def _failure(program, status, message, ray=None):
    blocks = [cone.zeros() for cone in program.blocks]
    return ConicSolution(status=status, primal=blocks, dual=np.zeros(program.num_constraints),
                         slacks=[cone.zeros() for cone in program.blocks],
                         primal_objective=float('nan'), dual_objective=float('nan'),
                         ray=ray, message=message)


def presolve(program, options):
    """Drop dependent rows and dependent free columns.

    Returns (reduced program, None) or (None, infeasible solution) when a
    dropped row or column is inconsistent.
    """
    matrix, spans = _dense_matrix(program)
    b = program.b
    m = program.num_constraints
    rank, pivots = _pivoted_rank(matrix.T, options.presolve_tol)
    rows = np.sort(pivots[:rank])
    dropped = np.setdiff1d(np.arange(m), rows)
    if len(dropped):
        kept = matrix[rows]
        combos = la.lstsq(kept.T, matrix[dropped].T)[0]
        predicted = combos.T @ b[rows]
        mismatch = b[dropped] - predicted
        worst = int(np.argmax(np.abs(mismatch)))
        if abs(mismatch[worst]) > options.tol * (1.0 + np.abs(b).max()):
            ray = np.zeros(m)
            ray[dropped[worst]] = 1.0
            ray[rows] = -combos[:, worst]
            ray /= ray @ b
            logger.info('presolve: dependent row %d is inconsistent', dropped[worst])
            return None, _failure(program, ConicSolution.STATUS_PRIMAL_INFEASIBLE,
                                  'inconsistent dependent equality rows', ray)
        logger.warning('presolve: dropped %d dependent equality rows', len(dropped))

    free_columns = {}
    for block, cone in enumerate(program.blocks):
        if cone.kind != FREE:
            continue
        start, stop = spans[block]
        part = matrix[rows, start:stop]
        cost = program.objective_dense(block)
        rank, pivots = _pivoted_rank(part, options.presolve_tol)
        keep = np.sort(pivots[:rank])
        extra = np.setdiff1d(np.arange(cone.size), keep)
        if len(extra):
            combos = la.lstsq(part[:, keep], part[:, extra])[0]
            mismatch = cost[extra] - combos.T @ cost[keep]
            worst = int(np.argmax(np.abs(mismatch)))
            if abs(mismatch[worst]) > options.tol * (1.0 + np.abs(cost).max()):
                ray = [c.zeros() for c in program.blocks]
                ray[block][extra[worst]] = 1.0
                ray[block][keep] = -combos[:, worst]
                scale = -float(ray[block] @ cost)
                if scale < 0:
                    ray[block] = -ray[block]
                    scale = -scale
                ray[block] /= scale
                return None, _failure(program, ConicSolution.STATUS_DUAL_INFEASIBLE,
                                      'inconsistent dependent free columns', ray)
            logger.debug('presolve: dropped %d dependent free columns in block %d',
                         len(extra), block)
        free_columns[block] = keep
    return _ReducedProgram(program, rows, free_columns), None


class _InteriorPoint:
    """Mehrotra predictor-corrector iterations on a presolved program."""

    def __init__(self, reduced, options):
        self.p = reduced
        self.options = options
        self.norm_b = np.abs(reduced.b).max() if reduced.m else 0.0
        norms = [np.abs(cone.C).max() for cone in reduced.cones if cone.C.size]
        if reduced.n_free:
            norms.append(np.abs(reduced.c_free).max())
        self.norm_c = max(norms, default=0.0)

    def _initial_point(self):
        p = self.p
        X, S = [], []
        for cone in p.cones:
            k = cone.size
            if len(cone.rows):
                row_norms = np.sqrt(np.sum(cone.A.reshape(len(cone.rows), -1) ** 2, axis=1))
                xi = k * np.max((1.0 + np.abs(p.b[cone.rows])) / (1.0 + row_norms))
                norm_a = row_norms.max()
            else:
                xi, norm_a = 1.0, 0.0
            primal = max(10.0, np.sqrt(k), xi)
            dual = max(10.0, np.sqrt(k), norm_a, np.sqrt(np.sum(cone.C ** 2)))
            X.append(cone.initial(primal))
            S.append(cone.initial(dual))
        return X, S, np.zeros(p.n_free), np.zeros(p.m)

    def _residuals(self, X, S, x_free, lam):
        p = self.p
        r_p = p.b - p.apply(X, x_free)
        r_d = [cone.C - p.adjoint(cone, lam) - s for cone, s in zip(p.cones, S)]
        r_free = p.c_free - p.A_free.T @ lam
        return r_p, r_d, r_free

    def _factorize(self, M):
        """Factor the (augmented) Schur system, raising the regularization until it succeeds."""
        p = self.p
        scale = max(1.0, float(np.max(np.diag(M)))) if M.size else 1.0
        regularization = self.options.regularization
        for _ in range(REGULARIZATION_ATTEMPTS):
            delta = regularization * scale
            try:
                if p.n_free == 0:
                    return ('chol', la.cho_factor(M + delta * np.eye(p.m), lower=True), M)
                K = np.block([[M + delta * np.eye(p.m), p.A_free],
                              [p.A_free.T, -regularization * np.eye(p.n_free)]])
                with warnings.catch_warnings():
                    warnings.simplefilter('error', la.LinAlgWarning)
                    factor = la.lu_factor(K)
                if np.all(np.isfinite(factor[0])) and np.min(np.abs(np.diag(factor[0]))) > 0:
                    return ('lu', factor, M)
            except (la.LinAlgError, la.LinAlgWarning):
                pass
            logger.debug('schur factorization failed with regularization %.1e', regularization)
            regularization *= 100.0
        raise la.LinAlgError('Schur complement could not be factorized')

    def _solve_reduced(self, factor, rhs1, rhs2):
        kind, data, M = factor
        p = self.p

        def raw(r1, r2):
            if kind == 'chol':
                return la.cho_solve(data, r1), np.zeros(0)
            sol = la.lu_solve(data, np.concatenate([r1, r2]))
            return sol[:p.m], sol[p.m:]

        dlam, dfree = raw(rhs1, rhs2)
        # one step of iterative refinement against the unregularized system
        res1 = rhs1 - M @ dlam - p.A_free @ dfree
        res2 = rhs2 - p.A_free.T @ dlam
        c1, c2 = raw(res1, res2)
        return dlam + c1, dfree + c2

    def _direction(self, factor, scalings, Z, r_p, r_d, r_free):
        """Newton direction for the scaled complementarity target Z."""
        p = self.p
        rhs1 = r_p.copy()
        base = []
        for cone, sc, z, rd in zip(p.cones, scalings, Z, r_d):
            part = cone.unscale(sc, z) - cone.congruence(sc, rd)
            base.append(part)
            if len(cone.rows):
                rhs1[cone.rows] -= cone.apply(part)
        dlam, dfree = self._solve_reduced(factor, rhs1, r_free)
        dX, dS = [], []
        for cone, sc, part, rd in zip(p.cones, scalings, base, r_d):
            aty = p.adjoint(cone, dlam)
            dX.append(part + cone.congruence(sc, aty))
            dS.append(rd - aty)
        return dX, dS, dfree, dlam

    def _steps(self, scalings, dX, dS):
        p = self.p
        alpha_p, alpha_d = np.inf, np.inf
        scaled_x, scaled_s = [], []
        for cone, sc, dx, ds in zip(p.cones, scalings, dX, dS):
            tx = cone.scale_x(sc, dx)
            ts = cone.scale_s(sc, ds)
            scaled_x.append(tx)
            scaled_s.append(ts)
            alpha_p = min(alpha_p, cone.max_step(sc, tx))
            alpha_d = min(alpha_d, cone.max_step(sc, ts))
        return alpha_p, alpha_d, scaled_x, scaled_s

    def _advance(self, points, directions, alpha):
        """Shrink alpha geometrically until every moved block is strictly interior."""
        cones = self.p.cones
        for _ in range(BACKTRACK_LIMIT):
            moved = [cone.symmetrize(x + alpha * dx) for cone, x, dx in zip(cones, points, directions)]
            if all(cone.interior(x) for cone, x in zip(cones, moved)):
                return moved, alpha
            alpha *= self.options.backtrack
        return list(points), 0.0

    def run(self):
        p = self.p
        options = self.options
        X, S, x_free, lam = self._initial_point()
        nu = max(p.nu, 1)
        status = ConicSolution.STATUS_MAX_ITER
        message = 'iteration limit reached'
        ray = None
        stalled = 0
        best = None
        iteration = 0
        for iteration in range(options.max_iter + 1):
            r_p, r_d, r_free = self._residuals(X, S, x_free, lam)
            pobj = sum(float(np.sum(cone.C * x)) for cone, x in zip(p.cones, X)) + float(p.c_free @ x_free)
            dobj = float(p.b @ lam)
            mu = sum(cone.inner(x, s) for cone, x, s in zip(p.cones, X, S)) / nu
            pfeas = (np.abs(r_p).max() if p.m else 0.0) / (1.0 + self.norm_b)
            dinf = max([np.abs(rd).max() for rd in r_d if rd.size]
                       + ([np.abs(r_free).max()] if r_free.size else []), default=0.0)
            dfeas = dinf / (1.0 + self.norm_c)
            gap = abs(pobj - dobj) / (1.0 + abs(pobj))
            merit = max(pfeas, dfeas, gap)
            if best is None or merit < best[0]:
                best = (merit, iteration, X, S, x_free, lam)
            logger.debug('iter %3d  pobj %+.9e  dobj %+.9e  mu %.2e  pfeas %.2e  dfeas %.2e',
                         iteration, pobj, dobj, mu, pfeas, dfeas)

            if merit <= options.tol:
                status, message = ConicSolution.STATUS_OPTIMAL, 'converged'
                break
            if dobj > 0 and pfeas > options.tol:
                homogeneous = max([np.abs(cone.C - rd).max() for cone, rd in zip(p.cones, r_d) if rd.size]
                                  + ([np.abs(p.c_free - r_free).max()] if r_free.size else []),
                                  default=0.0)
                if homogeneous <= options.infeasibility_tol * dobj:
                    status, message = ConicSolution.STATUS_PRIMAL_INFEASIBLE, 'dual ray found'
                    ray = lam / dobj
                    break
            if pobj < 0 and dfeas > options.tol:
                image = np.abs(p.b - r_p).max() if p.m else 0.0
                if image <= options.infeasibility_tol * (-pobj):
                    status, message = ConicSolution.STATUS_DUAL_INFEASIBLE, 'primal ray found'
                    ray = ('primal', [x / (-pobj) for x in X], x_free / (-pobj))
                    break
            if best[0] <= options.reduced_tol and iteration - best[1] >= STALL_ITERATIONS:
                status = ConicSolution.STATUS_NUMERICAL_FAILURE
                message = f'no progress in {STALL_ITERATIONS} iterations'
                break
            if iteration == options.max_iter:
                break

            try:
                scalings = [cone.scaling(x, s) for cone, x, s in zip(p.cones, X, S)]
                M = np.zeros((p.m, p.m))
                for cone, sc in zip(p.cones, scalings):
                    if len(cone.rows):
                        M[np.ix_(cone.rows, cone.rows)] += cone.schur(sc)
                factor = self._factorize(M)

                Z = [-np.diag(sc['lam']) if isinstance(cone, _PsdCone) else -sc['lam']
                     for cone, sc in zip(p.cones, scalings)]
                dX, dS, dfree, dlam = self._direction(factor, scalings, Z, r_p, r_d, r_free)
                ap, ad, tx, ts = self._steps(scalings, dX, dS)
                ap, ad = min(1.0, ap), min(1.0, ad)
                mu_aff = sum(cone.inner(x + ap * dx, s + ad * ds)
                             for cone, x, s, dx, ds in zip(p.cones, X, S, dX, dS)) / nu
                sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

                Z = []
                for cone, sc, a, b in zip(p.cones, scalings, tx, ts):
                    R = sigma * mu * cone.identity_like(sc) - cone.lam_square(sc) - cone.jordan(a, b)
                    Z.append(cone.lyap_solve(sc, R))
                dX, dS, dfree, dlam = self._direction(factor, scalings, Z, r_p, r_d, r_free)
                ap, ad, _, _ = self._steps(scalings, dX, dS)
            except (la.LinAlgError, ValueError) as exc:
                status = ConicSolution.STATUS_NUMERICAL_FAILURE
                message = f'linear algebra failure: {exc}'
                break

            if not all(np.all(np.isfinite(d)) for d in dX + dS) or not np.all(np.isfinite(dlam)):
                status = ConicSolution.STATUS_NUMERICAL_FAILURE
                message = 'non-finite search direction'
                break
            X, ap = self._advance(X, dX, min(1.0, options.step_fraction * ap))
            S, ad = self._advance(S, dS, min(1.0, options.step_fraction * ad))
            x_free = x_free + ap * dfree
            lam = lam + ad * dlam
            stalled = stalled + 1 if max(ap, ad) < 1e-10 else 0
            if stalled >= 5:
                status = ConicSolution.STATUS_NUMERICAL_FAILURE
                message = 'step lengths vanished'
                break

        if status in (ConicSolution.STATUS_NUMERICAL_FAILURE, ConicSolution.STATUS_MAX_ITER):
            merit, _, X, S, x_free, lam = best
            if merit <= options.reduced_tol:
                logger.info('%s; keeping the best iterate (accuracy %.2e)', message, merit)
                status, message = ConicSolution.STATUS_OPTIMAL, f'converged to reduced accuracy ({message})'
        return status, message, X, S, x_free, lam, iteration, ray


def kkt_residuals(program, solution):
    """Recompute primal/dual feasibility and the relative duality gap from scratch."""
    program.check_primal_shapes(solution.primal)
    if len(solution.slacks) != program.num_blocks:
        raise ProgramError(f'expected {program.num_blocks} slack blocks, got {len(solution.slacks)}')
    dual = np.asarray(solution.dual, dtype=float)
    primal_feas = float(np.abs(program.apply(solution.primal) - program.b).max()) \
        if program.num_constraints else 0.0
    dual_feas = 0.0
    for block, (aty, slack) in enumerate(zip(program.adjoint(dual), solution.slacks)):
        cone = program.blocks[block]
        if np.shape(slack) != np.shape(aty):
            raise ProgramError(f'slack block {block} has shape {np.shape(slack)}')
        term = aty - program.objective_dense(block)
        if cone.kind != FREE:
            term = term + slack
        if term.size:
            dual_feas = max(dual_feas, float(np.abs(term).max()))
    primal_objective = program.objective_value(solution.primal)
    gap = abs(primal_objective - float(program.b @ dual)) / (1.0 + abs(primal_objective))
    return {'primal_feas': primal_feas, 'dual_feas': dual_feas, 'gap': gap}


def solve(program, options=None):
    """Solve a conic program; the outcome is reported in the solution status."""
    options = options or SolverOptions()
    if program.total_entries() > options.max_entries:
        raise SizingError(f'program has {program.total_entries()} entries, '
                          f'cap is {options.max_entries}')
    started = time.perf_counter()
    reduced, early = presolve(program, options)
    if early is not None:
        return early
    status, message, X, S, x_free, lam, iterations, ray = _InteriorPoint(reduced, options).run()
    primal, slacks, dual = reduced.expand(X, S, x_free, lam)
    if isinstance(ray, np.ndarray):
        full = np.zeros(program.num_constraints)
        full[reduced.rows] = ray
        ray = full
    elif isinstance(ray, tuple):
        ray_blocks, _, _ = reduced.expand(ray[1], [np.zeros_like(x) for x in ray[1]], ray[2],
                                          np.zeros(reduced.m))
        ray = ray_blocks
    solution = ConicSolution(
        status=status,
        primal=primal,
        dual=dual,
        slacks=slacks,
        primal_objective=program.objective_value(primal),
        dual_objective=float(program.b @ dual),
        iterations=iterations,
        ray=ray,
        message=message,
    )
    solution.residuals = kkt_residuals(program, solution)
    logger.info('%s: %s after %d iterations in %.3fs (pobj %.9g, dobj %.9g)',
                program.name or 'program', status, iterations,
                time.perf_counter() - started, solution.primal_objective, solution.dual_objective)
    return solution
