"""
Tests for the conic program container and the interior-point solver
"""
import numpy as np
import pytest
from scipy.stats import ortho_group

from momentsos.errors import ProgramError, SizingError
from momentsos.models.conic import FREE, NONNEG, PSD, ConicProgram, ConicSolution
from momentsos.services.conic_solver import SolverOptions, _psd_factor, kkt_residuals, solve


def add_symmetric(program, block, matrix, row=None):
    """Upper-triangle triplets of a dense symmetric matrix, as objective or as row data."""
    entries = []
    size = matrix.shape[0]
    for i in range(size):
        for j in range(i, size):
            if matrix[i, j] != 0.0:
                if row is None:
                    program.add_objective(block, i, j, matrix[i, j])
                else:
                    entries.append((block, i, j, matrix[i, j]))
    return entries


def complementary_program(seed, k=3, m=4, spectrum=(2.0, 1.0), normalize=False):
    """SDP x LP with a strictly complementary optimal pair built in.

    X has the given nonzero eigenvalues and S is positive on the rest of the eigenbasis.
    With normalize, every constraint row has unit Frobenius norm.
    """
    rng = np.random.default_rng(seed)
    Q = ortho_group.rvs(k, random_state=seed)
    rank = len(spectrum)
    X = Q @ np.diag(list(spectrum) + [0.0] * (k - rank)) @ Q.T
    S = Q @ np.diag([0.0] * rank + [1.5] * (k - rank)) @ Q.T
    x = np.array([1.0, 0.0])
    s = np.array([0.0, 2.0])
    lam = rng.standard_normal(m)

    program = ConicProgram(name='complementary')
    psd = program.add_block(PSD, k)
    lp = program.add_block(NONNEG, 2)
    C = S.copy()
    c = s.copy()
    for i in range(m):
        A = rng.standard_normal((k, k))
        A = A + A.T
        a = rng.standard_normal(2)
        if normalize:
            scale = np.sqrt(np.sum(A * A) + a @ a)
            A, a = A / scale, a / scale
        entries = add_symmetric(program, psd, A, row=i)
        entries.extend((lp, j, j, a[j]) for j in range(2))
        program.add_constraint(entries, float(np.sum(A * X) + a @ x))
        C += lam[i] * A
        c += lam[i] * a
    add_symmetric(program, psd, C)
    for j in range(2):
        program.add_objective(lp, j, j, c[j])
    optimum = ConicSolution(status=ConicSolution.STATUS_OPTIMAL, primal=[X, x], dual=lam,
                            slacks=[S, s], primal_objective=float(program.b @ lam),
                            dual_objective=float(program.b @ lam))
    return program, optimum


def test_trace_minimization():
    program = ConicProgram()
    block = program.add_block(PSD, 2)
    program.add_objective(block, 0, 0, 1.0)
    program.add_objective(block, 1, 1, 1.0)
    program.add_constraint([(block, 0, 0, 1.0)], 1.0)
    solution = solve(program)
    assert solution.status == ConicSolution.STATUS_OPTIMAL
    assert solution.primal_objective == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(solution.primal[0], [[1.0, 0.0], [0.0, 0.0]], atol=1e-6)


def test_scalar_lp():
    program = ConicProgram()
    block = program.add_block(NONNEG, 1)
    program.add_objective(block, 0, 0, 1.0)
    program.add_constraint([(block, 0, 0, 1.0)], 3.0)
    solution = solve(program)
    assert solution.is_optimal
    assert solution.primal_objective == pytest.approx(3.0, abs=1e-7)


def test_free_block():
    program = ConicProgram()
    t = program.add_block(FREE, 1)
    s = program.add_block(NONNEG, 1)
    program.add_objective(t, 0, 0, 1.0)
    program.add_constraint([(t, 0, 0, 1.0), (s, 0, 0, -1.0)], 1.0)
    solution = solve(program)
    assert solution.is_optimal
    assert solution.primal[0][0] == pytest.approx(1.0, abs=1e-6)
    assert solution.dual[0] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_recovers_constructed_optimum(seed):
    program, optimum = complementary_program(seed)
    solution = solve(program)
    assert solution.is_optimal
    expected = optimum.primal_objective
    assert solution.primal_objective == pytest.approx(expected, abs=1e-6 * (1 + abs(expected)))
    residuals = kkt_residuals(program, solution)
    assert max(residuals.values()) <= 1e-6
    X = solution.primal[0]
    assert np.linalg.eigvalsh(X).min() >= -1e-7 * (1 + np.linalg.norm(X))
    assert solution.primal[1].min() >= -1e-7


@pytest.mark.parametrize('seed', range(100))
def test_random_complementary_programs(seed):
    sizes = np.random.default_rng(1000 + seed)
    k = int(sizes.integers(2, 31))
    m = int(sizes.integers(1, min(60, k * (k + 1) // 2 + 2) + 1))
    spectrum = sizes.uniform(0.5, 2.0, int(sizes.integers(1, k)))
    program, optimum = complementary_program(seed, k, m, spectrum, normalize=True)
    solution = solve(program)
    assert solution.is_optimal, solution.message
    residuals = kkt_residuals(program, solution)
    assert residuals['gap'] <= 1e-7
    assert max(residuals['primal_feas'], residuals['dual_feas']) <= 1e-6
    expected = optimum.primal_objective
    assert solution.primal_objective == pytest.approx(expected, abs=1e-6 * (1 + abs(expected)))


def test_psd_factor_of_a_matrix_cholesky_rejects():
    X = np.diag([1.0, -1e-18])
    L, L_inv = _psd_factor(X)
    np.testing.assert_allclose(L @ L.T, np.diag([1.0, 0.0]), atol=1e-6)
    np.testing.assert_allclose(L_inv @ L, np.eye(2), atol=1e-8)


def test_program_without_an_interior_point_is_solved():
    program = ConicProgram()
    block = program.add_block(PSD, 2)
    program.add_objective(block, 1, 1, 1.0)
    program.add_constraint([(block, 0, 0, 1.0)], 0.0)
    solution = solve(program)
    assert solution.is_optimal, solution.message
    assert solution.primal_objective == pytest.approx(0.0, abs=1e-6)
    assert kkt_residuals(program, solution)['primal_feas'] <= 1e-6


def test_solve_is_deterministic():
    program, _ = complementary_program(5)
    first = solve(program)
    second = solve(program)
    assert first.iterations == second.iterations
    for a, b in zip(first.primal, second.primal):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(first.dual, second.dual)


def test_kkt_residuals_of_exact_solution():
    program, optimum = complementary_program(3)
    residuals = kkt_residuals(program, optimum)
    assert residuals['primal_feas'] <= 1e-12
    assert residuals['dual_feas'] <= 1e-12
    assert residuals['gap'] <= 1e-12


def test_kkt_residuals_see_primal_perturbation():
    program, optimum = complementary_program(4)
    X = optimum.primal[0].copy()
    X[0, 0] += 1e-3
    perturbed = ConicSolution(status=optimum.status, primal=[X, optimum.primal[1]], dual=optimum.dual,
                              slacks=optimum.slacks, primal_objective=0.0, dual_objective=0.0)
    rows, coeffs = program.block_data()[0]
    expected = np.zeros(program.num_constraints)
    expected[rows] = np.abs(coeffs[:, 0, 0]) * 1e-3
    assert kkt_residuals(program, perturbed)['primal_feas'] == pytest.approx(expected.max(), rel=1e-6)


def test_kkt_residuals_reject_shape_mismatch():
    program, optimum = complementary_program(0)
    broken = ConicSolution(status=optimum.status, primal=optimum.primal[:1], dual=optimum.dual,
                           slacks=optimum.slacks, primal_objective=0.0, dual_objective=0.0)
    with pytest.raises(ProgramError):
        kkt_residuals(program, broken)


def test_inconsistent_rows_give_farkas_ray():
    program = ConicProgram()
    block = program.add_block(NONNEG, 2)
    program.add_constraint([(block, 0, 0, 1.0), (block, 1, 1, 1.0)], 1.0)
    program.add_constraint([(block, 0, 0, 2.0), (block, 1, 1, 2.0)], 3.0)
    solution = solve(program)
    assert solution.status == ConicSolution.STATUS_PRIMAL_INFEASIBLE
    ray = solution.ray
    np.testing.assert_allclose(program.adjoint(ray)[0], 0.0, atol=1e-10)
    assert program.b @ ray == pytest.approx(1.0)


def test_dependent_rows_are_dropped():
    program = ConicProgram()
    block = program.add_block(NONNEG, 2)
    program.add_objective(block, 0, 0, 1.0)
    program.add_objective(block, 1, 1, 2.0)
    program.add_constraint([(block, 0, 0, 1.0), (block, 1, 1, 1.0)], 1.0)
    program.add_constraint([(block, 0, 0, 2.0), (block, 1, 1, 2.0)], 2.0)
    solution = solve(program)
    assert solution.is_optimal
    assert solution.primal_objective == pytest.approx(1.0, abs=1e-7)


def test_unbounded_free_direction_gives_primal_ray():
    program = ConicProgram()
    free = program.add_block(FREE, 2)
    slack = program.add_block(NONNEG, 1)
    program.add_objective(free, 0, 0, 1.0)
    program.add_constraint([(free, 0, 0, 1.0), (free, 1, 1, 1.0), (slack, 0, 0, 1.0)], 1.0)
    solution = solve(program)
    assert solution.status == ConicSolution.STATUS_DUAL_INFEASIBLE
    ray = solution.ray
    np.testing.assert_allclose(program.apply(ray), 0.0, atol=1e-10)
    assert program.objective_value(ray) == pytest.approx(-1.0)


def test_size_cap():
    program = ConicProgram()
    program.add_block(PSD, 10)
    with pytest.raises(SizingError):
        solve(program, SolverOptions(max_entries=50))


def test_program_validation():
    program = ConicProgram()
    block = program.add_block(NONNEG, 2)
    with pytest.raises(ProgramError):
        program.add_constraint([(block, 0, 1, 1.0)], 0.0)
    with pytest.raises(ProgramError):
        program.add_objective(3, 0, 0, 1.0)
    with pytest.raises(ProgramError):
        program.add_block('cone', 2)
