"""
Solve Commands - Hierarchy driver, SOS membership and SDPA export
"""
import time

import click
import numpy as np

from momentsos.commands.report import (
    EXIT_NOT_CERTIFIED,
    EXIT_OK,
    EXIT_SOLVER,
    echo_atoms,
    finish,
    format_number,
    handle_errors,
)
from momentsos.errors import ProblemFileError
from momentsos.models.problems import NotCertified
from momentsos.schemas.problem_schema import KIND_GPM, KIND_POP, KIND_SOS_CHECK, parse_problem
from momentsos.services.conic_solver import SolverOptions
from momentsos.services.gpm_service import build_gpm_relaxation
from momentsos.services.hierarchy_service import (
    HierarchyOptions,
    build_dual_sos,
    build_primal_relaxation,
    solve_hierarchy,
    sos_membership,
)
from momentsos.services.sdpa_service import write_sdpa

NOT_CERTIFIED_STATUSES = [
    NotCertified.STATUS_STRUCTURAL,
    NotCertified.STATUS_SEPARATED,
    NotCertified.STATUS_RESIDUAL,
]


def load_kind(path, *kinds):
    """Parse a problem file and check that the command accepts its kind."""
    problem_file = parse_problem(path)
    if problem_file.kind not in kinds:
        raise ProblemFileError(f'a {problem_file.kind!r} problem cannot be used here; '
                               f'expected {", ".join(kinds)}', code='unknown-kind')
    return problem_file


@click.command('solve')
@click.argument('problem', type=click.Path(exists=True, dir_okay=False))
@click.option('--order-max', type=click.IntRange(min=0), required=True, help='Highest relaxation order.')
@click.option('--order-min', type=click.IntRange(min=0), default=None, help='Lowest relaxation order.')
@click.option('--tol', type=click.FloatRange(min=0, min_open=True), default=None, help='Solver tolerance.')
@click.option('--extract/--no-extract', default=False, help='Extract minimizers when the rank test passes.')
@click.option('--seed', type=int, default=None, help='Seed of the extraction combination weights.')
@click.option('--threads', type=click.IntRange(min=1), default=None, help='Levels solved in parallel.')
@click.option('--json', 'json_path', type=click.Path(dir_okay=False), default=None,
              help='Write the machine-readable report here.')
@click.pass_context
@handle_errors
def solve_command(ctx, problem, order_max, order_min, tol, extract, seed, threads, json_path):
    """Run the moment-SOS hierarchy on a polynomial optimization problem."""
    settings = ctx.obj['settings']
    problem_file = load_kind(problem, KIND_POP)
    overrides = {'extract': extract, 'd_min': order_min}
    if tol is not None:
        overrides['solver'] = SolverOptions.from_settings(settings, tol=tol)
    if seed is not None:
        overrides['seed'] = seed
    if threads is not None:
        overrides['threads'] = threads
    options = HierarchyOptions.from_settings(settings, **overrides)

    started = time.perf_counter()
    levels = solve_hierarchy(problem_file.problem, order_max, options)
    elapsed = time.perf_counter() - started

    for level in levels:
        rank = level.rank_report
        rank_text = (f'rank {rank.rank_full}/{rank.rank_sub} {"passed" if rank.passed else "failed"}'
                     if rank else 'rank -')
        click.echo(f'd={level.d}  rho={format_number(level.primal_bound)}  '
                   f'rho*={format_number(level.dual_bound)}  {rank_text}  '
                   f'[{level.primal_status}/{level.dual_status}]')
        if level.measure is not None:
            echo_atoms(level.measure)
        for note in level.notes:
            click.echo(f'    note: {note}')
    click.echo(f'time {elapsed:.3f}s')

    diagnostic = None
    if all(np.isnan(level.primal_bound) and np.isnan(level.dual_bound) for level in levels):
        code, diagnostic = EXIT_SOLVER, 'no relaxation level was solved'
    elif extract and not any(level.converged for level in levels):
        code = EXIT_NOT_CERTIFIED
        diagnostic = f'no minimizers extracted up to order {levels[-1].d}'
    else:
        code = EXIT_OK
    finish(ctx, 'solve', problem_file, {
        'levels': [level.to_dict() for level in levels],
        'converged': any(level.converged for level in levels),
    }, code, json_path, diagnostic=diagnostic)


@click.command('sos-check')
@click.argument('problem', type=click.Path(exists=True, dir_okay=False))
@click.option('--tol', type=click.FloatRange(min=0, min_open=True), default=None, help='Solver tolerance.')
@click.option('--json', 'json_path', type=click.Path(dir_okay=False), default=None,
              help='Write the machine-readable report here.')
@click.pass_context
@handle_errors
def sos_check_command(ctx, problem, tol, json_path):
    """Decide whether a polynomial is a sum of squares."""
    settings = ctx.obj['settings']
    problem_file = load_kind(problem, KIND_SOS_CHECK, KIND_POP)
    f = problem_file.problem if problem_file.kind == KIND_SOS_CHECK else problem_file.problem.f
    overrides = {'tol': tol} if tol is not None else {}
    outcome = sos_membership(f, SolverOptions.from_settings(settings, **overrides))

    diagnostic = None
    if isinstance(outcome, NotCertified):
        click.echo(f'NotCertified: {outcome.reason}')
        code = EXIT_NOT_CERTIFIED if outcome.status in NOT_CERTIFIED_STATUSES else EXIT_SOLVER
        diagnostic = outcome.reason
        results = outcome.to_dict()
    else:
        click.echo(f'SOS with {len(outcome.sigmas[0][1])} squares, '
                   f'residual {format_number(outcome.residual_norm)}')
        for factor in outcome.sigmas[0][1]:
            click.echo(f'    ({factor!r})^2')
        code = EXIT_OK
        results = dict(outcome.to_dict(), certified=True)
    finish(ctx, 'sos-check', problem_file, results, code, json_path, diagnostic=diagnostic)


@click.command('export-sdpa')
@click.argument('problem', type=click.Path(exists=True, dir_okay=False))
@click.option('--order', type=click.IntRange(min=0), required=True, help='Relaxation order.')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), required=True, help='Output file.')
@click.option('--side', type=click.Choice(['moment', 'sos']), default='moment',
              help='Which program of a polynomial optimization problem to export.')
@click.pass_context
@handle_errors
def export_sdpa_command(ctx, problem, order, out_path, side):
    """Write the order-d relaxation in SDPA sparse format."""
    problem_file = load_kind(problem, KIND_POP, KIND_GPM)
    if problem_file.kind == KIND_GPM:
        program = build_gpm_relaxation(problem_file.problem, order).program
    elif side == 'sos':
        program = build_dual_sos(problem_file.problem, order).program
    else:
        program = build_primal_relaxation(problem_file.problem, order).program
    write_sdpa(program, out_path)
    click.echo(f'wrote {out_path}: {program.num_constraints} constraints, {program.num_blocks} blocks')
    ctx.exit(EXIT_OK)


commands = [solve_command, sos_check_command, export_sdpa_command]
