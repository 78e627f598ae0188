"""
GPM Commands - Generalized moment problems and their applications
"""
import time

import click

from momentsos.commands.report import (
    EXIT_NOT_CERTIFIED,
    EXIT_OK,
    EXIT_SOLVER,
    echo_atoms,
    finish,
    format_number,
    handle_errors,
)
from momentsos.commands.solve_commands import load_kind
from momentsos.schemas.problem_schema import KIND_GPM, KIND_PROB_BOUND, KIND_SUPERRES, KIND_VOLUME
from momentsos.services.application_service import probability_bound, super_resolution, volumes
from momentsos.services.conic_solver import SolverOptions, solve
from momentsos.services.gpm_service import STATUS_OPTIMAL, build_gpm_relaxation

json_option = click.option('--json', 'json_path', type=click.Path(dir_okay=False), default=None,
                           help='Write the machine-readable report here.')
tol_option = click.option('--tol', type=click.FloatRange(min=0, min_open=True), default=None,
                          help='Solver tolerance.')


def solver_options(ctx, tol):
    overrides = {'tol': tol} if tol is not None else {}
    return SolverOptions.from_settings(ctx.obj['settings'], **overrides)


@click.command('gpm')
@click.argument('problem', type=click.Path(exists=True, dir_okay=False))
@click.option('--order', type=click.IntRange(min=0), required=True, help='Relaxation order.')
@tol_option
@json_option
@click.pass_context
@handle_errors
def gpm_command(ctx, problem, order, tol, json_path):
    """Solve one level of a generalized moment problem."""
    problem_file = load_kind(problem, KIND_GPM)
    relaxation = build_gpm_relaxation(problem_file.problem, order)
    solution = solve(relaxation.program, solver_options(ctx, tol))
    status = relaxation.status(solution)
    bound = relaxation.value(solution)
    click.echo(f'd={order}  bound={format_number(bound)}  [{status}]')
    results = {'d': order, 'bound': bound, 'status': status, 'solver': solution.to_dict()}
    if status == STATUS_OPTIMAL:
        results['moments'] = [relaxation.moments(solution, i).to_records()
                              for i in range(len(problem_file.problem.measures))]
        results['equality_multipliers'] = {str(k): v for k, v in
                                           relaxation.equality_multipliers(solution).items()}
    finish(ctx, 'gpm', problem_file, results,
           EXIT_OK if status == STATUS_OPTIMAL else EXIT_SOLVER, json_path,
           diagnostic=f'relaxation of order {order} ended with status {status}')


@click.command('volume')
@click.argument('problem', type=click.Path(exists=True, dir_okay=False))
@click.option('--order-max', type=click.IntRange(min=1), required=True, help='Highest relaxation order.')
@click.option('--order-min', type=click.IntRange(min=1), default=None, help='Lowest relaxation order.')
@click.option('--stokes/--no-stokes', default=False, help='Add Stokes constraints.')
@tol_option
@json_option
@click.pass_context
@handle_errors
def volume_command(ctx, problem, order_max, order_min, stokes, tol, json_path):
    """Upper bounds on the volume of a semialgebraic set inside a box."""
    problem_file = load_kind(problem, KIND_VOLUME)
    data = problem_file.problem
    lowest = max(order_min or 1, max([1] + [(g.degree + 1) // 2 for g in data['set'].polynomials]))
    started = time.perf_counter()
    sequence = volumes(data['set'], data['box'], range(lowest, order_max + 1), stokes,
                       solver_options(ctx, tol))
    for entry in sequence.entries:
        click.echo(f'd={entry.d}  volume <= {format_number(entry.bound)}  [{entry.status}]')
    click.echo(f'time {time.perf_counter() - started:.3f}s')
    failed = [e.d for e in sequence.entries if e.status != STATUS_OPTIMAL]
    ok = bool(sequence.entries) and not failed
    finish(ctx, 'volume', problem_file, dict(sequence.to_dict(), stokes=stokes),
           EXIT_OK if ok else EXIT_SOLVER, json_path,
           diagnostic=f'no optimal bound at orders {failed}')


@click.command('prob-bound')
@click.argument('problem', type=click.Path(exists=True, dir_okay=False))
@click.option('--order', type=click.IntRange(min=1), required=True, help='Relaxation order.')
@click.option('--direction', type=click.Choice(['upper', 'lower']), default=None,
              help='Override the bound direction of the file.')
@tol_option
@json_option
@click.pass_context
@handle_errors
def prob_bound_command(ctx, problem, order, direction, tol, json_path):
    """Bound Prob(Z in event) over distributions with the given moments."""
    problem_file = load_kind(problem, KIND_PROB_BOUND)
    data = problem_file.problem
    direction = direction or data['direction']
    entry = probability_bound(data['moments'], data['support'], data['event'], order, direction,
                              solver_options(ctx, tol), seed=ctx.obj['settings'].seed)
    click.echo(f'd={order}  {direction} bound {format_number(entry.bound)}  [{entry.status}]')
    if entry.measure is not None:
        echo_atoms(entry.measure)
    finish(ctx, 'prob-bound', problem_file, dict(entry.to_dict(), direction=direction),
           EXIT_OK if entry.status == STATUS_OPTIMAL else EXIT_SOLVER, json_path,
           diagnostic=f'{direction} bound ended with status {entry.status}')


@click.command('superres')
@click.argument('problem', type=click.Path(exists=True, dir_okay=False))
@click.option('--order', type=click.IntRange(min=1), required=True, help='Relaxation order.')
@click.option('--seed', type=int, default=None, help='Seed of the extraction combination weights.')
@tol_option
@json_option
@click.pass_context
@handle_errors
def superres_command(ctx, problem, order, seed, tol, json_path):
    """Recover a signed atomic measure of minimal total variation from its moments."""
    problem_file = load_kind(problem, KIND_SUPERRES)
    data = problem_file.problem
    seed = ctx.obj['settings'].seed if seed is None else seed
    result = super_resolution(data['moments'], data['t'], data['support'], order,
                              solver_options(ctx, tol), seed=seed)
    click.echo(f'd={order}  tv bound {format_number(result.tv_bound)}  [{result.status}]')
    if result.measure is not None:
        echo_atoms(result.measure)
    if result.message:
        click.echo(f'    note: {result.message}')
    if result.status != STATUS_OPTIMAL:
        code, diagnostic = EXIT_SOLVER, f'relaxation ended with status {result.status}'
    else:
        code = EXIT_OK if result.recovered else EXIT_NOT_CERTIFIED
        diagnostic = result.message or 'no atomic measure recovered'
    finish(ctx, 'superres', problem_file, result.to_dict(), code, json_path, diagnostic=diagnostic)


commands = [gpm_command, volume_command, prob_bound_command, superres_command]
