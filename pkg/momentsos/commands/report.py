"""
Report Builder - Machine-readable reports and human summaries of command results
"""
import functools
import json
import logging
import math

import click

from momentsos.errors import MomentSosError
from momentsos.utils.serialization import dumps

logger = logging.getLogger(__name__)

REPORT_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_NOT_CERTIFIED = 4


def format_number(value):
    """Nine significant digits; non-finite values spelled out."""
    if value is None:
        return '-'
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return f'{value:.9g}'


def format_point(point):
    return '(' + ', '.join(format_number(c) for c in point) + ')'


def build_report(command, problem_file, results, exit_code):
    """Report payload; contains no timings so equal inputs give equal bytes."""
    return {
        'report_version': REPORT_VERSION,
        'command': command,
        'problem': problem_file.to_dict() if problem_file is not None else None,
        'results': results,
        'exit_code': exit_code,
    }


def write_report(path, report):
    text = dumps(report)
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(text + '\n')
    logger.info('wrote report %s', path)
    return text


def echo_atoms(measure, indent='    '):
    for point, weight in measure.atoms:
        click.echo(f'{indent}atom {format_point(point)}  weight {format_number(weight)}')


def handle_errors(func):
    """Turn library errors into a diagnostic on stderr and the error's exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except MomentSosError as exc:
            click.echo(json.dumps(exc.to_dict(), sort_keys=True), err=True)
            ctx.exit(exc.exit_code)

    return wrapper


EXIT_REASONS = {
    EXIT_USAGE: 'usage',
    EXIT_PARSE: 'parse',
    EXIT_SOLVER: 'solver',
    EXIT_NOT_CERTIFIED: 'not-certified',
}


def finish(ctx, command, problem_file, results, code, json_path=None, diagnostic=None):
    """Write the report if asked, then exit; non-zero exits leave a diagnostic on stderr."""
    if json_path:
        write_report(json_path, build_report(command, problem_file, results, code))
    if code != EXIT_OK:
        payload = {'error': diagnostic or f'{command} failed', 'code': EXIT_REASONS.get(code, 'error')}
        click.echo(json.dumps(payload, sort_keys=True), err=True)
    ctx.exit(code)
