"""
momentsos Command-Line Factory
"""
import logging
import sys

import click
from dotenv import load_dotenv

from momentsos.config import LOG_LEVELS, load_settings
from momentsos.errors import MomentSosError

# Load environment variables
load_dotenv()

__version__ = '1.0.0'


def create_cli():
    """Create and configure the command-line group."""

    @click.group(context_settings={'help_option_names': ['-h', '--help']})
    @click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
                  help='Logging level (defaults to MOMENTSOS_LOG_LEVEL).')
    @click.version_option(__version__, prog_name='momentsos')
    @click.pass_context
    def cli(ctx, log_level):
        """Moment-SOS relaxations for polynomial optimization and moment problems."""
        settings = load_settings()
        logging.basicConfig(level=(log_level or settings.log_level).upper(), stream=sys.stderr,
                            format='%(levelname)s %(name)s: %(message)s', force=True)
        ctx.obj = {'settings': settings}

    # Register command modules
    from momentsos.commands import gpm_commands, solve_commands

    for command in solve_commands.commands + gpm_commands.commands:
        cli.add_command(command)

    return cli


def main(argv=None):
    """Run the command line and return its exit code."""
    cli = create_cli()
    try:
        code = cli.main(args=argv, prog_name='momentsos', standalone_mode=False)
    except click.exceptions.Abort:
        click.echo('aborted', err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except MomentSosError as exc:
        click.echo(f'error [{exc.code}]: {exc.message}', err=True)
        return exc.exit_code
    return code if isinstance(code, int) else 0
