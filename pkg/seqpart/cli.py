"""
Punto de entrada de la línea de comandos.

Códigos de salida: 0 éxito, 1 error de uso, 2 error de datos o validación,
3 fallo de la verificación de invarianzas.
"""
import logging
import os
import sys

import click

from config import config
from seqpart import TOOL_NAME, __version__, create_app
from seqpart.commands.bench import bench_cmd, sweep_cmd
from seqpart.commands.estimate import estimate_cmd, evaluate_cmd
from seqpart.commands.invariance import check_invariance_cmd
from seqpart.commands.sample import sample_cmd
from seqpart.models.base_model import ValidationError
from seqpart.utils.response_handler import EXIT_DATA, EXIT_OK, EXIT_USAGE, CommandResponse

logger = logging.getLogger(__name__)


class SeqpartGroup(click.Group):
    """Grupo que traduce las excepciones a los códigos de salida de la herramienta."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else EXIT_OK
        except click.UsageError as e:
            e.show()
            code = EXIT_USAGE
        except click.ClickException as e:
            e.show()
            code = e.exit_code
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_USAGE
        except ValidationError as e:
            payload, code = CommandResponse.from_exception(e)
            click.echo(CommandResponse.render(payload), err=True)
        except OSError as e:
            logger.error(f"Error de E/S: {e}")
            payload, code = CommandResponse.error(str(e), EXIT_DATA, "IO_ERROR")
            click.echo(CommandResponse.render(payload), err=True)

        if standalone_mode:
            sys.exit(code)
        return code


@click.group(cls=SeqpartGroup)
@click.option('--env', type=click.Choice(sorted(config)), default=lambda: os.getenv('SEQPART_ENV', 'development'),
              help='Configuración (development, benchmark, testing)')
@click.version_option(__version__, prog_name=TOOL_NAME)
@click.pass_context
def cli(ctx, env):
    """Estimación de densidades constantes a trozos por particiones secuenciales."""
    ctx.obj = create_app(env)


cli.add_command(sample_cmd)
cli.add_command(estimate_cmd)
cli.add_command(evaluate_cmd)
cli.add_command(bench_cmd)
cli.add_command(sweep_cmd)
cli.add_command(check_invariance_cmd)


def main():
    cli.main(prog_name=TOOL_NAME)
