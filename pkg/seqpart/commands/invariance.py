import logging

import click

from seqpart.commands.common import InvarianceFailure, emit
from seqpart.estimators.invariance import run_invariance_suite
from seqpart.utils.response_handler import CommandResponse
from seqpart.utils.validators import PerformanceLogger

logger = logging.getLogger(__name__)

_COLOURS = {'[PASS]': 'green', '[FAIL]': 'red', 'warning:': 'yellow'}


def _styled(line: str) -> str:
    for marker, colour in _COLOURS.items():
        if marker in line:
            return click.style(line, fg=colour)
    if line in ('PASSED', 'FAILED'):
        return click.style(line, fg='green' if line == 'PASSED' else 'red', bold=True)
    return line


@click.command('check-invariance')
@click.option('--trials', type=click.IntRange(min=0), default=1000, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--json', 'as_json', is_flag=True, default=False)
@PerformanceLogger.log_command_performance
def check_invariance_cmd(trials, seed, as_json):
    """Verifica las invarianzas de la discrepancia de mezcla y del test de momentos."""
    report = run_invariance_suite(trials, seed)
    if as_json:
        response = (CommandResponse.success(report.to_dict(), "Invarianzas verificadas") if report.passed
                    else CommandResponse.invariance_failure(report.to_dict()))
        emit(response, True)
    else:
        for line in report.to_text().splitlines():
            click.echo(_styled(line))
    if not report.passed:
        raise InvarianceFailure(f"Falló la verificación de invarianzas (seed={seed})")
    return 0
