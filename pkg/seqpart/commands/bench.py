from dataclasses import replace
import io
import logging

import click

from seqpart.commands.common import (
    COUNT, COUNT_LIST, FLOAT_GRID, METHOD_LIST, apply_workers, build_engine, engine_params, pass_app, resolve_spec,
    spec_options, star_config, tuning_options
)
from seqpart.estimators.evaluation import (
    SWEEP_PARAMS, TABLE_PRESETS, BenchContext, bench_table, format_table, summarize, sweep,
    write_records_csv
)
from seqpart.models.base_model import ValidationError
from seqpart.models.criteria import Method, MomentTolerances
from seqpart.models.distributions import SamplerSettings
from seqpart.utils.validators import ParameterValidator, PerformanceLogger

logger = logging.getLogger(__name__)


def _emit_records(records, out_path, with_sweep: bool) -> None:
    """CSV al archivo (y la tabla resumen a stdout) o CSV a stdout (y la tabla a stderr)."""
    table = format_table(summarize(records))
    if out_path:
        with open(out_path, 'w', encoding='utf-8', newline='') as handle:
            write_records_csv(records, handle, with_sweep)
        click.echo(table)
        logger.info(f"{len(records)} filas escritas en {out_path}")
    else:
        buffer = io.StringIO()
        write_records_csv(records, buffer, with_sweep)
        click.echo(buffer.getvalue(), nl=False)
        click.echo(table, err=True)


@click.command('bench')
@click.option('--table', 'table', type=click.IntRange(1, len(TABLE_PRESETS)), required=True,
              help='Tabla de experimentos (1..5)')
@click.option('-N', 'ns', type=COUNT_LIST, required=True, help="Tamaños de muestra: '1e4,1e5'")
@click.option('--methods', type=METHOD_LIST, default='dsp-mix,msp', show_default=True, help='Métodos separados por comas')
@click.option('--seeds', type=COUNT, default=5, show_default=True, help='Número de semillas por celda')
@click.option('--seed-start', type=int, default=0, show_default=True)
@click.option('--dims', type=COUNT_LIST, default=None, help="Restringe las dimensiones de las tablas 4 y 5")
@click.option('-o', '--out', 'out_path', type=click.Path(dir_okay=False), default=None,
              help='CSV de resultados (por defecto a stdout)')
@tuning_options
@pass_app
@PerformanceLogger.log_command_performance
def bench_cmd(app, table, ns, methods, seeds, seed_start, dims, out_path, theta, m, eps1, eps2, eps3,
              n_min, max_depth, max_leaves, workers):
    """Ejecuta el producto cruzado dimensiones × N × métodos × semillas de una tabla."""
    params = engine_params(app.config, locals())
    apply_workers(app, workers)
    seed_list = list(range(seed_start, seed_start + seeds))

    records = bench_table(
        table, ns, methods, seed_list,
        dims=dims,
        theta=params['theta'],
        tol=MomentTolerances(params['eps1'], params['eps2'], params['eps3']),
        engine=build_engine(params),
        star=star_config(app.config),
        settings=SamplerSettings.from_config(app.config),
    )
    _emit_records(records, out_path, with_sweep=False)
    return 0


@click.command('sweep')
@spec_options
@click.option('--method', type=click.Choice(Method.get_choices(), case_sensitive=False),
              default='msp', show_default=True)
@click.option('--param', 'parameter', type=click.Choice(SWEEP_PARAMS), required=True)
@click.option('--grid', type=FLOAT_GRID, required=True, help="Valores separados por comas o 'inicio:fin:paso'")
@click.option('-N', 'n', type=COUNT, default=100_000, show_default=True, help='N fijo (salvo --param N)')
@click.option('--seeds', type=COUNT, default=5, show_default=True)
@click.option('--seed-start', type=int, default=0, show_default=True)
@click.option('-o', '--out', 'out_path', type=click.Path(dir_okay=False), default=None)
@tuning_options
@pass_app
@PerformanceLogger.log_command_performance
def sweep_cmd(app, preset, spec_path, dim, method, parameter, grid, n, seeds, seed_start, out_path,
              theta, m, eps1, eps2, eps3, n_min, max_depth, max_leaves, workers):
    """Barrido de theta, eps o N con el resto de parámetros fijos."""
    params = engine_params(app.config, locals())
    apply_workers(app, workers)
    spec = resolve_spec(preset, spec_path, dim)
    values = grid
    if parameter == 'N':
        try:
            values = [float(ParameterValidator.parse_count(v, '--grid')) for v in grid]
        except ValidationError as e:
            raise click.BadParameter(e.message, param_hint='--grid') from e

    settings = SamplerSettings.from_config(app.config)
    with PerformanceLogger.log_stage(f"normalizer {spec.name}"):
        reference = settings.reference(spec)
    context = BenchContext(
        spec=spec,
        method=Method.parse(params['method']),
        n=n,
        theta=params['theta'],
        tol=MomentTolerances(params['eps1'], params['eps2'], params['eps3']),
        engine=build_engine(params),
        star=star_config(app.config),
        reference=reference,
        settings=settings,
    )
    records = []
    for seed in range(seed_start, seed_start + seeds):
        records.extend(sweep(parameter, values, replace(context, seed=seed)))
    _emit_records(records, out_path, with_sweep=True)
    return 0
