from dataclasses import replace
import logging
import time

import click

from seqpart.commands.common import (
    apply_workers, build_criterion, build_engine, emit, engine_options, engine_params,
    parse_domain, pass_app, resolve_spec, spec_options
)
from seqpart.estimators.engine import STRATEGIES, estimate
from seqpart.estimators.evaluation import l2_relative_error
from seqpart.models.distributions import SamplerSettings
from seqpart.utils.file_formats import RunManifest, read_partition, read_samples, write_manifest, write_partition
from seqpart.utils.response_handler import CommandResponse
from seqpart.utils.validators import PerformanceLogger

logger = logging.getLogger(__name__)


@click.command('estimate')
@click.argument('samples_path', type=click.Path(dir_okay=False))
@engine_options
@spec_options
@click.option('--domain', default=None, help="Dominio 'lo1,lo2:hi1,hi2' (por defecto el de --preset/--spec o [0,1]^d)")
@click.option('--seed', type=int, default=None, help='Semilla de la búsqueda heurística de D*')
@click.option('--strategy', type=click.Choice(STRATEGIES), default='fifo', show_default=True)
@click.option('-o', '--out', 'out_path', type=click.Path(dir_okay=False), required=True)
@click.option('--json', 'as_json', is_flag=True, default=False)
@pass_app
@PerformanceLogger.log_command_performance
def estimate_cmd(app, samples_path, method, theta, m, eps1, eps2, eps3, n_min, max_depth, max_leaves,
                 workers, preset, spec_path, dim, domain, seed, strategy, out_path, as_json):
    """Construye el estimador constante a trozos y escribe el archivo de partición."""
    params = engine_params(app.config, locals())
    effective_workers = apply_workers(app, workers)
    samples = read_samples(samples_path)

    spec = resolve_spec(preset, spec_path, dim if dim is not None else samples.dim, required=False)
    if domain is not None and spec is not None:
        raise click.UsageError("Use --domain o --preset/--spec, no ambos")
    box = spec.domain if spec is not None else parse_domain(domain, samples.dim)

    criterion = build_criterion(params, app.config, seed)
    start = time.perf_counter()
    pcd = estimate(samples, box, criterion, build_engine(params), strategy=strategy)
    elapsed = time.perf_counter() - start

    manifest = RunManifest(
        command='estimate',
        preset=preset,
        spec_path=spec_path or samples_path,
        method=params['method'],
        params={**params, 'strategy': strategy, 'star_seed': criterion.star.seed,
                'domain': box.to_dict()},
        seed=seed,
        workers=effective_workers,
    )
    write_partition(replace(pcd, method=params['method']), out_path, manifest)
    write_manifest(manifest, out_path)

    data = {'leaves': pcd.leaf_count, 'wall_time_s': round(elapsed, 6), 'truncated': pcd.truncated,
            'output': out_path}
    emit(CommandResponse.success(data, f"Partición con {pcd.leaf_count} hojas en {elapsed:.3f}s"), as_json)
    return 0


@click.command('evaluate')
@click.argument('partition_path', type=click.Path(dir_okay=False))
@spec_options
@click.option('--mc-samples', type=int, default=None, help='Muestras Monte Carlo para Z')
@click.option('--json', 'as_json', is_flag=True, default=False)
@pass_app
@PerformanceLogger.log_command_performance
def evaluate_cmd(app, partition_path, preset, spec_path, dim, mc_samples, as_json):
    """Imprime el error L² relativo E₂ de una partición frente a la referencia."""
    pcd, _ = read_partition(partition_path)
    spec = resolve_spec(preset, spec_path, dim if dim is not None else pcd.dim)
    settings = SamplerSettings.from_config(app.config)
    if mc_samples is not None:
        settings = replace(settings, mc_samples=mc_samples)
    reference = settings.reference(spec)
    error = l2_relative_error(pcd, reference)
    if as_json:
        emit(CommandResponse.success({'E2': error, 'leaves': pcd.leaf_count,
                                      'normalizer': reference.normalizer}, "E2"), True)
    else:
        click.echo(repr(error))
    return 0
