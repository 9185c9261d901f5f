import logging

import click

from seqpart.commands.common import COUNT, apply_workers, emit, pass_app, resolve_spec, spec_options
from seqpart.models.distributions import SamplerSettings
from seqpart.utils.file_formats import RunManifest, write_manifest, write_samples
from seqpart.utils.response_handler import CommandResponse
from seqpart.utils.validators import PerformanceLogger

logger = logging.getLogger(__name__)


@click.command('sample')
@spec_options
@click.option('-N', 'n', type=COUNT, required=True, help='Número de muestras (admite 1e5)')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('-o', '--out', 'out_path', type=click.Path(dir_okay=False), required=True)
@click.option('--format', 'fmt', type=click.Choice(['csv', 'binary']), default=None,
              help='Por defecto según la extensión (.bin/.dsp → binario)')
@click.option('--no-header', is_flag=True, default=False, help='CSV sin cabecera x1..xd')
@click.option('--workers', type=int, default=None)
@click.option('--json', 'as_json', is_flag=True, default=False)
@pass_app
@PerformanceLogger.log_command_performance
def sample_cmd(app, preset, spec_path, dim, n, seed, out_path, fmt, no_header, workers, as_json):
    """Genera N muestras sembradas de una distribución de referencia."""
    spec = resolve_spec(preset, spec_path, dim)
    effective_workers = apply_workers(app, workers)

    with PerformanceLogger.log_stage(f"sample {spec.name} N={n}"):
        samples = SamplerSettings.from_config(app.config).draw(spec, n, seed)
    written_fmt = write_samples(samples, out_path, fmt, header=not no_header)

    manifest = RunManifest(
        command='sample',
        preset=preset,
        spec_path=spec_path,
        params={'N': n, 'dim': spec.dim, 'format': written_fmt, 'header': not no_header},
        seed=seed,
        workers=effective_workers,
    )
    write_manifest(manifest, out_path)
    emit(CommandResponse.success(manifest.to_dict(), f"{n} muestras escritas en {out_path}"), as_json)
    return 0
