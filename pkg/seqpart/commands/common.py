from typing import Any, Dict, Optional
import logging

import click

from seqpart import SeqpartApp, configure_workers
from seqpart.models.base_model import ValidationError
from seqpart.models.criteria import EngineConfig, Method, MomentTolerances, StarSolverConfig, UniformityCriterion
from seqpart.models.distributions import MixtureSpec, PresetName, preset
from seqpart.models.geometry import AxisBox
from seqpart.utils.file_formats import read_spec_file
from seqpart.utils.response_handler import CommandResponse, EXIT_INVARIANCE
from seqpart.utils.validators import ParameterValidator

logger = logging.getLogger(__name__)


class InvarianceFailure(click.ClickException):
    exit_code = EXIT_INVARIANCE


class CountType(click.ParamType):
    """Entero ≥ 1 que acepta notación científica: -N 1e5."""
    name = 'count'

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            number = value
        else:
            try:
                number = ParameterValidator.parse_count(value, param.name if param else 'N')
            except ValidationError as e:
                self.fail(e.message, param, ctx)
        if number < 1:
            self.fail(f"debe ser al menos 1, se recibió {value!r}", param, ctx)
        return number


class CountListType(click.ParamType):
    """Lista de enteros separados por comas ('1e4,1e5')."""
    name = 'counts'

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return list(value)
        return [CountType().convert(item.strip(), param, ctx) for item in str(value).split(',') if item.strip()]


class MethodListType(click.ParamType):
    """Métodos separados por comas ('dsp-mix,msp')."""
    name = 'methods'

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return list(value)
        try:
            names = ParameterValidator.parse_choices(value, Method.get_choices(), '--methods')
        except ValidationError as e:
            self.fail(e.message, param, ctx)
        return [Method.parse(name) for name in names]


class FloatGridType(click.ParamType):
    """Rejilla de valores: '0.05,0.1' o 'inicio:fin:paso'."""
    name = 'grid'

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return list(value)
        try:
            return ParameterValidator.parse_float_list(value, '--grid')
        except ValidationError as e:
            self.fail(e.message, param, ctx)


COUNT = CountType()
COUNT_LIST = CountListType()
METHOD_LIST = MethodListType()
FLOAT_GRID = FloatGridType()


def tuning_options(f):
    """Parámetros del particionado sin el método (valores por defecto desde la configuración)."""
    options = [
        click.option('--theta', type=float, default=None, help='Umbral θ de discrepancia (0.1)'),
        click.option('-m', 'm', type=int, default=None, help='Candidatos por eje (10)'),
        click.option('--eps1', type=float, default=None, help='Tolerancia de medias (0.1)'),
        click.option('--eps2', type=float, default=None, help='Tolerancia de varianzas (0.1)'),
        click.option('--eps3', type=float, default=None, help='Tolerancia de covarianzas (0.1)'),
        click.option('--n-min', 'n_min', type=int, default=None, help='Tamaño mínimo de hoja (10)'),
        click.option('--max-depth', 'max_depth', type=int, default=None, help='Profundidad máxima (50)'),
        click.option('--max-leaves', 'max_leaves', type=COUNT, default=None, help='Límite de hojas (1e6)'),
        click.option('--workers', type=int, default=None, help='Hilos de los kernels numba'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def engine_options(f):
    f = tuning_options(f)
    return click.option('--method', type=click.Choice(Method.get_choices(), case_sensitive=False),
                        default='dsp-mix', show_default=True, help='Criterio de uniformidad')(f)


def engine_params(app_config: Dict[str, Any], kwargs: Dict[str, Any]) -> Dict[str, Any]:
    """Combina los argumentos con los valores por defecto de la configuración."""
    eps = app_config.get('DEFAULT_EPS', 0.1)
    params = {
        'method': Method.parse(kwargs.get('method') or 'dsp-mix').value,
        'theta': kwargs.get('theta') if kwargs.get('theta') is not None else app_config.get('DEFAULT_THETA', 0.1),
        'm': kwargs.get('m') if kwargs.get('m') is not None else app_config.get('DEFAULT_M', 10),
        'eps1': kwargs.get('eps1') if kwargs.get('eps1') is not None else eps,
        'eps2': kwargs.get('eps2') if kwargs.get('eps2') is not None else eps,
        'eps3': kwargs.get('eps3') if kwargs.get('eps3') is not None else eps,
        'n_min': kwargs.get('n_min') if kwargs.get('n_min') is not None else app_config.get('DEFAULT_N_MIN', 10),
        'max_depth': (kwargs.get('max_depth') if kwargs.get('max_depth') is not None
                      else app_config.get('DEFAULT_MAX_DEPTH', 50)),
        'max_leaves': (kwargs.get('max_leaves') if kwargs.get('max_leaves') is not None
                       else app_config.get('DEFAULT_MAX_LEAVES', 1_000_000)),
    }
    errors = ParameterValidator.validate_engine_params(params)
    if errors:
        raise click.UsageError("; ".join(errors.values()))
    return params


def star_config(app_config: Dict[str, Any], seed: Optional[int] = None) -> StarSolverConfig:
    return StarSolverConfig(
        exact_budget=app_config.get('STAR_EXACT_BUDGET', 200_000_000),
        restarts=app_config.get('STAR_RESTARTS', 100),
        iterations=app_config.get('STAR_ITERATIONS', 1000),
        threshold_start=app_config.get('STAR_THRESHOLD_START', 1e-2),
        seed=app_config.get('STAR_SEED', 0) if seed is None else seed,
    )


def build_criterion(params: Dict[str, Any], app_config: Dict[str, Any],
                    seed: Optional[int] = None) -> UniformityCriterion:
    return UniformityCriterion.for_method(
        Method.parse(params['method']),
        theta=params['theta'],
        tol=MomentTolerances(params['eps1'], params['eps2'], params['eps3']),
        star=star_config(app_config, seed),
    )


def build_engine(params: Dict[str, Any]) -> EngineConfig:
    return EngineConfig(m=params['m'], n_min=params['n_min'],
                        max_depth=params['max_depth'], max_leaves=params['max_leaves'])


def apply_workers(app, workers: Optional[int]) -> int:
    if workers is None:
        return app.config.get('WORKERS', 1)
    if workers < 1:
        raise click.UsageError("--workers debe ser al menos 1")
    app.config['WORKERS'] = configure_workers(workers)
    return app.config['WORKERS']


def spec_options(f):
    options = [
        click.option('--preset', type=click.Choice(PresetName.get_choices()), default=None,
                     help='Distribución de referencia incluida'),
        click.option('--spec', 'spec_path', type=click.Path(dir_okay=False), default=None,
                     help='Archivo JSON con una especificación propia'),
        click.option('--dim', type=int, default=None, help="Dimensión de los presets 'Nd'"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def resolve_spec(preset_name: Optional[str], spec_path: Optional[str], dim: Optional[int],
                 required: bool = True) -> Optional[MixtureSpec]:
    if preset_name and spec_path:
        raise click.UsageError("Use --preset o --spec, no ambos")
    if spec_path:
        return read_spec_file(spec_path)
    if preset_name:
        return preset(preset_name, dim)
    if required:
        raise click.UsageError("Se requiere --preset o --spec")
    return None


def parse_domain(text: Optional[str], dim: int) -> AxisBox:
    """'lo1,lo2:hi1,hi2'; por defecto el cubo unidad."""
    if not text:
        return AxisBox.unit(dim)
    try:
        lo_text, hi_text = text.split(':')
        lo = [float(v) for v in lo_text.split(',')]
        hi = [float(v) for v in hi_text.split(',')]
    except ValueError as e:
        raise click.UsageError(f"--domain inválido {text!r}; formato 'lo1,lo2:hi1,hi2'") from e
    return AxisBox(lo, hi)


def emit(response, as_json: bool = False) -> None:
    payload, _ = response
    click.echo(CommandResponse.render(payload, as_json))


# Inyecta la aplicación creada por el grupo como primer argumento
pass_app = click.make_pass_decorator(SeqpartApp)
