"""
Error L² relativo por cuadratura en los centros de las hojas y arnés de
experimentos (celdas de las tablas, barridos de parámetros, agregación).
"""
from dataclasses import dataclass, field, asdict, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple
import csv
import logging
import math
import time

import numpy as np

from seqpart.estimators.engine import estimate
from seqpart.models.base_model import BaseModel, ValidationError
from seqpart.models.criteria import EngineConfig, Method, MomentTolerances, StarSolverConfig, UniformityCriterion
from seqpart.models.distributions import MixtureSpec, ReferenceDensity, SamplerSettings, preset
from seqpart.models.partition import PiecewiseConstantDensity
from seqpart.utils.validators import PerformanceLogger

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['method', 'spec', 'd', 'N', 'seed', 'error', 'wall_time_s', 'leaves']
SWEEP_COLUMNS = CSV_COLUMNS + ['param', 'value']
SWEEP_PARAMS = ('theta', 'eps', 'N')

# Tabla → (preset, dimensiones)
TABLE_PRESETS: Dict[int, Tuple[str, Tuple[int, ...]]] = {
    1: ('gauss2d', (2,)),
    2: ('gaussmix2d', (2,)),
    3: ('betamix2d', (2,)),
    4: ('gaussmixNd', (2, 3, 4, 5, 6)),
    5: ('betamixNd', (2, 3, 4, 5, 6)),
}


@dataclass(frozen=True)
class BenchRecord(BaseModel):
    """Una celda de experimento: método, distribución, d, N, semilla, E₂, tiempo y hojas."""
    method: str
    spec: str
    d: int
    N: int
    seed: int
    error: float
    wall_time: float
    leaf_count: int
    param: Optional[str] = None
    value: Optional[float] = None

    def _validate_instance(self):
        if not self.error >= 0:
            raise ValidationError("El error E₂ no puede ser negativo")
        if not self.wall_time > 0:
            raise ValidationError("El tiempo medido debe ser positivo")

    def to_row(self, with_sweep: bool = False) -> List[Any]:
        row = [self.method, self.spec, self.d, self.N, self.seed,
               repr(self.error), repr(self.wall_time), self.leaf_count]
        if with_sweep:
            row += [self.param or '', '' if self.value is None else repr(self.value)]
        return row

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ====================================================================
# ERROR L²
# ====================================================================

def l2_relative_error(pcd: PiecewiseConstantDensity, ref: ReferenceDensity) -> float:
    """
    E₂ = sqrt(Σ_l (c_l − p(x_c))²|Ω_l|) / sqrt(Σ_l p(x_c)²|Ω_l|), ambas normas
    sobre la misma partición y con x_c el centro de cada hoja.
    """
    domain = ref.domain
    if pcd.domain.dim != domain.dim or not (
            np.array_equal(pcd.domain.lo, domain.lo) and np.array_equal(pcd.domain.hi, domain.hi)):
        raise ValidationError("El estimador y la referencia no comparten el dominio",
                              {'estimator': pcd.domain.to_dict(), 'reference': domain.to_dict()})
    centers = np.array([leaf.box.center for leaf in pcd.leaves])
    volumes = np.array([leaf.box.volume for leaf in pcd.leaves])
    constants = np.array([leaf.c for leaf in pcd.leaves])
    reference = ref.pdf_many(centers)

    denominator = float(np.sum(reference * reference * volumes))
    if denominator <= 0.0:
        raise ValidationError("La referencia se anula en todos los centros de hoja")
    numerator = float(np.sum((constants - reference) ** 2 * volumes))
    return math.sqrt(numerator) / math.sqrt(denominator)


# ====================================================================
# CELDAS DE EXPERIMENTO
# ====================================================================

@dataclass(frozen=True)
class BenchContext:
    """Parámetros fijos de una celda; `sweep` reemplaza uno de ellos."""
    spec: Any
    method: Method
    n: int
    seed: int = 0
    theta: float = 0.1
    tol: MomentTolerances = field(default_factory=MomentTolerances)
    engine: EngineConfig = field(default_factory=EngineConfig)
    star: StarSolverConfig = field(default_factory=StarSolverConfig)
    reference: Optional[ReferenceDensity] = None
    settings: SamplerSettings = field(default_factory=SamplerSettings)


def run_benchmark(spec: MixtureSpec, method: Method, n: int, seed: int,
                  theta: float = 0.1, tol: Optional[MomentTolerances] = None,
                  engine: Optional[EngineConfig] = None, star: Optional[StarSolverConfig] = None,
                  reference: Optional[ReferenceDensity] = None,
                  settings: Optional[SamplerSettings] = None,
                  clock: Callable[[], float] = time.perf_counter) -> BenchRecord:
    """
    Muestrea, estima y evalúa una celda. Solo se cronometra `estimate()`.

    La semilla de la celda fija tanto el muestreo como la búsqueda heurística
    de la discrepancia estrella. `settings` fija los presupuestos del muestreo
    y del normalizador (por defecto los de `Config`).
    """
    settings = settings or SamplerSettings()
    star = replace(star or StarSolverConfig(), seed=seed)
    criterion = UniformityCriterion.for_method(method, theta=theta, tol=tol, star=star)
    with PerformanceLogger.log_stage(f"sample {spec.name} N={n} seed={seed}"):
        samples = settings.draw(spec, n, seed)
    if reference is None:
        with PerformanceLogger.log_stage(f"normalizer {spec.name}"):
            reference = settings.reference(spec)

    start = clock()
    pcd = estimate(samples, spec.domain, criterion, engine)
    elapsed = clock() - start

    with PerformanceLogger.log_stage(f"l2 error {spec.name}"):
        error = l2_relative_error(pcd, reference)
    record = BenchRecord(method=method.label, spec=spec.name, d=spec.dim, N=n, seed=seed,
                         error=error, wall_time=elapsed, leaf_count=pcd.leaf_count)
    logger.info(f"{record.method} {record.spec} d={record.d} N={n} seed={seed}: "
                f"E2={error:.4f} t={elapsed:.3f}s hojas={pcd.leaf_count}")
    return record


def _run_context(ctx: BenchContext, clock: Callable[[], float]) -> BenchRecord:
    return run_benchmark(ctx.spec, ctx.method, ctx.n, ctx.seed, theta=ctx.theta, tol=ctx.tol,
                         engine=ctx.engine, star=ctx.star, reference=ctx.reference,
                         settings=ctx.settings, clock=clock)


def sweep(parameter: str, grid: Sequence[float], context: BenchContext,
          clock: Callable[[], float] = time.perf_counter) -> List[BenchRecord]:
    """Una celda por valor de la malla, variando theta, eps (ε₁=ε₂=ε₃) o N."""
    if parameter not in SWEEP_PARAMS:
        raise ValidationError(f"Parámetro de barrido desconocido '{parameter}'. Opciones: {', '.join(SWEEP_PARAMS)}")
    if len(grid) == 0:
        raise ValidationError("La malla del barrido no puede estar vacía")
    if context.reference is None:
        context = replace(context, reference=context.settings.reference(context.spec))

    records = []
    for value in grid:
        if parameter == 'theta':
            ctx = replace(context, theta=float(value))
        elif parameter == 'eps':
            ctx = replace(context, tol=MomentTolerances.uniform(float(value)))
        else:
            ctx = replace(context, n=int(value))
        record = _run_context(ctx, clock)
        records.append(replace(record, param=parameter, value=float(value)))
    return records


def bench_table(table: int, ns: Sequence[int], methods: Sequence[Method], seeds: Sequence[int],
                dims: Optional[Sequence[int]] = None, theta: float = 0.1,
                tol: Optional[MomentTolerances] = None, engine: Optional[EngineConfig] = None,
                star: Optional[StarSolverConfig] = None, settings: Optional[SamplerSettings] = None,
                clock: Callable[[], float] = time.perf_counter) -> List[BenchRecord]:
    """Producto cruzado dimensiones × N × métodos × semillas de una tabla."""
    settings = settings or SamplerSettings()
    if table not in TABLE_PRESETS:
        raise ValidationError(f"Tabla desconocida {table}; opciones 1..5")
    name, table_dims = TABLE_PRESETS[table]
    if dims:
        unknown = sorted(set(dims) - set(table_dims))
        if unknown:
            raise ValidationError(f"Dimensiones {unknown} no pertenecen a la tabla {table}")
        table_dims = tuple(d for d in table_dims if d in set(dims))

    records = []
    for d in table_dims:
        spec = preset(name, d if name.endswith('Nd') else None)
        reference = settings.reference(spec)
        for n in ns:
            for method in methods:
                for seed in seeds:
                    records.append(run_benchmark(spec, method, n, seed, theta=theta, tol=tol,
                                                 engine=engine, star=star, reference=reference,
                                                 settings=settings, clock=clock))
    return records


# ====================================================================
# AGREGACIÓN Y SALIDA
# ====================================================================

@dataclass(frozen=True)
class SummaryRow:
    method: str
    spec: str
    d: int
    N: int
    param: Optional[str]
    value: Optional[float]
    seeds: int
    error_mean: float
    error_std: float
    time_mean: float
    time_std: float
    leaves_mean: float


def _mean_std(values: List[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.shape[0] > 1 else 0.0
    return float(arr.mean()), std


def summarize(records: Iterable[BenchRecord]) -> List[SummaryRow]:
    """Media ± desviación estándar muestral sobre semillas, por celda."""
    groups: Dict[tuple, List[BenchRecord]] = {}
    for record in records:
        key = (record.method, record.spec, record.d, record.N, record.param, record.value)
        groups.setdefault(key, []).append(record)

    rows = []
    for key, group in groups.items():
        error_mean, error_std = _mean_std([r.error for r in group])
        time_mean, time_std = _mean_std([r.wall_time for r in group])
        rows.append(SummaryRow(*key, seeds=len(group), error_mean=error_mean, error_std=error_std,
                               time_mean=time_mean, time_std=time_std,
                               leaves_mean=float(np.mean([r.leaf_count for r in group]))))
    return rows


def write_records_csv(records: Iterable[BenchRecord], stream: TextIO, with_sweep: bool = False) -> None:
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(SWEEP_COLUMNS if with_sweep else CSV_COLUMNS)
    for record in records:
        writer.writerow(record.to_row(with_sweep))


def format_table(rows: Sequence[SummaryRow]) -> str:
    """Tabla de texto alineada: E₂ y tiempo como media ± desviación."""
    header = ['method', 'spec', 'd', 'N', 'param', 'seeds', 'E2', 'time_s', 'leaves']
    body = []
    for row in rows:
        param = '' if row.param is None else f"{row.param}={row.value:g}"
        body.append([
            row.method, row.spec, str(row.d), f"{row.N:.0e}" if row.N >= 10_000 else str(row.N),
            param, str(row.seeds),
            f"{row.error_mean:.4f} ± {row.error_std:.4f}",
            f"{row.time_mean:.3f} ± {row.time_std:.3f}",
            f"{row.leaves_mean:.1f}",
        ])
    widths = [max(len(line[k]) for line in [header] + body) for k in range(len(header))]
    lines = ['  '.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
             for line in [header] + body]
    return '\n'.join(lines)
