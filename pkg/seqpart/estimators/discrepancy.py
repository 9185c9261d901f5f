"""
Medidas de discrepancia sobre puntos del cubo unidad.

- Discrepancia de mezcla: forma cerrada O(n²d), kernel numba paralelo con
  reducción determinista (sumas parciales por fila combinadas con fsum).
- Discrepancia estrella: enumeración exacta de la malla crítica o búsqueda
  por aceptación de umbral (threshold accepting) sobre la misma malla.
- Cotas inferiores exactas por proyecciones 1-D, usadas por el motor para
  descartar hojas claramente no uniformes sin pagar el costo cuadrático.
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union
import logging
import math

import numba as nb
import numpy as np

from seqpart.models.base_model import (
    BaseModel, ValidationError, EmptySubsetError, OutOfDomainError, BudgetExceededError
)

logger = logging.getLogger(__name__)

DEFAULT_EXACT_BUDGET = 200_000_000
DEFAULT_RESTARTS = 100
DEFAULT_ITERATIONS = 1000
DEFAULT_THRESHOLD_START = 1e-2


# ====================================================================
# TIPOS
# ====================================================================

@dataclass(frozen=True, eq=False)
class UnitPointSet(BaseModel):
    """Conjunto de n ≥ 1 puntos en [0,1]^d (una fila por punto)."""
    points: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        object.__setattr__(self, 'points', np.ascontiguousarray(arr))
        self._validate_instance()

    def _validate_instance(self):
        if self.points.ndim != 2 or self.points.shape[1] < 1:
            raise ValidationError("Se esperaba una matriz n×d con d ≥ 1")
        if self.points.shape[0] == 0:
            raise EmptySubsetError("La uniformidad de un conjunto vacío no está definida")
        outside = ~np.all((self.points >= 0.0) & (self.points <= 1.0), axis=1)
        if np.any(outside):
            row = int(np.argmax(outside))
            raise OutOfDomainError(
                f"El punto {self.points[row].tolist()} no está en el cubo unidad", row=row + 1
            )

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'dim': self.dim}


@dataclass(frozen=True)
class StarDiscrepancyEstimate(BaseModel):
    value: float
    is_exact: bool
    iterations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {'value': self.value, 'is_exact': self.is_exact, 'iterations': self.iterations}


PointsLike = Union[UnitPointSet, np.ndarray]


def _as_unit(pts: PointsLike) -> UnitPointSet:
    return pts if isinstance(pts, UnitPointSet) else UnitPointSet(pts)


# ====================================================================
# DISCREPANCIA DE MEZCLA
# ====================================================================

@nb.njit(cache=True, parallel=True)
def _mixture_row_terms(pts):
    n, d = pts.shape
    centred = np.empty((n, d))
    for i in range(n):
        for j in range(d):
            centred[i, j] = abs(pts[i, j] - 0.5)

    single = np.empty(n)
    pairs = np.empty(n)
    for i in nb.prange(n):
        prod_single = 1.0
        prod_diag = 1.0
        for j in range(d):
            a = centred[i, j]
            prod_single *= 5.0 / 3.0 - 0.25 * a - 0.25 * a * a
            prod_diag *= 15.0 / 8.0 - 0.5 * a
        single[i] = prod_single

        # Mitad superior del doble sumatorio, con compensación de Kahan
        acc = 0.0
        comp = 0.0
        for k in range(i + 1, n):
            term = 1.0
            for j in range(d):
                diff = abs(pts[i, j] - pts[k, j])
                term *= (15.0 / 8.0 - 0.25 * centred[i, j] - 0.25 * centred[k, j]
                         - 0.75 * diff + 0.5 * diff * diff)
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        pairs[i] = prod_diag + 2.0 * acc
    return single, pairs


def mixture_discrepancy_squared(pts: PointsLike) -> float:
    """D^mix² antes del recorte en cero (puede ser ligeramente negativo por redondeo)."""
    unit = _as_unit(pts)
    n, d = unit.n, unit.dim
    single, pairs = _mixture_row_terms(unit.points)
    return ((19.0 / 12.0) ** d
            - (2.0 / n) * math.fsum(single)
            + math.fsum(pairs) / (float(n) * n))


def mixture_discrepancy(pts: PointsLike) -> float:
    """
    Discrepancia de mezcla D^mix = sqrt(max(0, D²)).

    El resultado no depende del número de hilos: cada fila acumula su suma
    parcial de forma secuencial y las filas se combinan con `math.fsum`.
    """
    return math.sqrt(max(0.0, mixture_discrepancy_squared(pts)))


def mixture_marginal_squared(pts: PointsLike) -> np.ndarray:
    """
    D^mix² de cada proyección 1-D, en O(n log n) por eje.

    D^mix² es la suma sobre subconjuntos no vacíos de coordenadas de integrales
    de cuadrados, así que la suma de estos términos es una cota inferior exacta.
    """
    unit = _as_unit(pts)
    n = float(unit.n)
    out = np.empty(unit.dim)
    for j in range(unit.dim):
        y = np.sort(unit.points[:, j])
        a = np.abs(y - 0.5)
        ranks = 2.0 * np.arange(y.shape[0]) - n + 1.0
        abs_pairs = float(np.dot(y, ranks))
        sum_y = float(y.sum())
        pair_sum = (7.0 / 8.0 * n * n - 0.5 * n * float(a.sum()) - 1.5 * abs_pairs
                    + n * float(np.dot(y, y)) - sum_y * sum_y)
        single_sum = float(np.sum(2.0 / 3.0 - 0.25 * a - 0.25 * a * a))
        out[j] = 7.0 / 12.0 - (2.0 / n) * single_sum + pair_sum / (n * n)
    return out


def mixture_lower_bound(pts: PointsLike) -> float:
    """Cota inferior de D^mix a partir de las proyecciones 1-D."""
    return math.sqrt(max(0.0, float(np.sum(mixture_marginal_squared(pts)))))


# ====================================================================
# DISCREPANCIA ESTRELLA
# ====================================================================

def critical_grid(points: np.ndarray) -> list:
    """Malla crítica por eje: coordenadas únicas más el extremo 1.0."""
    grids = []
    for j in range(points.shape[1]):
        values = np.unique(points[:, j])
        if values.shape[0] == 0 or values[-1] < 1.0:
            values = np.concatenate((values, [1.0]))
        grids.append(values)
    return grids


@nb.njit(cache=True)
def _local_discrepancy(pts, node):
    """
    max(vol − #abiertos/n, #cerrados/n − vol) en un nodo u de la malla.

    En los ejes con u_j = 1 la caja no puede crecer, así que el conteo
    cerrado usa desigualdad estricta en ese eje.
    """
    n, d = pts.shape
    vol = 1.0
    for j in range(d):
        vol *= node[j]
    open_count = 0
    closed_count = 0
    for i in range(n):
        in_open = True
        in_closed = True
        for j in range(d):
            y = pts[i, j]
            u = node[j]
            if y >= u:
                in_open = False
                if u >= 1.0 or y > u:
                    in_closed = False
                    break
        if in_open:
            open_count += 1
        if in_closed:
            closed_count += 1
    return max(vol - open_count / n, closed_count / n - vol)


@nb.njit(cache=True, parallel=True)
def _star_exact_kernel(pts, grid_values, grid_sizes):
    d = pts.shape[1]
    first = grid_sizes[0]
    best = np.zeros(first)
    for i0 in nb.prange(first):
        node = np.empty(d)
        idx = np.zeros(d, dtype=np.int64)
        idx[0] = i0
        local_best = 0.0
        while True:
            for j in range(d):
                node[j] = grid_values[j, idx[j]]
            val = _local_discrepancy(pts, node)
            if val > local_best:
                local_best = val
            # Odómetro sobre los ejes 1..d-1
            j = d - 1
            while j >= 1:
                idx[j] += 1
                if idx[j] < grid_sizes[j]:
                    break
                idx[j] = 0
                j -= 1
            if j < 1:
                break
        best[i0] = local_best
    return best


def _padded_grid(grids: list) -> tuple:
    sizes = np.array([g.shape[0] for g in grids], dtype=np.int64)
    values = np.ones((len(grids), int(sizes.max())))
    for j, g in enumerate(grids):
        values[j, :g.shape[0]] = g
    return values, sizes


def star_marginal_bound(pts: PointsLike) -> float:
    """
    Máximo exacto de la discrepancia estrella sobre las cajas [0,u_j)×[0,1)^{d−1}.

    Es la restricción del supremo a un subconjunto de cajas, por lo tanto una
    cota inferior de D*.
    """
    unit = _as_unit(pts)
    p = unit.points
    n = float(unit.n)
    best = 0.0
    for j in range(unit.dim):
        others = np.delete(p, j, axis=1)
        mask = np.all(others < 1.0, axis=1) if others.shape[1] else np.ones(unit.n, dtype=bool)
        values = np.sort(p[mask, j])
        grid = critical_grid(values.reshape(-1, 1))[0]
        below = np.searchsorted(values, grid, side='left')
        upto = np.searchsorted(values, grid, side='right')
        # En u = 1 no existe el límite por la derecha
        upto = np.where(grid >= 1.0, below, upto)
        local = np.maximum(grid - below / n, upto / n - grid)
        best = max(best, float(local.max()))
    return best


def star_discrepancy_exact(pts: PointsLike, budget: int = DEFAULT_EXACT_BUDGET) -> StarDiscrepancyEstimate:
    """
    D* exacta enumerando todos los nodos de la malla crítica.

    Lanza BudgetExceededError si n·(n+2)^d supera el presupuesto; en ese caso
    debe usarse `star_discrepancy_heuristic`.
    """
    unit = _as_unit(pts)
    n, d = unit.n, unit.dim
    work = n * (n + 2) ** d
    if work > budget:
        raise BudgetExceededError(
            f"El cálculo exacto requiere {work} evaluaciones (presupuesto {budget}); "
            "use star_discrepancy_heuristic",
            {'work': work, 'budget': budget}
        )
    values, sizes = _padded_grid(critical_grid(unit.points))
    per_slice = _star_exact_kernel(unit.points, values, sizes)
    nodes = int(np.prod(sizes))
    return StarDiscrepancyEstimate(value=float(per_slice.max()), is_exact=True, iterations=nodes)


@nb.njit(cache=True, parallel=True)
def _threshold_accepting_kernel(pts, grid_values, grid_sizes, starts, move_axes, move_fracs, thresholds):
    restarts, d = starts.shape
    steps = thresholds.shape[0]
    best = np.zeros(restarts)
    for r in nb.prange(restarts):
        idx = starts[r].copy()
        node = np.empty(d)
        for j in range(d):
            node[j] = grid_values[j, idx[j]]
        current = _local_discrepancy(pts, node)
        best_r = current
        for t in range(steps):
            axis = move_axes[r, t]
            span = max(1, grid_sizes[axis] // 10)
            shift = int(round(move_fracs[r, t] * span))
            if shift == 0:
                shift = 1 if move_fracs[r, t] >= 0.0 else -1
            old = idx[axis]
            new = min(max(old + shift, 0), grid_sizes[axis] - 1)
            if new == old:
                continue
            node[axis] = grid_values[axis, new]
            candidate = _local_discrepancy(pts, node)
            if candidate >= current - thresholds[t]:
                idx[axis] = new
                current = candidate
                if current > best_r:
                    best_r = current
            else:
                node[axis] = grid_values[axis, old]
        best[r] = best_r
    return best


def threshold_sequence(iterations: int, start: float = DEFAULT_THRESHOLD_START) -> np.ndarray:
    """Umbrales T_t = T₀·γ^t con γ = 10^(−6/I); el último paso usa T = 0."""
    if iterations <= 0:
        return np.zeros(0)
    gamma = 10.0 ** (-6.0 / iterations)
    thresholds = start * gamma ** np.arange(iterations, dtype=np.float64)
    thresholds[-1] = 0.0
    return thresholds


def star_discrepancy_heuristic(pts: PointsLike, iterations: int = DEFAULT_ITERATIONS, seed: int = 0,
                               restarts: int = DEFAULT_RESTARTS,
                               threshold_start: float = DEFAULT_THRESHOLD_START) -> StarDiscrepancyEstimate:
    """
    Cota inferior de D* por aceptación de umbral sobre la malla crítica.

    Todos los movimientos aleatorios se generan antes de entrar al kernel con
    `np.random.default_rng(seed)`, así que el resultado es determinista para
    una semilla dada e independiente del número de hilos.
    """
    if iterations < 0 or restarts < 1:
        raise ValidationError("iterations ≥ 0 y restarts ≥ 1 son obligatorios")
    unit = _as_unit(pts)
    d = unit.dim
    values, sizes = _padded_grid(critical_grid(unit.points))

    rng = np.random.default_rng(seed)
    starts = np.floor(rng.random((restarts, d)) * sizes).astype(np.int64)
    starts = np.minimum(starts, sizes - 1)
    move_axes = rng.integers(0, d, size=(restarts, iterations), dtype=np.int64)
    move_fracs = rng.uniform(-1.0, 1.0, size=(restarts, iterations))
    thresholds = threshold_sequence(iterations, threshold_start)

    per_restart = _threshold_accepting_kernel(
        unit.points, values, sizes, starts, move_axes, move_fracs, thresholds
    )
    value = float(per_restart.max())
    logger.debug(f"Threshold accepting: n={unit.n} d={d} restarts={restarts} "
                 f"iterations={iterations} value={value:.6g}")
    return StarDiscrepancyEstimate(value=value, is_exact=False, iterations=iterations)


def star_discrepancy(pts: PointsLike, budget: int = DEFAULT_EXACT_BUDGET,
                     iterations: int = DEFAULT_ITERATIONS, seed: int = 0,
                     restarts: int = DEFAULT_RESTARTS,
                     threshold_start: float = DEFAULT_THRESHOLD_START) -> StarDiscrepancyEstimate:
    """Exacta cuando cabe en el presupuesto; si no, la heurística reforzada con la cota marginal."""
    unit = _as_unit(pts)
    try:
        return star_discrepancy_exact(unit, budget)
    except BudgetExceededError:
        pass
    heuristic = star_discrepancy_heuristic(unit, iterations, seed, restarts, threshold_start)
    bound = star_marginal_bound(unit)
    if bound > heuristic.value:
        return StarDiscrepancyEstimate(value=bound, is_exact=False, iterations=heuristic.iterations)
    return heuristic


def brute_force_star(pts: PointsLike, step: float = 1e-3, dense_limit: Optional[int] = 2) -> float:
    """
    Supremo de D* sobre una malla regular de paso `step` (oráculo para d ≤ 2).

    Evalúa límites abiertos y cerrados igual que el método exacto pero en
    nodos fijos, por lo que difiere del valor exacto a lo sumo en la resolución.
    """
    unit = _as_unit(pts)
    if dense_limit is not None and unit.dim > dense_limit:
        raise ValidationError(f"El oráculo denso solo admite d ≤ {dense_limit}")
    ticks = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    grid = [ticks] * unit.dim
    values, sizes = _padded_grid(grid)
    return float(_star_exact_kernel(unit.points, values, sizes).max())
