"""
Particionado secuencial binario (estimador constante a trozos adaptativo).

Cada hoja se decide solo con su subconjunto y con N, así que el orden de
procesamiento (fifo, lifo o el reinicio tras cada división) no cambia el
resultado. Las hojas se emiten siempre en pre-orden del árbol.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
import logging
import math

import numpy as np

from seqpart.estimators.discrepancy import (
    UnitPointSet, mixture_discrepancy, mixture_marginal_squared, star_discrepancy, star_marginal_bound
)
from seqpart.estimators.moments import moment_uniformity_test
from seqpart.models.base_model import ValidationError, EmptySubsetError, DimensionMismatchError
from seqpart.models.criteria import CriterionKind, EngineConfig, UniformityCriterion
from seqpart.models.geometry import AxisBox, SampleSet, SubsetView, scale_to_unit
from seqpart.models.partition import (
    Leaf, PiecewiseConstantDensity, TerminationReason, TreeNode, leaf_constant
)

logger = logging.getLogger(__name__)

STRATEGIES = ('fifo', 'lifo', 'restart')

# Margen relativo para decidir con la cota marginal sin depender del redondeo
_BOUND_MARGIN = 1e-9


# ====================================================================
# OPERACIONES POR HOJA
# ====================================================================

def choose_split(box: AxisBox, subset: SubsetView, m: int) -> Tuple[int, int, float]:
    """
    Corte más desbalanceado entre los candidatos lo + (i/m)(hi − lo), i = 1..m−1.

    Devuelve (eje, i, s) con el eje en base 0. Puntuación |n_ij/n − i/m| con
    n_ij = #{y_j < s}; empates por menor eje y luego menor i.
    """
    if subset.size == 0:
        raise EmptySubsetError("choose_split requiere un subconjunto no vacío")
    if m < 2:
        raise ValidationError("m debe ser al menos 2")
    if subset.dim != box.dim:
        raise DimensionMismatchError("El subconjunto y la caja tienen dimensiones distintas")

    n = subset.size
    fractions = np.arange(1, m, dtype=np.float64) / m
    candidates = box.lo[:, None] + fractions[None, :] * (box.hi - box.lo)[:, None]
    pts = subset.points
    counts = np.empty_like(candidates)
    for j in range(box.dim):
        counts[j] = np.searchsorted(np.sort(pts[:, j]), candidates[j], side='left')
    scores = np.abs(counts / n - fractions[None, :])
    flat = int(np.argmax(scores))
    axis, i = divmod(flat, m - 1)
    return axis, i + 1, float(candidates[axis, i])


def split_box(box: AxisBox, axis: int, s: float) -> Tuple[AxisBox, AxisBox]:
    """Ω⁽¹⁾ reemplaza hi[axis] por s y Ω⁽²⁾ reemplaza lo[axis] por s."""
    if not 0 <= axis < box.dim:
        raise ValidationError(f"Eje {axis} fuera de rango para dimensión {box.dim}")
    if not box.lo[axis] < s < box.hi[axis]:
        raise ValidationError(
            f"El corte {s!r} no está en el intervalo abierto ({box.lo[axis]!r}, {box.hi[axis]!r})",
            {'axis': axis, 'value': s}
        )
    return box.with_bounds(axis, hi=s), box.with_bounds(axis, lo=s)


def uniformity_threshold(theta: float, total_n: int, n: int) -> float:
    """θ√N/n."""
    return theta * math.sqrt(total_n) / n


def is_uniform(subset: SubsetView, box: AxisBox, criterion: UniformityCriterion, total_n: int,
               seed: Optional[int] = None) -> bool:
    """
    Test de uniformidad de una hoja.

    Para los criterios de discrepancia se escala al cubo unidad y se compara
    con θ√N/n; antes se prueba la cota inferior exacta de las proyecciones
    1-D, que descarta hojas no uniformes sin el cálculo completo.
    """
    n = subset.size
    if n == 0:
        raise EmptySubsetError("is_uniform requiere un subconjunto no vacío")

    if criterion.kind == CriterionKind.moment:
        return moment_uniformity_test(subset, box, criterion.tol)

    threshold = uniformity_threshold(criterion.theta, total_n, n)
    unit = UnitPointSet(scale_to_unit(subset, box))

    if criterion.kind == CriterionKind.mixture:
        marginal = float(np.sum(mixture_marginal_squared(unit)))
        if marginal > threshold * threshold * (1.0 + _BOUND_MARGIN):
            return False
        return mixture_discrepancy(unit) <= threshold

    bound = star_marginal_bound(unit)
    if bound > threshold * (1.0 + _BOUND_MARGIN):
        return False
    star = criterion.star
    estimate_ = star_discrepancy(
        unit,
        budget=star.exact_budget,
        iterations=star.iterations,
        seed=star.seed if seed is None else seed,
        restarts=star.restarts,
        threshold_start=star.threshold_start,
    )
    return estimate_.value <= threshold


# ====================================================================
# CONSTRUCCIÓN DEL ESTIMADOR
# ====================================================================

@dataclass
class _WorkItem:
    node_id: int
    box: AxisBox
    subset: SubsetView
    depth: int
    path: int = 1  # bit de guarda seguido de las decisiones (0 inferior, 1 superior)


@dataclass
class _BuildState:
    total_n: int
    nodes: List[Dict[str, Any]] = field(default_factory=list)
    pending: int = 0
    finished: int = 0
    truncated: bool = False
    reasons: Dict[str, int] = field(default_factory=lambda: {r: 0 for r in TerminationReason.get_choices()})
    tests: int = 0

    def new_node(self) -> int:
        self.nodes.append({})
        return len(self.nodes) - 1


def _leaf_seed(base: int, item: _WorkItem) -> int:
    """Semilla por hoja derivada de su posición en el árbol, independiente del orden."""
    return int(np.random.SeedSequence([base, item.depth, item.path]).generate_state(1)[0])


def _process(item: _WorkItem, criterion: UniformityCriterion, cfg: EngineConfig,
             state: _BuildState) -> Optional[Tuple[_WorkItem, _WorkItem]]:
    """Decide una hoja: la termina (None) o devuelve sus dos hijos."""
    n = item.subset.size
    reason: Optional[TerminationReason] = None
    if n == 0:
        reason = TerminationReason.empty
    elif n <= cfg.n_min:
        reason = TerminationReason.n_min
    elif item.depth >= cfg.max_depth:
        reason = TerminationReason.max_depth
    else:
        state.tests += 1
        seed = _leaf_seed(criterion.star.seed, item) if criterion.kind == CriterionKind.star else None
        if is_uniform(item.subset, item.box, criterion, state.total_n, seed=seed):
            reason = TerminationReason.uniform
        elif state.finished + state.pending >= cfg.max_leaves:
            # Dividir superaría el límite de hojas
            reason = TerminationReason.max_leaves
            state.truncated = True

    if reason is None:
        axis, _, s = choose_split(item.box, item.subset, cfg.m)
        if item.box.lo[axis] < s < item.box.hi[axis]:
            lower_box, upper_box = split_box(item.box, axis, s)
            lower_subset, upper_subset = item.subset.split(axis, s)
            lower = _WorkItem(state.new_node(), lower_box, lower_subset, item.depth + 1, item.path << 1)
            upper = _WorkItem(state.new_node(), upper_box, upper_subset, item.depth + 1, (item.path << 1) | 1)
            state.nodes[item.node_id] = {'axis': axis, 'value': s, 'left': lower.node_id, 'right': upper.node_id}
            state.pending += 1
            logger.debug(f"Split depth={item.depth} n={n} axis={axis} s={s!r}")
            return lower, upper
        reason = TerminationReason.degenerate

    state.pending -= 1
    state.finished += 1
    state.reasons[reason.value] += 1
    state.nodes[item.node_id] = {
        'leaf': Leaf(item.box, leaf_constant(n, state.total_n, item.box), n, item.depth, reason)
    }
    logger.debug(f"Leaf depth={item.depth} n={n} reason={reason.value}")
    return None


def _run_queue(root: _WorkItem, criterion, cfg, state, strategy: str) -> None:
    work = deque([root])
    while work:
        item = work.popleft() if strategy == 'fifo' else work.pop()
        children = _process(item, criterion, cfg, state)
        if children is None:
            continue
        if strategy == 'fifo':
            work.extend(children)
        else:
            # lifo: el hijo inferior sale primero
            work.append(children[1])
            work.append(children[0])


def _run_restart(root: _WorkItem, criterion, cfg, state) -> None:
    """Recorre la lista de hojas desde el inicio y reinicia tras cada división."""
    leaves: List[Tuple[_WorkItem, bool]] = [(root, False)]
    while True:
        position = next((k for k, (_, tested) in enumerate(leaves) if not tested), None)
        if position is None:
            break
        item = leaves[position][0]
        children = _process(item, criterion, cfg, state)
        if children is None:
            leaves[position] = (item, True)
        else:
            leaves[position:position + 1] = [(children[0], False), (children[1], False)]


def _collect(state: _BuildState) -> Tuple[List[Leaf], List[TreeNode]]:
    """Renumera los nodos en pre-orden y extrae las hojas en ese mismo orden."""
    order: List[int] = []
    stack = [0]
    while stack:
        node_id = stack.pop()
        order.append(node_id)
        raw = state.nodes[node_id]
        if 'leaf' not in raw:
            stack.append(raw['right'])
            stack.append(raw['left'])
    renumber = {old: new for new, old in enumerate(order)}

    leaves: List[Leaf] = []
    nodes: List[TreeNode] = []
    for old in order:
        raw = state.nodes[old]
        if 'leaf' in raw:
            nodes.append(TreeNode(leaf=len(leaves)))
            leaves.append(raw['leaf'])
        else:
            nodes.append(TreeNode(axis=raw['axis'], value=raw['value'],
                                  left=renumber[raw['left']], right=renumber[raw['right']]))
    return leaves, nodes


def estimate(samples: SampleSet, domain: AxisBox, criterion: UniformityCriterion,
             config: Optional[EngineConfig] = None, strategy: str = 'fifo') -> PiecewiseConstantDensity:
    """
    Construye el estimador constante a trozos.

    Una hoja termina si n = 0, n ≤ n_min, profundidad = max_depth, se alcanzó
    max_leaves (marca `truncated`) o el criterio la declara uniforme. Si el
    corte elegido no cae estrictamente dentro de la caja la hoja termina como
    'degenerate'.
    """
    cfg = config or EngineConfig()
    if strategy not in STRATEGIES:
        raise ValidationError(f"Estrategia desconocida '{strategy}'. Opciones: {', '.join(STRATEGIES)}")
    samples.ensure_in_domain(domain)
    if samples.count == 0:
        raise EmptySubsetError("Se necesita al menos una muestra para estimar")

    logger.info(f"Estimación: N={samples.count} d={samples.dim} criterio={criterion.kind.value} "
                f"m={cfg.m} estrategia={strategy}")
    state = _BuildState(total_n=samples.count, pending=1)
    root = _WorkItem(state.new_node(), domain, samples.view(), 0)
    if strategy == 'restart':
        _run_restart(root, criterion, cfg, state)
    else:
        _run_queue(root, criterion, cfg, state, strategy)

    leaves, nodes = _collect(state)
    stats = {
        'leaves': len(leaves),
        'uniformity_tests': state.tests,
        'max_depth': max(leaf.depth for leaf in leaves),
        'reasons': state.reasons,
    }
    if state.truncated:
        logger.warning(f"Se alcanzó max_leaves={cfg.max_leaves}; el estimador quedó truncado")
    logger.info(f"Estimación terminada: {len(leaves)} hojas, {state.tests} tests de uniformidad")
    return PiecewiseConstantDensity(
        domain=domain,
        total_n=samples.count,
        leaves=leaves,
        nodes=nodes,
        truncated=state.truncated,
        stats=stats,
        params={'criterion': criterion.to_dict(), 'engine': cfg.to_dict()},
    )
