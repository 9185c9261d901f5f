from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
import enum
import logging

import numpy as np

from seqpart.models.base_model import (
    BaseModel, ValidationError, OutOfDomainError, DimensionMismatchError, FileFormatError
)
from seqpart.models.geometry import AxisBox, ArrayLike, as_point

logger = logging.getLogger(__name__)


class TerminationReason(enum.Enum):
    """Motivo por el que una hoja dejó de dividirse"""
    empty = 'empty'
    n_min = 'n_min'
    max_depth = 'max_depth'
    max_leaves = 'max_leaves'
    uniform = 'uniform'
    degenerate = 'degenerate'

    @classmethod
    def get_choices(cls):
        return [choice.value for choice in cls]


@dataclass(frozen=True, eq=False)
class Leaf(BaseModel):
    box: AxisBox
    c: float
    count: int
    depth: int = 0
    reason: TerminationReason = TerminationReason.uniform

    def _validate_instance(self):
        if self.count < 0:
            raise ValidationError("El conteo de una hoja no puede ser negativo")
        if self.c < 0:
            raise ValidationError("La constante de una hoja no puede ser negativa")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lo': self.box.lo.tolist(),
            'hi': self.box.hi.tolist(),
            'count': self.count,
            'c': self.c,
            'depth': self.depth,
            'reason': self.reason.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Leaf':
        try:
            return cls(
                box=AxisBox(data['lo'], data['hi']),
                c=float(data['c']),
                count=int(data['count']),
                depth=int(data.get('depth', 0)),
                reason=TerminationReason(data.get('reason', 'uniform')),
            )
        except KeyError as e:
            raise ValidationError(f"Falta el campo {e} en la hoja") from e
        except ValidationError:
            raise
        except (TypeError, ValueError) as e:
            raise FileFormatError(f"Valor inválido en la hoja: {e}") from e


@dataclass(frozen=True)
class TreeNode:
    """Nodo del árbol de divisiones: interno (axis, value, left, right) u hoja (leaf)."""
    axis: int = -1
    value: float = 0.0
    left: int = -1
    right: int = -1
    leaf: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.leaf >= 0

    def to_list(self) -> List[Any]:
        return [self.axis, self.value, self.left, self.right, self.leaf]

    @classmethod
    def from_list(cls, row: List[Any]) -> 'TreeNode':
        axis, value, left, right, leaf = row
        return cls(int(axis), float(value), int(left), int(right), int(leaf))


def leaf_constant(count: int, total_n: int, box: AxisBox) -> float:
    """c_l = count_l / (N·|Ω_l|)."""
    return count / (total_n * box.volume)


@dataclass(frozen=True, eq=False)
class PiecewiseConstantDensity(BaseModel):
    """
    Estimador p̂(x) = Σ_l c_l 𝟙_{Ω_l}(x).

    Las hojas se guardan en pre-orden del árbol de divisiones (hijo inferior
    primero); `nodes[0]` es la raíz.
    """
    domain: AxisBox
    total_n: int
    leaves: List[Leaf]
    nodes: List[TreeNode]
    truncated: bool = False
    stats: Dict[str, Any] = field(default_factory=dict)
    method: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def _validate_instance(self):
        if self.total_n < 1:
            raise ValidationError("total_n debe ser al menos 1")
        if not self.leaves:
            raise ValidationError("El estimador necesita al menos una hoja")
        if not self.nodes:
            raise ValidationError("El árbol de divisiones está vacío")
        for leaf in self.leaves:
            if leaf.box.dim != self.domain.dim:
                raise DimensionMismatchError("Todas las hojas deben tener la dimensión del dominio")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    def total_mass(self) -> float:
        """Σ_l c_l·|Ω_l| (igual a 1 salvo redondeo)."""
        return float(np.sum([leaf.c * leaf.box.volume for leaf in self.leaves]))

    def leaf_index(self, p: ArrayLike) -> int:
        point = as_point(p, self.dim)
        if not bool(self.domain.contains_closed(point)[0]):
            raise OutOfDomainError(f"El punto {point.tolist()} está fuera del dominio")
        node = self.nodes[0]
        while not node.is_leaf:
            node = self.nodes[node.left] if point[node.axis] < node.value else self.nodes[node.right]
        return node.leaf

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evalúa p̂ en muchos puntos descendiendo el árbol por lotes."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.dim:
            raise DimensionMismatchError(f"Puntos de dimensión {pts.shape[1]}, dominio {self.dim}")
        inside = self.domain.contains_closed(pts)
        if not np.all(inside):
            row = int(np.argmin(inside))
            raise OutOfDomainError(f"El punto {pts[row].tolist()} está fuera del dominio", row=row + 1)
        constants = np.array([leaf.c for leaf in self.leaves])
        out = np.empty(pts.shape[0])
        stack = [(0, np.arange(pts.shape[0]))]
        while stack:
            node_id, rows = stack.pop()
            node = self.nodes[node_id]
            if node.is_leaf:
                out[rows] = constants[node.leaf]
                continue
            lower = pts[rows, node.axis] < node.value
            stack.append((node.left, rows[lower]))
            stack.append((node.right, rows[~lower]))
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            'domain': self.domain.to_dict(),
            'total_n': self.total_n,
            'method': self.method,
            'params': self.params,
            'leaves': [leaf.to_dict() for leaf in self.leaves],
            'nodes': [node.to_list() for node in self.nodes],
            'truncated': self.truncated,
            'stats': self.stats,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PiecewiseConstantDensity':
        try:
            return cls(
                domain=AxisBox.from_dict(data['domain']),
                total_n=int(data['total_n']),
                leaves=[Leaf.from_dict(item) for item in data['leaves']],
                nodes=[TreeNode.from_list(row) for row in data['nodes']],
                truncated=bool(data.get('truncated', False)),
                stats=dict(data.get('stats', {})),
                method=data.get('method'),
                params=dict(data.get('params', {})),
            )
        except KeyError as e:
            raise ValidationError(f"Falta el campo {e} en el archivo de partición") from e
        except ValidationError:
            raise
        except (TypeError, ValueError) as e:
            raise FileFormatError(f"Valor inválido en el archivo de partición: {e}") from e

    def __repr__(self):
        return f'<PiecewiseConstantDensity leaves={self.leaf_count} N={self.total_n}>'


def density_eval(pcd: PiecewiseConstantDensity, p: ArrayLike) -> float:
    """c_l de la única hoja que contiene p (un punto sobre un corte va al hijo superior)."""
    return pcd.leaves[pcd.leaf_index(p)].c
