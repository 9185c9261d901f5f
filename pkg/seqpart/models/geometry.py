from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from seqpart.models.base_model import (
    BaseModel, ValidationError, DimensionMismatchError, OutOfDomainError
)

logger = logging.getLogger(__name__)

# Un punto es un vector de d coordenadas finitas
Point = np.ndarray
ArrayLike = Union[np.ndarray, Sequence[float]]


def as_point(p: ArrayLike, dim: Optional[int] = None) -> Point:
    """Convierte a vector float64 y valida dimensión y finitud."""
    arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"El punto tiene {arr.shape[0]} coordenadas, se esperaban {dim}",
            {'expected': dim, 'got': int(arr.shape[0])}
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError("El punto contiene coordenadas no finitas")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


# ====================================================================
# CAJAS ALINEADAS CON LOS EJES
# ====================================================================

@dataclass(frozen=True, eq=False)
class AxisBox(BaseModel):
    """Hiper-rectángulo ∏[lo_j, hi_j] con lo_j < hi_j."""
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'lo', _frozen(np.asarray(self.lo, dtype=np.float64).reshape(-1)))
        object.__setattr__(self, 'hi', _frozen(np.asarray(self.hi, dtype=np.float64).reshape(-1)))
        self._validate_instance()

    def _validate_instance(self):
        errors = []
        if self.lo.shape != self.hi.shape:
            raise DimensionMismatchError("lo y hi deben tener la misma dimensión")
        if self.lo.shape[0] < 1:
            errors.append("La dimensión debe ser al menos 1")
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            errors.append("Los extremos de la caja deben ser finitos")
        elif np.any(self.lo >= self.hi):
            errors.append("Se requiere lo[j] < hi[j] en todos los ejes")
        if errors:
            raise ValidationError("; ".join(errors), {'lo': self.lo.tolist(), 'hi': self.hi.tolist()})

    @classmethod
    def unit(cls, dim: int) -> 'AxisBox':
        return cls(np.zeros(dim), np.ones(dim))

    @property
    def dim(self) -> int:
        return int(self.lo.shape[0])

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def volume(self) -> float:
        return volume(self)

    def with_bounds(self, axis: int, lo: Optional[float] = None, hi: Optional[float] = None) -> 'AxisBox':
        """Copia de la caja reemplazando un extremo en un eje."""
        new_lo = np.array(self.lo)
        new_hi = np.array(self.hi)
        if lo is not None:
            new_lo[axis] = lo
        if hi is not None:
            new_hi[axis] = hi
        return AxisBox(new_lo, new_hi)

    def upper_flags(self, domain: 'AxisBox') -> np.ndarray:
        """Ejes donde la cara superior de la caja coincide con la del dominio."""
        return self.hi == domain.hi

    def contains_closed(self, points: np.ndarray) -> np.ndarray:
        """Máscara de pertenencia a la caja cerrada (una fila por punto)."""
        pts = np.atleast_2d(points)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def contains_many(self, points: np.ndarray, is_domain_upper: Optional[np.ndarray] = None) -> np.ndarray:
        """Versión vectorizada de `contains` con la convención semiabierta."""
        pts = np.atleast_2d(points)
        if pts.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"Los puntos tienen dimensión {pts.shape[1]}, la caja {self.dim}"
            )
        flags = np.zeros(self.dim, dtype=bool) if is_domain_upper is None else np.asarray(is_domain_upper, dtype=bool)
        below_hi = np.where(flags, pts <= self.hi, pts < self.hi)
        return np.all((pts >= self.lo) & below_hi, axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {'lo': self.lo.tolist(), 'hi': self.hi.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AxisBox':
        try:
            return cls(data['lo'], data['hi'])
        except KeyError as e:
            raise ValidationError(f"Falta el campo {e} en la caja") from e

    def __repr__(self):
        return f'<AxisBox lo={self.lo.tolist()} hi={self.hi.tolist()}>'


def volume(box: AxisBox) -> float:
    """|Ω_l| = ∏_j (hi_j − lo_j)."""
    return float(np.prod(box.hi - box.lo))


def contains(box: AxisBox, p: ArrayLike, is_domain_upper: Optional[ArrayLike] = None) -> bool:
    """
    Pertenencia semiabierta: lo_j ≤ p_j < hi_j, salvo en los ejes marcados
    como cara superior del dominio, donde lo_j ≤ p_j ≤ hi_j.
    """
    point = np.asarray(p, dtype=np.float64).reshape(-1)
    if point.shape[0] != box.dim:
        raise DimensionMismatchError(
            f"El punto tiene {point.shape[0]} coordenadas, la caja {box.dim}",
            {'expected': box.dim, 'got': int(point.shape[0])}
        )
    flags = np.zeros(box.dim, dtype=bool) if is_domain_upper is None else np.asarray(is_domain_upper, dtype=bool)
    if flags.shape[0] != box.dim:
        raise DimensionMismatchError("is_domain_upper debe tener una bandera por eje")
    below_hi = np.where(flags, point <= box.hi, point < box.hi)
    return bool(np.all((point >= box.lo) & below_hi))


# ====================================================================
# MUESTRAS Y SUBCONJUNTOS
# ====================================================================

@dataclass(frozen=True, eq=False)
class SampleSet(BaseModel):
    """Matriz N×d de observaciones (una fila por punto), inmutable."""
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        object.__setattr__(self, 'data', _frozen(arr))
        self._validate_instance()

    def _validate_instance(self):
        if self.data.ndim != 2 or self.data.shape[1] < 1:
            raise ValidationError("La matriz de muestras debe ser N×d con d ≥ 1")
        bad = ~np.all(np.isfinite(self.data), axis=1)
        if np.any(bad):
            row = int(np.argmax(bad))
            raise OutOfDomainError(f"La fila {row + 1} contiene valores no finitos", row=row + 1)

    @classmethod
    def from_array(cls, data: ArrayLike, domain: Optional[AxisBox] = None) -> 'SampleSet':
        """Ingesta con validación: todas las filas dentro del dominio cerrado."""
        samples = cls(np.asarray(data, dtype=np.float64))
        if domain is not None:
            samples.ensure_in_domain(domain)
        return samples

    def ensure_in_domain(self, domain: AxisBox) -> None:
        if self.dim != domain.dim:
            raise DimensionMismatchError(
                f"Las muestras tienen dimensión {self.dim}, el dominio {domain.dim}",
                {'expected': domain.dim, 'got': self.dim}
            )
        if self.count == 0:
            return
        inside = domain.contains_closed(self.data)
        if not np.all(inside):
            row = int(np.argmin(inside))
            raise OutOfDomainError(
                f"La fila {row + 1} está fuera del dominio: {self.data[row].tolist()}",
                row=row + 1
            )

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    @property
    def count(self) -> int:
        return int(self.data.shape[0])

    def view(self, indices: Optional[np.ndarray] = None) -> 'SubsetView':
        if indices is None:
            indices = np.arange(self.count, dtype=np.int64)
        return SubsetView(self, indices)

    def __repr__(self):
        return f'<SampleSet N={self.count} d={self.dim}>'


@dataclass(frozen=True, eq=False)
class SubsetView(BaseModel):
    """Vista por índices (estrictamente crecientes) sobre un SampleSet."""
    parent: SampleSet
    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64).reshape(-1)
        idx.setflags(write=False)
        object.__setattr__(self, 'indices', idx)
        self._validate_instance()

    def _validate_instance(self):
        idx = self.indices
        if idx.size == 0:
            return
        if idx[0] < 0 or idx[-1] >= self.parent.count:
            raise ValidationError("Índices fuera de rango para el conjunto de muestras")
        if idx.size > 1 and np.any(np.diff(idx) <= 0):
            raise ValidationError("Los índices deben ser estrictamente crecientes")

    @property
    def size(self) -> int:
        return int(self.indices.shape[0])

    @property
    def dim(self) -> int:
        return self.parent.dim

    @property
    def points(self) -> np.ndarray:
        """Coordenadas de los puntos del subconjunto (n×d)."""
        return self.parent.data[self.indices]

    def split(self, axis: int, value: float) -> Tuple['SubsetView', 'SubsetView']:
        """Parte el subconjunto por `coordenada < value` preservando el orden."""
        coords = self.parent.data[self.indices, axis]
        mask = coords < value
        return (SubsetView(self.parent, self.indices[mask]),
                SubsetView(self.parent, self.indices[~mask]))

    def __len__(self):
        return self.size

    def __repr__(self):
        return f'<SubsetView n={self.size} of N={self.parent.count}>'


def scale_to_unit(points: Union[SubsetView, np.ndarray], box: AxisBox) -> np.ndarray:
    """
    Mapa afín Ω_l → [0,1]^d: (y_ij − lo_j) / (hi_j − lo_j).

    Un punto fuera de la caja indica un error de contabilidad del particionado.
    """
    pts = points.points if isinstance(points, SubsetView) else np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[0] == 0:
        return np.empty((0, box.dim))
    if pts.shape[1] != box.dim:
        raise DimensionMismatchError(
            f"Los puntos tienen dimensión {pts.shape[1]}, la caja {box.dim}"
        )
    inside = box.contains_closed(pts)
    if not np.all(inside):
        row = int(np.argmin(inside))
        raise OutOfDomainError(
            f"Punto {pts[row].tolist()} fuera de la caja {box.to_dict()}", row=row + 1
        )
    return (pts - box.lo) / (box.hi - box.lo)
