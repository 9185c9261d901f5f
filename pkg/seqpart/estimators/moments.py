from dataclasses import dataclass
from typing import Any, Dict, Union
import logging

import numba as nb
import numpy as np

from seqpart.models.base_model import BaseModel, ValidationError, EmptySubsetError, DimensionMismatchError
from seqpart.models.criteria import MomentTolerances
from seqpart.models.geometry import AxisBox, SubsetView

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MomentSummary(BaseModel):
    """Media μ (d) y covarianza Σ (d×d, normalización 1/n)."""
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'mean', np.asarray(self.mean, dtype=np.float64).reshape(-1))
        object.__setattr__(self, 'covariance', np.asarray(self.covariance, dtype=np.float64))
        self._validate_instance()

    def _validate_instance(self):
        d = self.mean.shape[0]
        if self.covariance.shape != (d, d):
            raise DimensionMismatchError("La covarianza debe ser d×d")
        if not np.array_equal(self.covariance, self.covariance.T):
            raise ValidationError("La covarianza debe ser simétrica")
        if np.any(np.diag(self.covariance) < 0):
            raise ValidationError("La diagonal de la covarianza no puede ser negativa")

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {'mean': self.mean.tolist(), 'covariance': self.covariance.tolist()}


@nb.njit(cache=True)
def _two_pass_moments(pts):
    n, d = pts.shape
    mean = np.zeros(d)
    for i in range(n):
        for j in range(d):
            mean[j] += pts[i, j]
    for j in range(d):
        mean[j] /= n

    cov = np.zeros((d, d))
    for i in range(n):
        for a in range(d):
            da = pts[i, a] - mean[a]
            for b in range(a, d):
                cov[a, b] += da * (pts[i, b] - mean[b])
    for a in range(d):
        for b in range(a, d):
            cov[a, b] /= n
            cov[b, a] = cov[a, b]
    return mean, cov


def sample_moments(points: Union[SubsetView, np.ndarray]) -> MomentSummary:
    """Media y covarianza muestral sesgada (1/n), calculadas en dos pasadas."""
    pts = points.points if isinstance(points, SubsetView) else np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[0] == 0:
        raise EmptySubsetError("No se pueden calcular momentos de un subconjunto vacío")
    mean, cov = _two_pass_moments(np.ascontiguousarray(pts, dtype=np.float64))
    return MomentSummary(mean, cov)


def uniform_moments(box: AxisBox) -> MomentSummary:
    """Momentos de la uniforme en la caja: μ_j = (a+b)/2, Σ_jj = (b−a)²/12, Σ_ij = 0."""
    widths = box.hi - box.lo
    return MomentSummary(0.5 * (box.lo + box.hi), np.diag(widths * widths / 12.0))


def moment_uniformity_test(points: Union[SubsetView, np.ndarray], box: AxisBox, tol: MomentTolerances) -> bool:
    """
    Verdadero si y solo si:
      |μ_j − μ̂_j| < ε₁(b_j − a_j), |Σ_jj − Σ̂_jj| < ε₂|Σ_jj| y |Σ̂_ij| < ε₃ (i ≠ j).

    La tercera condición es absoluta y se evalúa en coordenadas de la caja.
    """
    sample = sample_moments(points)
    if sample.dim != box.dim:
        raise DimensionMismatchError(f"Puntos de dimensión {sample.dim}, caja de dimensión {box.dim}")
    reference = uniform_moments(box)
    widths = box.hi - box.lo

    if not np.all(np.abs(reference.mean - sample.mean) < tol.eps1 * widths):
        return False
    ref_var = np.diag(reference.covariance)
    if not np.all(np.abs(ref_var - np.diag(sample.covariance)) < tol.eps2 * np.abs(ref_var)):
        return False
    off_diagonal = sample.covariance[~np.eye(sample.dim, dtype=bool)]
    return bool(np.all(np.abs(off_diagonal) < tol.eps3))
