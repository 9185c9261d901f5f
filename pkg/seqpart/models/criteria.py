from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional
import enum
import logging

from seqpart.models.base_model import BaseModel, ValidationError

logger = logging.getLogger(__name__)


class CriterionKind(enum.Enum):
    """Medidas de uniformidad disponibles para el test de cada hoja"""
    star = 'star'
    mixture = 'mixture'
    moment = 'moment'

    @classmethod
    def get_choices(cls):
        """Retorna las opciones disponibles para la CLI"""
        return [choice.value for choice in cls]


class Method(enum.Enum):
    """Nombres de los métodos tal como aparecen en las tablas de resultados"""
    DSP = 'dsp'
    DSP_MIX = 'dsp-mix'
    MSP = 'msp'

    @classmethod
    def get_choices(cls):
        return [choice.value for choice in cls]

    @property
    def label(self) -> str:
        return {'dsp': 'DSP', 'dsp-mix': 'DSP-mix', 'msp': 'MSP'}[self.value]

    @property
    def kind(self) -> CriterionKind:
        return {
            'dsp': CriterionKind.star,
            'dsp-mix': CriterionKind.mixture,
            'msp': CriterionKind.moment,
        }[self.value]

    @classmethod
    def parse(cls, value: str) -> 'Method':
        normalized = str(value).strip().lower().replace('_', '-')
        for choice in cls:
            if choice.value == normalized or choice.label.lower() == normalized:
                return choice
        raise ValidationError(
            f"Método desconocido '{value}'. Opciones: {', '.join(cls.get_choices())}"
        )


@dataclass(frozen=True)
class MomentTolerances(BaseModel):
    """Tolerancias ε₁ (medias), ε₂ (varianzas) y ε₃ (covarianzas, absoluta)."""
    eps1: float = 0.1
    eps2: float = 0.1
    eps3: float = 0.1

    def __post_init__(self):
        self._validate_instance()

    def _validate_instance(self):
        errors = [f"{name} debe ser estrictamente positivo"
                  for name, value in (('eps1', self.eps1), ('eps2', self.eps2), ('eps3', self.eps3))
                  if not value > 0]
        if errors:
            raise ValidationError("; ".join(errors))

    @classmethod
    def uniform(cls, eps: float) -> 'MomentTolerances':
        return cls(eps, eps, eps)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class StarSolverConfig(BaseModel):
    """Presupuestos del cálculo de la discrepancia estrella."""
    exact_budget: int = 200_000_000
    restarts: int = 100
    iterations: int = 1000
    threshold_start: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        self._validate_instance()

    def _validate_instance(self):
        errors = []
        if self.exact_budget < 0:
            errors.append("exact_budget no puede ser negativo")
        if self.restarts < 1:
            errors.append("restarts debe ser al menos 1")
        if self.iterations < 0:
            errors.append("iterations no puede ser negativo")
        if self.threshold_start < 0:
            errors.append("threshold_start no puede ser negativo")
        if errors:
            raise ValidationError("; ".join(errors))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class UniformityCriterion(BaseModel):
    """Criterio de parada de una hoja: discrepancia ≤ θ√N/n, o test de momentos."""
    kind: CriterionKind
    theta: Optional[float] = None
    tol: MomentTolerances = field(default_factory=MomentTolerances)
    star: StarSolverConfig = field(default_factory=StarSolverConfig)

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, 'kind', CriterionKind(self.kind))
        self._validate_instance()

    def _validate_instance(self):
        if self.kind in (CriterionKind.star, CriterionKind.mixture):
            if self.theta is None or not self.theta > 0:
                raise ValidationError(f"theta debe ser > 0 para el criterio '{self.kind.value}'")

    @classmethod
    def for_method(cls, method: Method, theta: float = 0.1,
                   tol: Optional[MomentTolerances] = None,
                   star: Optional[StarSolverConfig] = None) -> 'UniformityCriterion':
        kind = method.kind
        return cls(
            kind=kind,
            theta=theta if kind != CriterionKind.moment else None,
            tol=tol or MomentTolerances(),
            star=star or StarSolverConfig(),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'kind': self.kind.value}
        if self.kind == CriterionKind.moment:
            data['tol'] = self.tol.to_dict()
        else:
            data['theta'] = self.theta
        if self.kind == CriterionKind.star:
            data['star'] = self.star.to_dict()
        return data


@dataclass(frozen=True)
class EngineConfig(BaseModel):
    """Parámetros del particionado: m candidatos por eje y salvaguardas."""
    m: int = 10
    n_min: int = 10
    max_depth: int = 50
    max_leaves: int = 1_000_000

    def __post_init__(self):
        self._validate_instance()

    def _validate_instance(self):
        errors = []
        if self.m < 2:
            errors.append("m debe ser al menos 2")
        if self.n_min < 1:
            errors.append("n_min debe ser al menos 1")
        if self.max_depth < 1:
            errors.append("max_depth debe ser al menos 1")
        if self.max_leaves < 1:
            errors.append("max_leaves debe ser al menos 1")
        if errors:
            raise ValidationError("; ".join(errors))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
