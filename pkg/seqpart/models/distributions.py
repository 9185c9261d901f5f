"""
Distribuciones de referencia: mezclas de gaussianas truncadas a una caja y
mezclas de productos de Betas en el cubo unidad.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union
import enum
import logging
import math

import numpy as np
from scipy import stats

from config import Config
from seqpart.models.base_model import BaseModel, ValidationError, DegenerateDistributionError
from seqpart.models.geometry import AxisBox, SampleSet, ArrayLike
from seqpart.utils.cache_manager import cached

logger = logging.getLogger(__name__)

MIN_ACCEPTANCE = 1e-6
MIN_MC_SAMPLES = 10_000


class PresetName(enum.Enum):
    """Distribuciones de los experimentos incluidas como presets"""
    gauss2d = 'gauss2d'
    gaussmix2d = 'gaussmix2d'
    betamix2d = 'betamix2d'
    gaussmixNd = 'gaussmixNd'
    betamixNd = 'betamixNd'

    @classmethod
    def get_choices(cls):
        return [choice.value for choice in cls]

    @property
    def fixed_dim(self) -> Optional[int]:
        return None if self.value.endswith('Nd') else 2


def _check_weights(weights: np.ndarray) -> List[str]:
    errors = []
    if weights.ndim != 1 or weights.shape[0] == 0:
        errors.append("Se requiere al menos un peso")
    elif np.any(weights < 0):
        errors.append("Los pesos no pueden ser negativos")
    elif abs(math.fsum(weights.tolist()) - 1.0) > 1e-12:
        errors.append(f"Los pesos deben sumar 1 (suman {math.fsum(weights.tolist())!r})")
    return errors


# ====================================================================
# ESPECIFICACIONES
# ====================================================================

@dataclass(frozen=True, eq=False)
class GaussianMixtureSpec(BaseModel):
    """Σ α_i N(μ_i, Σ_i) restringida a `domain` y renormalizada."""
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    domain: AxisBox
    name: str = 'gaussian'
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'weights', np.asarray(self.weights, dtype=np.float64).reshape(-1))
        object.__setattr__(self, 'means', np.atleast_2d(np.asarray(self.means, dtype=np.float64)))
        cov = np.asarray(self.covariances, dtype=np.float64)
        if cov.ndim == 2:
            cov = cov[None, :, :]
        object.__setattr__(self, 'covariances', cov)
        self._validate_instance()

    def _validate_instance(self):
        errors = _check_weights(self.weights)
        k, d = self.means.shape
        if k != self.weights.shape[0] or self.covariances.shape != (k, d, d):
            errors.append("weights, means y covariances deben describir las mismas componentes")
        elif d != self.domain.dim:
            errors.append(f"Las medias tienen dimensión {d}, el dominio {self.domain.dim}")
        if errors:
            raise ValidationError("; ".join(errors))

        chol = np.empty_like(self.covariances)
        for i, sigma in enumerate(self.covariances):
            if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-14):
                raise ValidationError(f"La covarianza {i} no es simétrica")
            try:
                chol[i] = np.linalg.cholesky(sigma)
            except np.linalg.LinAlgError as e:
                raise ValidationError(f"La covarianza {i} no es definida positiva") from e
        object.__setattr__(self, 'chol', chol)

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])

    @property
    def kind(self) -> str:
        return 'gaussian'

    def draw_untruncated(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.choice(self.weights.shape[0], size=size, p=self.weights)
        z = rng.standard_normal((size, self.dim))
        return self.means[comp] + np.einsum('bij,bj->bi', self.chol[comp], z)

    def mixture_pdf(self, points: np.ndarray) -> np.ndarray:
        total = np.zeros(points.shape[0])
        for alpha, mu, sigma in zip(self.weights, self.means, self.covariances):
            total += alpha * np.atleast_1d(stats.multivariate_normal.pdf(points, mean=mu, cov=sigma))
        return total

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'gaussian',
            'name': self.name,
            'weights': self.weights.tolist(),
            'means': self.means.tolist(),
            'covariances': self.covariances.tolist(),
            'domain': self.domain.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class BetaMixtureSpec(BaseModel):
    """Σ α_i ∏_j Beta(a_ij, b_ij) en el cubo unidad."""
    weights: np.ndarray
    components: np.ndarray  # (K, d, 2)
    name: str = 'beta'

    def __post_init__(self):
        object.__setattr__(self, 'weights', np.asarray(self.weights, dtype=np.float64).reshape(-1))
        object.__setattr__(self, 'components', np.asarray(self.components, dtype=np.float64))
        self._validate_instance()

    def _validate_instance(self):
        errors = _check_weights(self.weights)
        comps = self.components
        if comps.ndim != 3 or comps.shape[2] != 2 or comps.shape[1] < 1:
            errors.append("components debe tener forma (K, d, 2) con pares (alpha, beta)")
        elif comps.shape[0] != self.weights.shape[0]:
            errors.append("Debe haber un peso por componente")
        elif not np.all(comps > 0):
            errors.append("Los parámetros de forma deben ser estrictamente positivos")
        if errors:
            raise ValidationError("; ".join(errors))

    @property
    def dim(self) -> int:
        return int(self.components.shape[1])

    @property
    def domain(self) -> AxisBox:
        return AxisBox.unit(self.dim)

    @property
    def kind(self) -> str:
        return 'beta'

    def draw_untruncated(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.choice(self.weights.shape[0], size=size, p=self.weights)
        shapes = self.components[comp]
        return rng.beta(shapes[:, :, 0], shapes[:, :, 1])

    def mixture_pdf(self, points: np.ndarray) -> np.ndarray:
        total = np.zeros(points.shape[0])
        for alpha, shapes in zip(self.weights, self.components):
            total += alpha * np.prod(stats.beta.pdf(points, shapes[:, 0], shapes[:, 1]), axis=1)
        return total

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'beta',
            'name': self.name,
            'weights': self.weights.tolist(),
            'components': self.components.tolist(),
        }


MixtureSpec = Union[GaussianMixtureSpec, BetaMixtureSpec]


def spec_from_dict(data: Dict[str, Any]) -> MixtureSpec:
    """Construye una especificación a partir de su forma JSON."""
    kind = data.get('kind')
    try:
        if kind == 'gaussian':
            return GaussianMixtureSpec(
                weights=data['weights'],
                means=data['means'],
                covariances=data['covariances'],
                domain=AxisBox.from_dict(data['domain']),
                name=data.get('name', 'gaussian'),
            )
        if kind == 'beta':
            return BetaMixtureSpec(
                weights=data['weights'],
                components=data['components'],
                name=data.get('name', 'beta'),
            )
    except KeyError as e:
        raise ValidationError(f"Falta el campo {e} en la especificación") from e
    raise ValidationError(f"Tipo de especificación desconocido: {kind!r} (use 'gaussian' o 'beta')")


# ====================================================================
# PRESETS
# ====================================================================

def preset(name: str, dim: Optional[int] = None) -> MixtureSpec:
    """Distribuciones de referencia de los experimentos (las 'Nd' aceptan `dim`, por defecto 2)."""
    try:
        key = PresetName(name)
    except ValueError as e:
        raise ValidationError(
            f"Preset desconocido '{name}'. Opciones: {', '.join(PresetName.get_choices())}"
        ) from e
    if key.fixed_dim is not None and dim not in (None, key.fixed_dim):
        raise ValidationError(f"El preset '{name}' es de dimensión {key.fixed_dim}")
    d = key.fixed_dim or (dim if dim is not None else 2)
    if d < 1:
        raise ValidationError("La dimensión debe ser al menos 1")

    if key is PresetName.gauss2d:
        return GaussianMixtureSpec([1.0], [[0.5, 0.5]], [[[0.08, 0.02], [0.02, 0.02]]],
                                   AxisBox.unit(2), name=name)
    if key is PresetName.gaussmix2d:
        sigma = [[0.04, 0.01], [0.01, 0.01]]
        return GaussianMixtureSpec([0.5, 0.5], [[0.5, 0.25], [0.5, 0.75]], [sigma, sigma],
                                   AxisBox.unit(2), name=name)
    if key is PresetName.betamix2d:
        third = 1.0 / 3.0
        return BetaMixtureSpec([third, third, 1.0 - 2.0 * third],
                               [[[2, 5], [5, 2]], [[4, 2], [2, 4]], [[1, 3], [3, 1]]], name=name)
    if key is PresetName.gaussmixNd:
        weights = [0.4, 0.3, 0.2, 0.1]
        means = [np.full(d, mu) for mu in (0.3, 0.4, 0.5, 0.6)]
        covs = [var * np.eye(d) for var in (0.01, 0.02, 0.01, 0.02)]
        return GaussianMixtureSpec(weights, means, covs, AxisBox.unit(d), name=name)

    third = 1.0 / 3.0
    comps = [[shape] * d for shape in ([15, 5], [10, 10], [5, 15])]
    return BetaMixtureSpec([third, third, 1.0 - 2.0 * third], comps, name=name)


# ====================================================================
# MUESTREO, NORMALIZACIÓN Y DENSIDAD
# ====================================================================

def sample(spec: MixtureSpec, n: int, seed: int, batch: Optional[int] = None,
           probe: Optional[int] = None) -> SampleSet:
    """
    N muestras i.i.d. de la mezcla truncada (rechazo fuera del dominio cerrado).

    Usa un único flujo `default_rng(seed)`, así que el resultado depende solo
    de la semilla. Si tras `probe` propuestas la aceptación es menor que 10⁻⁶
    la truncación se considera degenerada.
    """
    if n < 1:
        raise ValidationError("N debe ser al menos 1")
    batch = batch or Config.SAMPLER_BATCH
    probe = probe or Config.SAMPLER_PROBE
    rng = np.random.default_rng(seed)
    domain = spec.domain

    chunks: List[np.ndarray] = []
    accepted = 0
    drawn = 0
    while accepted < n:
        if drawn >= probe and accepted < MIN_ACCEPTANCE * drawn:
            raise DegenerateDistributionError(
                f"Tasa de aceptación {accepted}/{drawn} por debajo de {MIN_ACCEPTANCE}: truncación degenerada",
                {'accepted': accepted, 'drawn': drawn}
            )
        size = max(batch, min(n - accepted, 16 * batch))
        proposal = spec.draw_untruncated(rng, size)
        drawn += size
        keep = proposal[domain.contains_closed(proposal)]
        if keep.shape[0]:
            chunks.append(keep[:n - accepted])
            accepted += min(keep.shape[0], n - accepted)

    data = np.concatenate(chunks, axis=0)
    logger.debug(f"Muestreo '{spec.name}': N={n} propuestas={drawn} seed={seed}")
    return SampleSet(data)


@cached(ttl_seconds=Config.NORMALIZER_CACHE_TTL, key_prefix='normalizer')
def estimate_normalizer(spec: MixtureSpec, mc_samples: int, seed: int) -> Tuple[float, float]:
    """
    Masa Z de la mezcla sin truncar dentro del dominio, con su error estándar
    binomial sqrt(Z(1−Z)/M). Las Betas viven en el cubo unidad: Z = 1 exacto.
    """
    if isinstance(spec, BetaMixtureSpec):
        return 1.0, 0.0
    if mc_samples < MIN_MC_SAMPLES:
        raise ValidationError(f"mc_samples debe ser al menos {MIN_MC_SAMPLES}")
    rng = np.random.default_rng(seed)
    inside = 0
    remaining = mc_samples
    while remaining > 0:
        size = min(remaining, Config.SAMPLER_BATCH * 16)
        inside += int(np.count_nonzero(spec.domain.contains_closed(spec.draw_untruncated(rng, size))))
        remaining -= size
    z = inside / mc_samples
    if z == 0.0:
        raise DegenerateDistributionError(
            f"Ninguna de {mc_samples} muestras cayó en el dominio: la masa truncada es nula"
        )
    se = math.sqrt(z * (1.0 - z) / mc_samples)
    logger.info(f"Normalizador de '{spec.name}': Z={z:.6f} ± {se:.2e} (M={mc_samples})")
    return z, se


@dataclass(frozen=True, eq=False)
class ReferenceDensity(BaseModel):
    """p^ref(x) = mezcla(x)·𝟙_Ω(x) / Z."""
    spec: Any
    log_normalizer: float = 0.0
    normalizer_se: float = 0.0

    def _validate_instance(self):
        if not math.isfinite(self.log_normalizer):
            raise ValidationError("El normalizador debe ser positivo")

    @classmethod
    def build(cls, spec: MixtureSpec, mc_samples: Optional[int] = None,
              seed: Optional[int] = None) -> 'ReferenceDensity':
        z, se = estimate_normalizer(
            spec,
            mc_samples if mc_samples is not None else Config.NORMALIZER_MC_SAMPLES,
            seed if seed is not None else Config.NORMALIZER_SEED,
        )
        return cls(spec=spec, log_normalizer=math.log(z), normalizer_se=se)

    @property
    def normalizer(self) -> float:
        return math.exp(self.log_normalizer)

    @property
    def domain(self) -> AxisBox:
        return self.spec.domain

    def pdf_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        values = np.zeros(pts.shape[0])
        inside = self.domain.contains_closed(pts)
        if np.any(inside):
            values[inside] = self.spec.mixture_pdf(pts[inside]) / self.normalizer
        return values

    def to_dict(self) -> Dict[str, Any]:
        return {
            'spec': self.spec.to_dict(),
            'normalizer': self.normalizer,
            'normalizer_se': self.normalizer_se,
        }


def pdf(ref: ReferenceDensity, p: ArrayLike) -> float:
    """Densidad de referencia en p; 0 fuera del dominio."""
    point = np.asarray(p, dtype=np.float64).reshape(1, -1)
    return float(ref.pdf_many(point)[0])


@dataclass(frozen=True)
class SamplerSettings:
    """Presupuestos del muestreo por rechazo y del Monte Carlo de Z, tomados de la configuración."""
    batch: int = Config.SAMPLER_BATCH
    probe: int = Config.SAMPLER_PROBE
    mc_samples: int = Config.NORMALIZER_MC_SAMPLES
    normalizer_seed: int = Config.NORMALIZER_SEED

    @classmethod
    def from_config(cls, app_config: Dict[str, Any]) -> 'SamplerSettings':
        defaults = cls()
        return cls(
            batch=app_config.get('SAMPLER_BATCH', defaults.batch),
            probe=app_config.get('SAMPLER_PROBE', defaults.probe),
            mc_samples=app_config.get('NORMALIZER_MC_SAMPLES', defaults.mc_samples),
            normalizer_seed=app_config.get('NORMALIZER_SEED', defaults.normalizer_seed),
        )

    def draw(self, spec: MixtureSpec, n: int, seed: int) -> SampleSet:
        return sample(spec, n, seed, batch=self.batch, probe=self.probe)

    def reference(self, spec: MixtureSpec) -> ReferenceDensity:
        return ReferenceDensity.build(spec, self.mc_samples, self.normalizer_seed)
