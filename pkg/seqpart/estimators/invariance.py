"""
Verificación aleatorizada de invarianzas:

- la discrepancia de mezcla no cambia por reflexión, rotación de 90° en un
  plano coordenado ni permutación de coordenadas;
- el resultado del test de momentos no cambia por reflexión respecto del
  centro de la caja ni por rotación en un par de ejes de igual extensión;
- la discrepancia estrella sí cambia por reflexión (se busca un testigo).
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
import logging
import math

import numpy as np

from seqpart.estimators.discrepancy import mixture_discrepancy, star_discrepancy_exact
from seqpart.estimators.moments import moment_uniformity_test
from seqpart.models.base_model import ValidationError
from seqpart.models.criteria import MomentTolerances
from seqpart.models.geometry import AxisBox

logger = logging.getLogger(__name__)

RELATIVE_TOLERANCE = 1e-12
MIN_POINTS, MAX_POINTS = 2, 64
MAX_DIM = 6
WITNESS_ATTEMPTS = 1000
WITNESS_GAP = 1e-6


# ====================================================================
# TRANSFORMACIONES
# ====================================================================

def reflect(points: np.ndarray, axis: int, box: Optional[AxisBox] = None) -> np.ndarray:
    """y_j ↦ lo_j + hi_j − y_j en el eje indicado (por defecto en el cubo unidad)."""
    out = np.array(points, dtype=np.float64)
    lo, hi = (0.0, 1.0) if box is None else (box.lo[axis], box.hi[axis])
    out[:, axis] = (lo + hi) - out[:, axis]
    return out


def rotate(points: np.ndarray, first: int, second: int, box: Optional[AxisBox] = None) -> np.ndarray:
    """
    Rotación de 90° en el plano (first, second) alrededor del centro:
    (u_first, u_second) ↦ (u_second, 1 − u_first) en coordenadas de la caja.
    """
    if first == second:
        raise ValidationError("La rotación necesita dos ejes distintos")
    out = np.array(points, dtype=np.float64)
    if box is None:
        out[:, first] = points[:, second]
        out[:, second] = 1.0 - points[:, first]
        return out
    if not math.isclose(box.widths[first], box.widths[second], rel_tol=1e-12):
        raise ValidationError("La rotación exige la misma extensión en ambos ejes")
    out[:, first] = box.lo[first] + (points[:, second] - box.lo[second])
    out[:, second] = box.hi[second] - (points[:, first] - box.lo[first])
    return out


def permute(points: np.ndarray, order: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(points)[:, order])


# ====================================================================
# REPORTE
# ====================================================================

@dataclass
class CheckResult:
    name: str
    trials: int = 0
    failures: int = 0
    max_relative_gap: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'trials': self.trials,
            'failures': self.failures,
            'max_relative_gap': self.max_relative_gap,
            'passed': self.passed,
        }


@dataclass
class InvarianceReport:
    trials: int
    seed: int
    checks: List[CheckResult] = field(default_factory=list)
    star_witness: Optional[Dict[str, Any]] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.trials == 0:
            return True
        return all(check.passed for check in self.checks) and self.star_witness is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'trials': self.trials,
            'seed': self.seed,
            'passed': self.passed,
            'checks': {check.name: check.to_dict() for check in self.checks},
            'star_witness': self.star_witness,
            'warnings': list(self.warnings),
        }

    def to_text(self) -> str:
        lines = [f"Invariance suite: trials={self.trials} seed={self.seed}"]
        for check in self.checks:
            status = 'PASS' if check.passed else 'FAIL'
            lines.append(f"  [{status}] {check.name}: {check.trials - check.failures}/{check.trials} "
                         f"(max relative gap {check.max_relative_gap:.3e})")
        if self.trials:
            if self.star_witness is not None:
                w = self.star_witness
                lines.append(f"  [PASS] star non-invariance witness: D*={w['original']:.6f} "
                             f"vs reflected {w['reflected']:.6f} (attempt {w['attempt']})")
            else:
                lines.append("  [FAIL] star non-invariance witness: not found")
        for warning in self.warnings:
            lines.append(f"  warning: {warning}")
        lines.append('PASSED' if self.passed else 'FAILED')
        return '\n'.join(lines)


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def _random_points(rng: np.random.Generator) -> np.ndarray:
    n = int(rng.integers(MIN_POINTS, MAX_POINTS + 1))
    d = int(rng.integers(1, MAX_DIM + 1))
    return rng.random((n, d))


# ====================================================================
# SUITES
# ====================================================================

def check_mixture_invariance(trials: int, rng: np.random.Generator) -> List[CheckResult]:
    reflection = CheckResult('mixture reflection')
    rotation = CheckResult('mixture rotation')
    permutation = CheckResult('mixture permutation')
    for _ in range(trials):
        pts = _random_points(rng)
        d = pts.shape[1]
        base = mixture_discrepancy(pts)

        axis = int(rng.integers(0, d))
        gap = _relative_gap(base, mixture_discrepancy(reflect(pts, axis)))
        reflection.trials += 1
        reflection.max_relative_gap = max(reflection.max_relative_gap, gap)
        reflection.failures += gap > RELATIVE_TOLERANCE

        if d >= 2:
            first, second = (int(v) for v in rng.choice(d, size=2, replace=False))
            gap = _relative_gap(base, mixture_discrepancy(rotate(pts, first, second)))
            rotation.trials += 1
            rotation.max_relative_gap = max(rotation.max_relative_gap, gap)
            rotation.failures += gap > RELATIVE_TOLERANCE

        gap = _relative_gap(base, mixture_discrepancy(permute(pts, rng.permutation(d))))
        permutation.trials += 1
        permutation.max_relative_gap = max(permutation.max_relative_gap, gap)
        permutation.failures += gap > RELATIVE_TOLERANCE
    return [reflection, rotation, permutation]


def _random_box(rng: np.random.Generator, d: int) -> AxisBox:
    lo = rng.uniform(-1.0, 1.0, size=d)
    widths = rng.uniform(0.1, 2.0, size=d)
    if d >= 2:
        widths[1] = widths[0]
    return AxisBox(lo, lo + widths)


def check_moment_invariance(trials: int, rng: np.random.Generator) -> List[CheckResult]:
    reflection = CheckResult('moment-test reflection')
    rotation = CheckResult('moment-test rotation')
    for _ in range(trials):
        unit = _random_points(rng)
        d = unit.shape[1]
        box = _random_box(rng, d)
        pts = box.lo + unit * box.widths
        tol = MomentTolerances(*rng.uniform(0.05, 0.5, size=3))
        base = moment_uniformity_test(pts, box, tol)

        axis = int(rng.integers(0, d))
        reflection.trials += 1
        reflection.failures += moment_uniformity_test(reflect(pts, axis, box), box, tol) != base

        if d >= 2:
            rotation.trials += 1
            rotation.failures += moment_uniformity_test(rotate(pts, 0, 1, box), box, tol) != base
    return [reflection, rotation]


def find_star_witness(rng: np.random.Generator, attempts: int = WITNESS_ATTEMPTS) -> Optional[Dict[str, Any]]:
    """Busca 3 puntos en d=2 cuya D* cambia al reflejar el primer eje."""
    for attempt in range(1, attempts + 1):
        pts = rng.random((3, 2))
        original = star_discrepancy_exact(pts).value
        reflected = star_discrepancy_exact(reflect(pts, 0)).value
        if abs(original - reflected) > WITNESS_GAP:
            return {
                'points': pts.tolist(),
                'original': original,
                'reflected': reflected,
                'attempt': attempt,
            }
    return None


def run_invariance_suite(trials: int, seed: int = 0) -> InvarianceReport:
    """Ejecuta todas las verificaciones con un único generador sembrado."""
    if trials < 0:
        raise ValidationError("trials no puede ser negativo")
    report = InvarianceReport(trials=trials, seed=seed)
    if trials == 0:
        message = "trials=0: no se ejecutó ninguna verificación (aprobado vacuo)"
        logger.warning(message)
        report.warnings.append(message)
        return report

    rng = np.random.default_rng(seed)
    report.checks.extend(check_mixture_invariance(trials, rng))
    report.checks.extend(check_moment_invariance(trials, rng))
    report.star_witness = find_star_witness(rng)
    logger.info(f"Invarianzas: trials={trials} seed={seed} passed={report.passed}")
    return report
