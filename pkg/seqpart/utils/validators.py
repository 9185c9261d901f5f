from contextlib import contextmanager
from functools import wraps
from typing import Any, Dict, Iterable, List, Optional
import logging
import time

import psutil

from config import Config
from seqpart.models.base_model import ValidationError

logger = logging.getLogger(__name__)


class ParameterValidator:
    """
    Validaciones de parámetros de línea de comandos y de archivos de especificación.
    """

    @staticmethod
    def parse_count(value: Any, name: str = 'N') -> int:
        """Entero positivo que admite notación científica ('1e5')."""
        try:
            number = float(value)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"{name} debe ser numérico, se recibió {value!r}") from e
        if not number.is_integer():
            raise ValidationError(f"{name} debe ser entero, se recibió {value!r}")
        return int(number)

    @staticmethod
    def parse_float_list(text: str, name: str = 'grid') -> List[float]:
        """Lista separada por comas; acepta también 'inicio:fin:paso'."""
        items = [item.strip() for item in str(text).split(',') if item.strip()]
        if not items:
            raise ValidationError(f"{name} no puede estar vacío")
        values: List[float] = []
        try:
            for item in items:
                if item.count(':') == 2:
                    start, stop, step = (float(part) for part in item.split(':'))
                    if step <= 0 or stop < start:
                        raise ValidationError(f"Rango inválido en {name}: {item}")
                    count = int(round((stop - start) / step)) + 1
                    values.extend(start + k * step for k in range(count))
                else:
                    values.append(float(item))
        except ValueError as e:
            raise ValidationError(f"Valor no numérico en {name}: {text!r}") from e
        return values

    @staticmethod
    def parse_choices(text: str, allowed: Iterable[str], name: str) -> List[str]:
        allowed = list(allowed)
        items = [item.strip().lower() for item in str(text).split(',') if item.strip()]
        errors = [item for item in items if item not in allowed]
        if not items or errors:
            raise ValidationError(
                f"{name} inválido: {', '.join(errors) or '(vacío)'}. Opciones: {', '.join(allowed)}",
                {'invalid': errors}
            )
        return items

    @staticmethod
    def validate_engine_params(params: Dict[str, Any]) -> Dict[str, str]:
        """Errores de los parámetros del particionado, por campo."""
        errors = {}
        if 'theta' in params and not params['theta'] > 0:
            errors['theta'] = 'theta debe ser positivo'
        if 'm' in params and params['m'] < 2:
            errors['m'] = 'm debe ser al menos 2'
        for key in ('eps1', 'eps2', 'eps3'):
            if key in params and not params[key] > 0:
                errors[key] = f'{key} debe ser positivo'
        if 'n_min' in params and params['n_min'] < 1:
            errors['n_min'] = 'n_min debe ser al menos 1'
        if 'max_depth' in params and params['max_depth'] < 1:
            errors['max_depth'] = 'max_depth debe ser al menos 1'
        return errors


def _rss_mb() -> float:
    return round(psutil.Process().memory_info().rss / (1024 * 1024), 1)


class PerformanceLogger:
    """
    Logging de rendimiento de comandos y etapas internas.
    """

    @staticmethod
    def log_command_performance(f):
        """
        Decorator que registra duración y memoria residente de un comando.
        """
        @wraps(f)
        def decorated_function(*args, **kwargs):
            start_time = time.perf_counter()
            name = f.__name__
            logger.info(f"COMMAND START: {name} | RSS: {_rss_mb()}MB")

            try:
                result = f(*args, **kwargs)

                elapsed = round((time.perf_counter() - start_time) * 1000, 2)
                logger.info(f"COMMAND END: {name} | Time: {elapsed}ms | RSS: {_rss_mb()}MB")

                if elapsed > Config.SLOW_COMMAND_THRESHOLD_MS:
                    logger.warning(f"SLOW COMMAND: {name} | Time: {elapsed}ms")

                return result

            except Exception as e:
                elapsed = round((time.perf_counter() - start_time) * 1000, 2)
                logger.error(f"COMMAND ERROR: {name} | Error: {str(e)} | Time: {elapsed}ms")
                raise

        return decorated_function

    @staticmethod
    @contextmanager
    def log_stage(description: str, slow_ms: Optional[float] = None):
        """
        Context manager para etapas internas (muestreo, normalización, E₂).
        """
        start_time = time.perf_counter()
        logger.debug(f"STAGE START: {description}")
        try:
            yield
        except Exception as e:
            elapsed = round((time.perf_counter() - start_time) * 1000, 2)
            logger.error(f"STAGE ERROR: {description} | Error: {str(e)} | Time: {elapsed}ms")
            raise
        elapsed = round((time.perf_counter() - start_time) * 1000, 2)
        logger.debug(f"STAGE END: {description} | Time: {elapsed}ms")
        if slow_ms is not None and elapsed > slow_ms:
            logger.warning(f"SLOW STAGE: {description} | Time: {elapsed}ms")
