from typing import Any, Dict, Optional
import logging

logger = logging.getLogger(__name__)


class ValidationError(ValueError):
    """Error de validación de datos o de contrato de una operación."""

    error_code = 'VALIDATION_ERROR'

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class DimensionMismatchError(ValidationError):
    error_code = 'DIMENSION_MISMATCH'


class EmptySubsetError(ValidationError):
    error_code = 'EMPTY_SUBSET'


class OutOfDomainError(ValidationError):
    """Un punto no pertenece a la caja o dominio esperado."""
    error_code = 'OUT_OF_DOMAIN'

    def __init__(self, message: str, row: Optional[int] = None,
                 details: Optional[Dict[str, Any]] = None):
        details = dict(details or {})
        if row is not None:
            details['row'] = row
        super().__init__(message, details)
        self.row = row


class BudgetExceededError(ValidationError):
    error_code = 'BUDGET_EXCEEDED'


class DegenerateDistributionError(ValidationError):
    error_code = 'DEGENERATE_DISTRIBUTION'


class FileFormatError(ValidationError):
    """Error de lectura de un archivo; incluye el número de línea si se conoce."""
    error_code = 'FILE_FORMAT_ERROR'

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        details = {}
        if line is not None:
            details['line'] = line
        if path is not None:
            details['path'] = path
        prefix = f"{path}:{line}: " if path and line is not None else ''
        super().__init__(prefix + message, details)
        self.line = line


class BaseModel:
    """
    Base mínima para los modelos del dominio.

    Las subclases implementan `_validate_instance` y `to_dict`; la validación
    se ejecuta al construir la instancia.
    """

    def __post_init__(self):
        self._validate_instance()

    def _validate_instance(self) -> None:
        """Validaciones específicas; por defecto no hace nada."""

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError
