import json
import logging
from typing import Any, Dict, Optional, Tuple

from seqpart.models.base_model import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INVARIANCE = 3


class CommandResponse:
    """
    Respuestas estandarizadas de los comandos.
    Estructura común para éxito y error, con código de salida del proceso.
    """

    @staticmethod
    def success(data: Any = None, message: str = "Operación exitosa",
                meta: Optional[Dict] = None) -> Tuple[Dict[str, Any], int]:
        """
        Respuesta de éxito estandarizada.

        Returns:
            Tuple con (payload, exit_code)
        """
        response = {
            "success": True,
            "message": message,
            "data": data,
            "exit_code": EXIT_OK
        }
        if meta:
            response["meta"] = meta

        logger.debug(f"Success response: {message}")
        return response, EXIT_OK

    @staticmethod
    def error(message: str, exit_code: int = EXIT_DATA,
              error_code: Optional[str] = None,
              details: Optional[Dict] = None) -> Tuple[Dict[str, Any], int]:
        response = {
            "success": False,
            "message": message,
            "error": {
                "code": error_code or f"EXIT_{exit_code}",
                "details": details or {}
            },
            "exit_code": exit_code
        }
        logger.error(f"Error response: {exit_code} - {message}")
        return response, exit_code

    @staticmethod
    def from_exception(exc: ValidationError) -> Tuple[Dict[str, Any], int]:
        """Error de datos o validación (código de salida 2)."""
        return CommandResponse.error(
            message=exc.message,
            exit_code=EXIT_DATA,
            error_code=exc.error_code,
            details=exc.details
        )

    @staticmethod
    def invariance_failure(report: Dict[str, Any]) -> Tuple[Dict[str, Any], int]:
        return CommandResponse.error(
            message="Falló la verificación de invarianzas",
            exit_code=EXIT_INVARIANCE,
            error_code="INVARIANCE_FAILURE",
            details=report
        )

    @staticmethod
    def render(response: Dict[str, Any], as_json: bool = False) -> str:
        """Texto alineado clave: valor, o JSON con claves ordenadas."""
        if as_json:
            return json.dumps(response, sort_keys=True, indent=2, default=str)
        lines = [response["message"]]
        body = response.get("data") if response.get("success") else response.get("error", {}).get("details")
        if isinstance(body, dict) and body:
            width = max(len(str(key)) for key in body)
            for key, value in body.items():
                lines.append(f"  {str(key).ljust(width)} : {value}")
        return "\n".join(lines)
