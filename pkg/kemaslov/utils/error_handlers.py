"""
Manejo centralizado de errores del runner de verificación
"""

import logging
from typing import Any, Dict, Iterable

from kemaslov.models.report import ERROR, FAIL
from kemaslov.utils.validators import (
    ConfigError, ContractViolation, DomainError, KemaslovError, LinkageError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2

# Errores esperables por datos de entrada: se registran como advertencia
_EXPECTED = (ConfigError, DomainError, ContractViolation, LinkageError)


def describe_error(exc: BaseException, scenario: str = None) -> Dict[str, Any]:
    """Convierte cualquier excepción en un payload estable (code, message, details)"""
    where = f" [{scenario}]" if scenario else ''
    if isinstance(exc, KemaslovError):
        payload = exc.to_dict()
        if isinstance(exc, _EXPECTED):
            logger.warning(f"{exc.code}{where}: {exc.message}")
        else:
            logger.error(f"{exc.code}{where}: {exc.message}")
        return payload

    if isinstance(exc, FloatingPointError):
        logger.error(f"NUMERICAL_ERROR{where}: {exc}")
        return {'code': 'NUMERICAL_ERROR', 'message': str(exc)}

    if isinstance(exc, MemoryError):
        logger.error(f"RESOURCE_ERROR{where}: memoria insuficiente")
        return {'code': 'RESOURCE_ERROR', 'message': 'Memoria insuficiente'}

    logger.error(f"Error inesperado{where}: {exc}", exc_info=True)
    return {'code': 'INTERNAL_ERROR', 'message': f"{type(exc).__name__}: {exc}"}


def exit_code_for(reports: Iterable) -> int:
    """0 si todo pasa (o no hay reportes); 1 ante cualquier FAIL o ERROR"""
    for report in reports:
        if report.status in (FAIL, ERROR):
            return EXIT_FAILURE
    return EXIT_OK
