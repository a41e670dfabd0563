"""
Excepciones del dominio y validadores de parámetros numéricos.

Todas las excepciones heredan de KemaslovError y llevan un código estable
que el runner traduce a líneas de estado y códigos de salida.
"""

import logging
import math
from typing import Any, Dict, Mapping, Optional

logger = logging.getLogger(__name__)


class KemaslovError(Exception):
    """Excepción base con código, campo y detalles opcionales"""

    default_code = 'KEMASLOV_ERROR'

    def __init__(self, message: str, code: str = None, field: str = None,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.code = code or self.default_code
        self.field = field
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        data = {'code': self.code, 'message': self.message}
        if self.field:
            data['field'] = self.field
        if self.details:
            data['details'] = self.details
        return data


class DomainError(KemaslovError):
    """Punto fuera del dominio de una carta o fuera de un solapamiento"""
    default_code = 'DOMAIN_ERROR'


class ContractViolation(KemaslovError):
    default_code = 'CONTRACT_VIOLATION'


class ImmersionError(KemaslovError):
    """Marco tangente degenerado o métrica inducida singular"""
    default_code = 'IMMERSION_FAILURE'


class CoverageError(KemaslovError):
    """La superficie sale de las cartas declaradas"""
    default_code = 'COVERAGE_ERROR'


class ResolutionError(KemaslovError):
    """Salto de fase que no se resuelve con el refinamiento máximo"""
    default_code = 'RESOLUTION_ERROR'


class InconsistentTraceError(KemaslovError):
    default_code = 'INCONSISTENT_TRACE'


class LinkageError(KemaslovError):
    """El borde de la superficie no coincide con el lazo declarado en L"""
    default_code = 'LINKAGE_ERROR'


class ResourceError(KemaslovError):
    default_code = 'RESOURCE_ERROR'


class PreconditionError(KemaslovError):
    default_code = 'PRECONDITION_ERROR'


class ConfigError(KemaslovError):
    """Error de configuración; `line` apunta a la línea del TOML cuando se conoce"""
    default_code = 'CONFIG_ERROR'

    def __init__(self, message: str, code: str = None, field: str = None,
                 details: Optional[Dict[str, Any]] = None, line: Optional[int] = None):
        super().__init__(message, code=code, field=field, details=details)
        self.line = line

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        if self.line is not None:
            data['line'] = self.line
        return data


MIN_RESOLUTION = 8


def validate_resolution(value: Any, field: str = 'resolution', max_resolution: int = 2 ** 14) -> int:
    """La resolución debe ser potencia de dos en [8, max_resolution]"""
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{field} debe ser entero, recibido {value!r}", field=field)
    if value < MIN_RESOLUTION or value > max_resolution or value & (value - 1):
        raise ConfigError(
            f"{field}={value} no es potencia de dos en [{MIN_RESOLUTION}, {max_resolution}]",
            code='INVARIANT_VIOLATION', field=field,
        )
    return value


def validate_order(value: Any, field: str = 'quadrature_order') -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 2:
        raise ConfigError(f"{field} debe ser un entero >= 2, recibido {value!r}",
                          code='INVARIANT_VIOLATION', field=field)
    return value


def validate_tolerances(values: Mapping[str, Any], known: Mapping[str, float]) -> Dict[str, float]:
    """Mezcla tolerancias con los valores por defecto; rechaza claves desconocidas"""
    merged = dict(known)
    for key, raw in (values or {}).items():
        if key not in known:
            raise ConfigError(
                f"Tolerancia desconocida '{key}'. Válidas: {', '.join(sorted(known))}",
                field=f"tolerances.{key}",
            )
        try:
            tol = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"Tolerancia '{key}' no numérica: {raw!r}", field=f"tolerances.{key}")
        if not math.isfinite(tol) or tol <= 0:
            raise ConfigError(f"Tolerancia '{key}' debe ser positiva, recibido {raw!r}",
                              code='INVARIANT_VIOLATION', field=f"tolerances.{key}")
        merged[key] = tol
    return merged
