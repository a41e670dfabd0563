import os
import math
import logging
from dotenv import load_dotenv

# Cargar variables de entorno desde .env antes de leer la configuracion.
load_dotenv(override=False)

# Valores de entorno inválidos; get_config los reporta como ConfigError
_ENV_ERRORS = []


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw.strip())
    except ValueError:
        _ENV_ERRORS.append((name, f"{name} debe ser entero, recibido {raw!r}"))
        return default


def _env_bool(name: str, default: bool = False) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return str(raw).strip().lower() in {'1', 'true', 'yes', 'y', 'on'}


def _env_level(name: str, default: int) -> int:
    raw = (os.getenv(name) or '').strip().upper()
    if not raw:
        return default
    level = logging.getLevelName(raw)
    return level if isinstance(level, int) else default


class Config:
    """Configuración base del verificador. Aplica a todos los entornos."""

    # -----------------------
    # Discretización
    # -----------------------
    DEFAULT_RESOLUTION = _env_int('KEMASLOV_RESOLUTION', 64)
    DEFAULT_QUADRATURE_ORDER = _env_int('KEMASLOV_QUADRATURE_ORDER', 8)
    MAX_RESOLUTION = 2 ** 14
    # Muestras de fase por componente de borde antes del refinamiento adaptativo
    PHASE_SAMPLES = 256
    MAX_REFINE_DEPTH = 20
    UNWRAP_MARGIN = math.pi / 2
    FD_STEP = 1e-4
    OVERLAP_TOLERANCE = 1e-9

    # -----------------------
    # Muestreo de identidades auxiliares
    # -----------------------
    SAMPLE_COUNT = _env_int('KEMASLOV_SAMPLE_COUNT', 100)
    RANDOM_SEED = _env_int('KEMASLOV_SEED', 20240101)

    # -----------------------
    # Tolerancias
    # -----------------------
    TOLERANCES = {
        'identity': 1e-5,
        'lagrangian': 1e-10,
        'oh_identity': 1e-7,
        'closedness': 1e-6,
        'einstein_cells': 1e-4,
        'einstein_stokes': 1e-6,
        'minimality': 1e-7,
        'monotonicity': 1e-5,
        'boundary_dependence': 1e-5,
    }

    # -----------------------
    # Ejecución y salida
    # -----------------------
    DEFAULT_THREADS = _env_int('KEMASLOV_THREADS', 1)
    OUTPUT_DIR = os.getenv('KEMASLOV_OUTPUT_DIR') or 'reports'
    # El tiempo de pared rompe la salida byte a byte idéntica; solo bajo demanda
    REPORT_TIMING = _env_bool('KEMASLOV_REPORT_TIMING', default=False)

    # -----------------------
    # Logging
    # -----------------------
    LOG_LEVEL = _env_level('KEMASLOV_LOG_LEVEL', logging.INFO)


class DevelopmentConfig(Config):
    """Configuración para desarrollo local."""
    LOG_LEVEL = _env_level('KEMASLOV_LOG_LEVEL', logging.DEBUG)


class ProductionConfig(Config):
    """Configuración para corridas largas de verificación (catálogo completo, CI)."""
    LOG_LEVEL = _env_level('KEMASLOV_LOG_LEVEL', logging.WARNING)


class TestingConfig(Config):
    """Configuración específica para pruebas (resoluciones reducidas)."""
    TESTING = True
    DEFAULT_RESOLUTION = 32
    SAMPLE_COUNT = 24
    LOG_LEVEL = logging.DEBUG


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name: str = None):
    """Resuelve la clase de configuración por nombre o por KEMASLOV_ENV."""
    from kemaslov.utils.validators import ConfigError

    key = name or os.getenv('KEMASLOV_ENV') or 'default'
    if _ENV_ERRORS:
        field, message = _ENV_ERRORS[0]
        raise ConfigError(message, field=field)
    if key not in config:
        raise ConfigError(f"Entorno '{key}' desconocido. Válidos: {', '.join(sorted(config))}",
                          field='KEMASLOV_ENV')
    return config[key]
