from config import get_config

from .utils.logging_config import configure_logging

__version__ = '0.1.0'


def create_context(config_name: str = None):
    """Resuelve la configuración del entorno y deja el logging listo (equivalente al create_app)."""
    settings = get_config(config_name)
    configure_logging(settings)
    return settings
