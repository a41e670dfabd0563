"""
Configuración centralizada del sistema de logging.
"""
import logging
import sys

_CONFIGURED = False

# Logger de auditoría: una línea por escenario verificado
audit_logger = logging.getLogger('kemaslov.audit')


class _StderrHandler(logging.StreamHandler):
    """Escribe en el sys.stderr vigente en cada registro (click y pytest lo reemplazan)"""

    def emit(self, record):
        self.stream = sys.stderr
        super().emit(record)


def configure_logging(config):
    """Configura logging sin duplicar handlers; stdout queda libre para las líneas de estado."""
    global _CONFIGURED
    lvl = getattr(config, 'LOG_LEVEL', logging.INFO)
    root = logging.getLogger()
    package_logger = logging.getLogger('kemaslov')
    package_logger.setLevel(lvl)
    if not _CONFIGURED:
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
        package_logger.addHandler(handler)
        package_logger.propagate = False
        _CONFIGURED = True
    if root.level == logging.NOTSET:
        root.setLevel(logging.WARNING)
    package_logger.debug(f"Logging configurado con nivel {logging.getLevelName(lvl)}")


def log_scenario_result(name: str, status: str, residual, duration: float):
    """Registro de auditoría por escenario"""
    audit_logger.info(
        f"scenario={name} status={status} residual={residual} duration={duration:.3f}s"
    )
