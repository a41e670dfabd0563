"""
Interfaz de línea de comandos del verificador.

    python run.py --catalog full --out reports
    python run.py --config configs/latitude.toml --levels 4

Códigos de salida: 0 todo PASS, 1 algún FAIL/ERROR, 2 error de configuración.
"""

import logging
from pathlib import Path

import click

from kemaslov import create_context
from kemaslov.controllers.suite_controller import (
    CATALOGS, CONVERGENCE_BASE, catalog, convergence_study, load_config, run_suite, with_resolution,
    write_convergence, write_reports,
)
from kemaslov.utils.error_handlers import EXIT_CONFIG_ERROR, EXIT_FAILURE, EXIT_OK, describe_error
from kemaslov.utils.response_handler import convergence_lines
from kemaslov.utils.validators import ConfigError, KemaslovError, PreconditionError

logger = logging.getLogger(__name__)


def _config_failure(exc: KemaslovError):
    where = f" (línea {exc.line})" if getattr(exc, 'line', None) else ''
    click.echo(f"{exc.code}{where}: {exc.message}", err=True)
    raise SystemExit(EXIT_CONFIG_ERROR)


@click.command(name='kemaslov')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False, path_type=Path),
              help='Archivo TOML con escenarios.')
@click.option('--catalog', 'catalog_name', type=click.Choice(sorted(CATALOGS)),
              help='Catálogo integrado de escenarios.')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Directorio de salida de reportes.')
@click.option('--resolution', type=int, default=None, help='Fuerza la resolución de todos los escenarios.')
@click.option('--levels', type=int, default=None, help='Modo convergencia: número de niveles de refinamiento.')
@click.option('--threads', type=int, default=None, help='Hilos del pool de escenarios.')
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv', 'both']), default='both', show_default=True)
@click.option('--timing/--no-timing', default=None, help='Incluye el tiempo de pared en el JSON.')
@click.option('--env', 'env_name', default=None, help='Entorno de configuración (development, production, testing).')
def main(config_path, catalog_name, out_dir, resolution, levels, threads, fmt, timing, env_name):
    """Verifica μ(F) - 2λω(F) = σ_L(∂F)/π sobre escenarios de inmersiones lagrangianas."""
    try:
        settings = create_context(env_name)
    except ConfigError as e:
        _config_failure(e)

    if bool(config_path) == bool(catalog_name):
        raise click.UsageError('Indique exactamente uno de --config o --catalog')

    out_dir = out_dir or Path(settings.OUTPUT_DIR)
    threads = threads if threads is not None else settings.DEFAULT_THREADS
    include_timing = settings.REPORT_TIMING if timing is None else timing

    try:
        configs = load_config(config_path) if config_path else catalog(catalog_name)
        if resolution is not None:
            configs = with_resolution(configs, resolution)
    except ConfigError as e:
        _config_failure(e)

    if levels is not None:
        tables = []
        code = EXIT_OK
        for cfg in configs:
            try:
                table = convergence_study(cfg, levels, base_resolution=resolution or CONVERGENCE_BASE)
            except PreconditionError as e:
                _config_failure(e)
            except Exception as e:
                error = describe_error(e, cfg.name)
                click.echo(f"ERROR {cfg.name} {error['code']}: {error['message']}")
                code = EXIT_FAILURE
                continue
            tables.append(table)
            for line in convergence_lines(table):
                click.echo(line)
        write_convergence(tables, out_dir, fmt)
        raise SystemExit(code)

    try:
        reports, code = run_suite(configs, threads, settings.SAMPLE_COUNT, emit=click.echo)
    except ConfigError as e:
        _config_failure(e)
    write_reports(reports, out_dir, fmt, include_timing, configs)
    raise SystemExit(code)
