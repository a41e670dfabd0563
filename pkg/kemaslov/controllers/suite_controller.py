"""
Runner por lotes: lectura de escenarios TOML, catálogos integrados,
ejecución en un pool de hilos, estudios de convergencia y escritura de
reportes JSON/CSV.
"""

import csv
import io
import logging
import re
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from config import Config
from kemaslov.controllers.verify_controller import (
    boundary_dependence_report, delta_report, identity_residual, identity_terms, monotonicity_check,
)
from kemaslov.models.ambient import MANIFOLD_CONSTRUCTORS, AmbientManifold
from kemaslov.models.lagrangian import LAGRANGIAN_CONSTRUCTORS, LagrangianImmersion
from kemaslov.models.report import (
    ERROR, FAIL, ConvergenceRow, ConvergenceTable, ScenarioConfig, VerificationReport,
)
from kemaslov.models.surface import MAX_RESOLUTION, BoundedSurface, build_surface
from kemaslov.utils.error_handlers import describe_error, exit_code_for
from kemaslov.utils.json_utils import dumps
from kemaslov.utils.logging_config import log_scenario_result
from kemaslov.utils.quadrature import observed_orders
from kemaslov.utils.response_handler import status_line
from kemaslov.utils.spec_parser import build_from_registry, parse_constructor
from kemaslov.utils.validators import (
    ConfigError, KemaslovError, PreconditionError, ResourceError, validate_order, validate_resolution,
    validate_tolerances,
)

logger = logging.getLogger(__name__)

KINDS = ('identity', 'monotonicity', 'boundary_dependence', 'delta')
SCENARIO_KEYS = {
    'name', 'kind', 'manifold', 'lagrangian', 'surface', 'surfaces', 'resolution',
    'quadrature_order', 'seed', 'tolerances', 'output',
}
OUTPUT_KEYS = {'json', 'csv'}
TOP_LEVEL_SECTIONS = {'scenario', 'defaults', 'tolerances', 'output'}
SUMMARY_COLUMNS = ('scenario', 'status', 'lambda', 'mu', 'omega_F', 'sigma_over_pi', 'residual')

# Número de superficies admitido por tipo de escenario: (mínimo, máximo)
SURFACE_ARITY = {
    'identity': (1, 1),
    'monotonicity': (1, None),
    'boundary_dependence': (2, 2),
    'delta': (1, None),
}


@dataclass
class Scenario:
    """Escenario con sus objetos geométricos ya construidos"""
    config: ScenarioConfig
    manifold: AmbientManifold
    lagrangian: LagrangianImmersion
    surfaces: List[BoundedSurface]


# ----------------------------------------------------------------------
# Lectura de configuración
# ----------------------------------------------------------------------
def _decode_line(exc: tomllib.TOMLDecodeError) -> Optional[int]:
    line = getattr(exc, 'lineno', None)
    if line is not None:
        return line
    match = re.search(r'line (\d+)', str(exc))
    return int(match.group(1)) if match else None


def _scenario_header_lines(text: str) -> List[int]:
    return [i + 1 for i, raw in enumerate(text.splitlines()) if raw.strip().startswith('[[scenario]]')]


def _key_line(text: str, key: str, start: int = 1) -> Optional[int]:
    pattern = re.compile(rf'^\s*{re.escape(key)}\s*=')
    for number, raw in enumerate(text.splitlines()[start - 1:], start=start):
        if pattern.match(raw):
            return number
    return None


def _at_line(exc: ConfigError, line: Optional[int]) -> ConfigError:
    if exc.line is None:
        exc.line = line
    return exc


def _check_keys(table: Dict, allowed: set, where: str, text: str, start: int):
    for key in table:
        if key not in allowed:
            raise ConfigError(
                f"Clave desconocida '{key}' en {where}. Válidas: {', '.join(sorted(allowed))}",
                code='UNKNOWN_KEY', field=key, line=_key_line(text, key, start),
            )


def _surfaces_of(table: Dict, name: str) -> List[str]:
    if 'surface' in table and 'surfaces' in table:
        raise ConfigError(f"{name}: use 'surface' o 'surfaces', no ambos", field='surfaces')
    if 'surfaces' in table:
        surfaces = table['surfaces']
        if not isinstance(surfaces, list) or not all(isinstance(s, str) for s in surfaces):
            raise ConfigError(f"{name}: 'surfaces' debe ser una lista de cadenas", field='surfaces')
        return list(surfaces)
    if 'surface' in table:
        return [table['surface']]
    raise ConfigError(f"{name}: falta 'surface'", field='surface')


def _make_config(table: Dict, index: int, tolerances: Dict, output: Dict) -> ScenarioConfig:
    name = table.get('name') or f"scenario-{index + 1}"
    for required in ('manifold', 'lagrangian'):
        if required not in table:
            raise ConfigError(f"{name}: falta '{required}'", field=required)
    kind = table.get('kind', 'identity')
    if kind not in KINDS:
        raise ConfigError(f"{name}: tipo '{kind}' desconocido. Válidos: {', '.join(KINDS)}", field='kind')
    surfaces = _surfaces_of(table, name)
    low, high = SURFACE_ARITY[kind]
    if len(surfaces) < low or (high is not None and len(surfaces) > high):
        expected = f"{low}" if low == high else f"al menos {low}"
        raise ConfigError(f"{name}: el tipo '{kind}' espera {expected} superficie(s), recibidas {len(surfaces)}",
                          code='INVARIANT_VIOLATION', field='surfaces')
    seed = table.get('seed', Config.RANDOM_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"{name}: seed debe ser entero", field='seed')
    return ScenarioConfig(
        name=name,
        manifold=table['manifold'],
        lagrangian=table['lagrangian'],
        surfaces=surfaces,
        kind=kind,
        resolution=validate_resolution(table.get('resolution', Config.DEFAULT_RESOLUTION),
                                       max_resolution=MAX_RESOLUTION),
        quadrature_order=validate_order(table.get('quadrature_order', Config.DEFAULT_QUADRATURE_ORDER)),
        seed=seed,
        tolerances=validate_tolerances(tolerances, Config.TOLERANCES),
        output=dict(output),
    )


def parse_config(text: str) -> List[ScenarioConfig]:
    """Lee un documento TOML y devuelve los escenarios validados (objetos construidos una vez)"""
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"TOML inválido: {e}", code='PARSE_ERROR', line=_decode_line(e))

    if 'scenario' in document:
        _check_keys(document, TOP_LEVEL_SECTIONS, 'el nivel superior', text, 1)
        tables = document['scenario']
        if not isinstance(tables, list):
            raise ConfigError("'scenario' debe declararse como [[scenario]]", field='scenario',
                              line=_key_line(text, 'scenario'))
    else:
        single = {k: v for k, v in document.items() if k not in ('defaults',)}
        tables = [single] if single else []

    defaults = document.get('defaults', {})
    _check_keys(defaults, SCENARIO_KEYS - {'name'}, '[defaults]', text, 1)
    headers = _scenario_header_lines(text)
    # Secciones de nivel superior compartidas por todos los [[scenario]]
    shared_tolerances = document.get('tolerances', {}) if 'scenario' in document else {}
    shared_output = document.get('output', {}) if 'scenario' in document else {}

    configs = []
    for index, table in enumerate(tables):
        start = headers[index] if index < len(headers) else 1
        _check_keys(table, SCENARIO_KEYS, f"el escenario {index + 1}", text, start)
        merged = {**defaults, **table}
        tolerances = {**defaults.get('tolerances', {}), **shared_tolerances, **table.get('tolerances', {})}
        output = {**defaults.get('output', {}), **shared_output, **table.get('output', {})}
        try:
            _check_keys(tolerances, set(Config.TOLERANCES), '[tolerances]', text, start)
            _check_keys(output, OUTPUT_KEYS, '[output]', text, start)
            cfg = _make_config(merged, index, tolerances, output)
            cfg.line = start if headers else None
            build_scenario(cfg)
        except ConfigError as e:
            raise _at_line(e, (_key_line(text, e.field, start) if e.field else None) or start)
        except KemaslovError as e:
            raise ConfigError(f"{merged.get('name') or f'scenario-{index + 1}'}: {e.message}",
                              code=e.code, field=e.field, details=e.details, line=start)
        configs.append(cfg)

    names = [c.name for c in configs]
    duplicated = sorted({n for n in names if names.count(n) > 1})
    if duplicated:
        raise ConfigError(f"Nombres de escenario repetidos: {', '.join(duplicated)}", field='name')
    logger.debug(f"Configuración leída: {len(configs)} escenario(s)")
    return configs


def load_config(path) -> List[ScenarioConfig]:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"No se pudo leer {path}: {e.strerror}", field='config')
    return parse_config(text)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    manifold = build_from_registry(parse_constructor(cfg.manifold, 'manifold'), MANIFOLD_CONSTRUCTORS, 'manifold')
    lagrangian = build_from_registry(parse_constructor(cfg.lagrangian, 'lagrangian'), LAGRANGIAN_CONSTRUCTORS,
                                     'lagrangian', manifold)
    surfaces = [
        build_surface(parse_constructor(text, 'surface'), manifold, lagrangian)
        .with_resolution(cfg.resolution, cfg.quadrature_order)
        for text in cfg.surfaces
    ]
    return Scenario(cfg, manifold, lagrangian, surfaces)


# ----------------------------------------------------------------------
# Catálogos integrados
# ----------------------------------------------------------------------
def _scenario(name, manifold, lagrangian, surfaces, kind='identity') -> ScenarioConfig:
    return ScenarioConfig(
        name=name, manifold=manifold, lagrangian=lagrangian, surfaces=list(surfaces), kind=kind,
        resolution=Config.DEFAULT_RESOLUTION, quadrature_order=Config.DEFAULT_QUADRATURE_ORDER,
        seed=Config.RANDOM_SEED, tolerances=dict(Config.TOLERANCES),
    )


def _full_catalog() -> List[ScenarioConfig]:
    return [
        _scenario('flat-circle', 'Cn(n=1)', 'circle(1)', ['flat_disk(1)']),
        _scenario('fs-latitude', 'CPn(n=1)', 'latitude(0.5)', ['chart_disk(0.5)']),
        _scenario('fs-equator-monotone', 'CPn(n=1)', 'latitude(1)', ['chart_disk(1)', 'cap(1)'],
                  kind='monotonicity'),
        _scenario('clifford-cp2-monotone', 'CPn(n=2)', 'clifford(2)', ['torus_disk(1, 0)', 'torus_disk(0, 1)'],
                  kind='monotonicity'),
        _scenario('hyperbolic-circle', 'HyperbolicDisk(K=-1)', 'hyperbolic_circle(1)', ['cap()']),
        _scenario('product-torus', 'Cn(n=2)', 'product_torus(1, 2)',
                  ['torus_disk(1, 0)', 'torus_disk(0, 1)', 'torus_disk(1, 1)'], kind='delta'),
        _scenario('flat-torus-annulus', 'FlatTorus(lattice=square)', 'flat_torus_geodesic((1, 0))',
                  ['torus_annulus(1)']),
        _scenario('equator-boundary-dependence', 'CPn(n=1)', 'latitude(1)', ['chart_disk(1)', 'reversed(cap(1))'],
                  kind='boundary_dependence'),
    ]


def _minimal_catalog() -> List[ScenarioConfig]:
    return _full_catalog()[:2]


def _negative_catalog() -> List[ScenarioConfig]:
    return [_scenario('perturbed-torus', 'Cn(n=2)', 'perturbed_torus(0.1)', ['disk_filling(0, 1)'])]


CATALOGS: Dict[str, Callable[[], List[ScenarioConfig]]] = {
    'full': _full_catalog,
    'minimal': _minimal_catalog,
    'negative': _negative_catalog,
}


def catalog(name: str) -> List[ScenarioConfig]:
    factory = CATALOGS.get(name)
    if factory is None:
        raise ConfigError(f"Catálogo '{name}' desconocido. Válidos: {', '.join(sorted(CATALOGS))}",
                          field='catalog')
    return factory()


def with_resolution(configs: Sequence[ScenarioConfig], resolution: int) -> List[ScenarioConfig]:
    validate_resolution(resolution, max_resolution=MAX_RESOLUTION)
    return [replace(cfg, resolution=resolution) for cfg in configs]


# ----------------------------------------------------------------------
# Ejecución
# ----------------------------------------------------------------------
def _error_report(cfg: ScenarioConfig, exc: BaseException) -> VerificationReport:
    report = VerificationReport(
        scenario=cfg.name, kind=cfg.kind, manifold=cfg.manifold, lagrangian=cfg.lagrangian,
        surface=', '.join(cfg.surfaces), resolution=cfg.resolution, quadrature_order=cfg.quadrature_order,
        error=describe_error(exc, cfg.name),
    )
    return report.finalize()


def _dispatch(scenario: Scenario, sample_count: int) -> VerificationReport:
    cfg = scenario.config
    lag, surfaces = scenario.lagrangian, scenario.surfaces
    if cfg.kind == 'identity':
        return identity_residual(lag, surfaces[0], cfg.name, cfg.tolerances, sample_count, cfg.seed)
    if cfg.kind == 'monotonicity':
        return monotonicity_check(lag, surfaces, cfg.name, cfg.tolerances, sample_count, cfg.seed)
    if cfg.kind == 'boundary_dependence':
        return boundary_dependence_report(lag, surfaces[0], surfaces[1], cfg.name, cfg.tolerances,
                                          sample_count, cfg.seed)
    return delta_report(lag, surfaces, cfg.name, cfg.tolerances, sample_count, cfg.seed)


def run_scenario(cfg: ScenarioConfig, sample_count: int = None) -> VerificationReport:
    """Ejecuta un escenario; cualquier excepción queda como reporte ERROR"""
    sample_count = sample_count or Config.SAMPLE_COUNT
    started = time.perf_counter()
    try:
        report = _dispatch(build_scenario(cfg), sample_count)
    except Exception as e:
        report = _error_report(cfg, e)
    report.wall_time = time.perf_counter() - started
    log_scenario_result(cfg.name, report.status, report.residual, report.wall_time)
    return report


def run_suite(configs: Sequence[ScenarioConfig], threads: int = 1, sample_count: int = None,
              emit: Callable[[str], None] = None) -> Tuple[List[VerificationReport], int]:
    """Reportes en el orden de `configs` y código de salida (0 todo PASS, 1 algún FAIL/ERROR)"""
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError(f"threads debe ser un entero >= 1, recibido {threads!r}", field='threads')
    configs = list(configs)
    if not configs:
        logger.warning("No hay escenarios para ejecutar")
        if emit:
            emit("WARNING no hay escenarios para ejecutar")
        return [], 0

    logger.info(f"Ejecutando {len(configs)} escenario(s) con {threads} hilo(s)")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        reports = list(pool.map(lambda cfg: run_scenario(cfg, sample_count), configs))

    if emit:
        for report in reports:
            emit(status_line(report))
    code = exit_code_for(reports)
    failed = sum(1 for r in reports if r.status in (FAIL, ERROR))
    logger.info(f"Suite terminada: {len(reports) - failed} PASS, {failed} con fallos")
    return reports, code


# ----------------------------------------------------------------------
# Convergencia
# ----------------------------------------------------------------------
CONVERGENCE_BASE = 8
CONVERGENCE_ORDER = 2


def convergence_study(cfg: ScenarioConfig, levels: int, base_resolution: int = CONVERGENCE_BASE,
                      quadrature_order: int = CONVERGENCE_ORDER) -> ConvergenceTable:
    """Residuo de la identidad en resoluciones base·2^k, k < levels, con orden observado log₂

    La escalera usa su propio orden de cuadratura y su propia resolución base;
    los del escenario no se aplican salvo que se pasen aquí. Ambos salen en la cabecera.
    """
    if isinstance(levels, bool) or not isinstance(levels, int) or levels < 3:
        raise PreconditionError(f"El estudio de convergencia necesita levels >= 3, recibido {levels!r}",
                                field='levels')
    top = base_resolution * 2 ** (levels - 1)
    if top > MAX_RESOLUTION:
        raise ResourceError(f"{levels} niveles desde {base_resolution} llegan a {top} > {MAX_RESOLUTION}",
                            field='levels', details={'resolution': top})
    if cfg.quadrature_order != quadrature_order:
        logger.info(f"{cfg.name}: convergencia con orden {quadrature_order} "
                    f"en lugar del configurado {cfg.quadrature_order}")
    scenario = build_scenario(cfg)
    surface = scenario.surfaces[0].with_resolution(base_resolution, quadrature_order)
    table = ConvergenceTable(cfg.name, quadrature_order)
    for level in range(levels):
        if level:
            surface = surface.refine()
        terms = identity_terms(scenario.lagrangian, surface)
        table.rows.append(ConvergenceRow(surface.resolution, terms))
        logger.debug(f"{cfg.name}: N={surface.resolution} residuo={terms.residual:.3e}")
    table.orders = observed_orders([row.residual for row in table.rows])
    if table.saturated:
        logger.info(f"{cfg.name}: residuos en el piso de redondeo, orden no ajustable")
    return table


# ----------------------------------------------------------------------
# Escritura de reportes
# ----------------------------------------------------------------------
def _csv_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def summary_csv(reports: Sequence[VerificationReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(SUMMARY_COLUMNS)
    for report in reports:
        row = report.summary_row()
        writer.writerow([_csv_cell(row[column]) for column in SUMMARY_COLUMNS])
    return buffer.getvalue()


def convergence_csv(tables: Sequence[ConvergenceTable]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(('scenario', 'resolution', 'mu', 'omega_F', 'sigma_over_pi', 'residual', 'order'))
    for table in tables:
        orders = [None] + list(table.orders)
        for row, order in zip(table.rows, orders):
            t = row.terms
            writer.writerow([table.scenario, row.resolution, t.mu, _csv_cell(t.omega), _csv_cell(t.sigma_over_pi),
                             _csv_cell(t.residual), _csv_cell(order)])
    return buffer.getvalue()


def _write(path: Path, content: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding='utf-8')
    logger.info(f"Escrito {path}")
    return path


def write_reports(reports: Sequence[VerificationReport], out_dir, fmt: str = 'both',
                  include_timing: bool = False, configs: Sequence[ScenarioConfig] = ()) -> List[Path]:
    """report.json y/o summary.csv en out_dir, más las rutas [output] por escenario"""
    out_dir = Path(out_dir)
    written = []
    if fmt in ('json', 'both'):
        payload = {'reports': [r.to_dict(include_timing) for r in reports]}
        written.append(_write(out_dir / 'report.json', dumps(payload)))
    if fmt in ('csv', 'both'):
        written.append(_write(out_dir / 'summary.csv', summary_csv(reports)))
    for cfg, report in zip(configs, reports):
        if cfg.output.get('json'):
            written.append(_write(out_dir / cfg.output['json'], dumps(report.to_dict(include_timing))))
        if cfg.output.get('csv'):
            written.append(_write(out_dir / cfg.output['csv'], summary_csv([report])))
    return written


def write_convergence(tables: Sequence[ConvergenceTable], out_dir, fmt: str = 'both') -> List[Path]:
    out_dir = Path(out_dir)
    written = []
    if fmt in ('json', 'both'):
        written.append(_write(out_dir / 'convergence.json', dumps({'studies': [t.to_dict() for t in tables]})))
    if fmt in ('csv', 'both'):
        written.append(_write(out_dir / 'convergence.csv', convergence_csv(tables)))
    return written
