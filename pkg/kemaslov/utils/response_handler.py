"""
Formato estandarizado de las líneas de estado que el runner escribe en stdout.

Una línea por escenario:
    PASS flat-circle residual=3.109e-15
    FAIL perturbed-torus lagrangian_residual=9.990e-02 > 1.0e-10
    ERROR fs-latitude LINKAGE_ERROR: ...
"""

import logging
from typing import Optional

from kemaslov.models.report import ERROR, FAIL, NOT_APPLICABLE, ConvergenceTable, VerificationReport

logger = logging.getLogger(__name__)


def _number(value: Optional[float], spec: str = '.3e') -> str:
    return 'n/a' if value is None else format(value, spec)


def status_line(report: VerificationReport) -> str:
    if report.status == ERROR:
        error = report.error or {}
        return f"ERROR {report.scenario} {error.get('code', 'INTERNAL_ERROR')}: {error.get('message', '')}"

    if report.status == FAIL:
        failures = '; '.join(
            f"{check.name}={_number(check.value)} > {_number(check.tolerance, '.1e')}"
            for check in report.failed_checks
        )
        return f"FAIL {report.scenario} {failures}"

    line = f"{report.status} {report.scenario} residual={_number(report.residual)}"
    skipped = [c.name for c in report.checks if c.status == NOT_APPLICABLE]
    if skipped:
        line += f" [N/A: {', '.join(skipped)}]"
    return line


def convergence_lines(table: ConvergenceTable):
    yield f"CONVERGENCE {table.scenario} base={table.base_resolution} order={table.quadrature_order}"
    orders = [None] + list(table.orders)
    for row, order in zip(table.rows, orders):
        yield f"  N={row.resolution:<6d} mu={row.terms.mu:+d} residual={row.residual:.3e} p={_number(order, '.2f')}"
    if table.saturated:
        yield f"  {table.scenario}: saturated (residuos en el piso de redondeo)"
    else:
        yield f"  {table.scenario}: observed_order={_number(table.observed_order, '.2f')}"
