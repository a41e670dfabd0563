"""
Contenedores de resultados: trazas de fase, muestras de conexión, chequeos,
reportes de verificación y tablas de convergencia.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from kemaslov.models.ambient import ChartPoint

logger = logging.getLogger(__name__)

PASS = 'PASS'
FAIL = 'FAIL'
ERROR = 'ERROR'
NOT_APPLICABLE = 'N/A'


@dataclass(frozen=True, eq=False)
class PhaseTrace:
    """Ángulo desenrollado φ(t_k) de una sección unitaria de K² a lo largo de una curva cerrada"""
    t: np.ndarray
    phi: np.ndarray
    chart_ids: np.ndarray
    component: int = 0

    @property
    def net_change(self) -> float:
        return float(self.phi[-1] - self.phi[0])

    @property
    def max_step(self) -> float:
        if self.phi.size < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.phi))))

    def rows(self):
        for t, phi, chart in zip(self.t, self.phi, self.chart_ids):
            yield float(t), float(phi), int(chart)

    def to_dict(self):
        return {'component': self.component, 'samples': int(self.t.size), 'net_change': self.net_change}


@dataclass(frozen=True)
class ConnectionSample:
    """Valor de ξ sobre la velocidad de la curva (imaginario puro, por unidad de parámetro)"""
    base: ChartPoint
    value: complex

    def to_dict(self):
        return {'base': self.base, 'value': self.value}


@dataclass
class CheckResult:
    name: str
    value: Optional[float]
    tolerance: Optional[float]
    status: str = PASS
    note: str = ''

    @classmethod
    def bounded(cls, name: str, value: float, tolerance: float, note: str = '') -> 'CheckResult':
        ok = value is not None and math.isfinite(value) and value <= tolerance
        return cls(name, value, tolerance, PASS if ok else FAIL, note)

    @property
    def passed(self) -> bool:
        return self.status in (PASS, NOT_APPLICABLE)

    def to_dict(self):
        data = {'name': self.name, 'value': self.value, 'tolerance': self.tolerance, 'status': self.status}
        if self.note:
            data['note'] = self.note
        return data


@dataclass
class IdentityTerms:
    """Los tres términos de μ(F) - 2λω(F) = σ_L(∂F)/π calculados por caminos independientes"""
    surface: str
    einstein_constant: float
    mu: int
    omega: float
    sigma_over_pi: float

    @property
    def delta(self) -> float:
        return self.mu - 2.0 * self.einstein_constant * self.omega

    @property
    def residual(self) -> float:
        return self.mu - 2.0 * self.einstein_constant * self.omega - self.sigma_over_pi

    def to_dict(self):
        return {
            'surface': self.surface,
            'mu': self.mu,
            'omega_F': self.omega,
            'two_lambda_omega': 2.0 * self.einstein_constant * self.omega,
            'sigma_over_pi': self.sigma_over_pi,
            'delta': self.delta,
            'residual': self.residual,
        }


@dataclass
class VerificationReport:
    scenario: str
    kind: str
    manifold: str
    lagrangian: str
    surface: str
    einstein_constant: Optional[float] = None
    mu: Optional[int] = None
    omega_F: Optional[float] = None
    sigma_over_pi: Optional[float] = None
    auxiliary: Dict[str, float] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    resolution: int = 0
    quadrature_order: int = 0
    status: str = PASS
    details: Dict[str, Any] = field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None
    wall_time: Optional[float] = None

    @property
    def residual(self) -> Optional[float]:
        if None in (self.mu, self.omega_F, self.sigma_over_pi, self.einstein_constant):
            return None
        return self.mu - 2.0 * self.einstein_constant * self.omega_F - self.sigma_over_pi

    @property
    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def finalize(self) -> 'VerificationReport':
        if self.error is not None:
            self.status = ERROR
        elif self.failed_checks:
            self.status = FAIL
        else:
            self.status = PASS
        return self

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data = {
            'scenario': self.scenario,
            'kind': self.kind,
            'manifold': self.manifold,
            'lagrangian': self.lagrangian,
            'surface': self.surface,
            'lambda': self.einstein_constant,
            'mu': self.mu,
            'omega_F': self.omega_F,
            'sigma_over_pi': self.sigma_over_pi,
            'residual': self.residual,
            'auxiliary': dict(self.auxiliary),
            'checks': [c.to_dict() for c in self.checks],
            'resolution': self.resolution,
            'quadrature_order': self.quadrature_order,
            'status': self.status,
        }
        if self.details:
            data['details'] = self.details
        if self.error is not None:
            data['error'] = self.error
        if include_timing and self.wall_time is not None:
            data['wall_time'] = self.wall_time
        return data

    def summary_row(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario,
            'status': self.status,
            'lambda': self.einstein_constant,
            'mu': self.mu,
            'omega_F': self.omega_F,
            'sigma_over_pi': self.sigma_over_pi,
            'residual': self.residual,
        }


@dataclass
class ScenarioConfig:
    name: str
    manifold: str
    lagrangian: str
    surfaces: List[str]
    kind: str = 'identity'
    resolution: int = 64
    quadrature_order: int = 8
    seed: int = 0
    tolerances: Dict[str, float] = field(default_factory=dict)
    output: Dict[str, str] = field(default_factory=dict)
    line: Optional[int] = None

    @property
    def surface(self) -> str:
        return self.surfaces[0] if self.surfaces else ''

    def to_dict(self):
        return {
            'name': self.name,
            'kind': self.kind,
            'manifold': self.manifold,
            'lagrangian': self.lagrangian,
            'surfaces': list(self.surfaces),
            'resolution': self.resolution,
            'quadrature_order': self.quadrature_order,
            'seed': self.seed,
            'tolerances': dict(self.tolerances),
        }


@dataclass
class ConvergenceRow:
    resolution: int
    terms: IdentityTerms

    @property
    def residual(self) -> float:
        return self.terms.residual

    def to_dict(self):
        data = {'resolution': self.resolution}
        data.update(self.terms.to_dict())
        return data


@dataclass
class ConvergenceTable:
    scenario: str
    quadrature_order: int
    rows: List[ConvergenceRow] = field(default_factory=list)
    orders: List[Optional[float]] = field(default_factory=list)

    @property
    def base_resolution(self) -> Optional[int]:
        return self.rows[0].resolution if self.rows else None

    @property
    def saturated(self) -> bool:
        """Todos los residuos en el piso de redondeo: no hay orden que ajustar"""
        return bool(self.orders) and all(o is None for o in self.orders)

    @property
    def observed_order(self) -> Optional[float]:
        fitted = [o for o in self.orders if o is not None]
        return fitted[-1] if fitted else None

    @property
    def mu_stable(self) -> bool:
        return len({row.terms.mu for row in self.rows}) <= 1

    def to_dict(self):
        return {
            'scenario': self.scenario,
            'quadrature_order': self.quadrature_order,
            'rows': [row.to_dict() for row in self.rows],
            'orders': list(self.orders),
            'observed_order': self.observed_order,
            'saturated': self.saturated,
            'mu_stable': self.mu_stable,
        }
