# Exponer los modelos geométricos y contenedores de reporte principales
from .base_model import BaseModel
from .ambient import (
    AmbientManifold, ChartPoint, FlatSpace, FlatTorus, HyperbolicBall, MetricJet, ProjectiveSpace, TangentVector,
)
from .lagrangian import LagrangianImmersion, LoopInL
from .surface import BoundedSurface
from .report import (
    CheckResult, ConvergenceTable, IdentityTerms, PhaseTrace, ScenarioConfig, VerificationReport,
)

__all__ = [
    'BaseModel',
    'AmbientManifold',
    'ChartPoint',
    'TangentVector',
    'MetricJet',
    'FlatSpace',
    'FlatTorus',
    'ProjectiveSpace',
    'HyperbolicBall',
    'LagrangianImmersion',
    'LoopInL',
    'BoundedSurface',
    'PhaseTrace',
    'CheckResult',
    'IdentityTerms',
    'VerificationReport',
    'ScenarioConfig',
    'ConvergenceTable',
]
