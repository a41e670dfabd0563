"""
Ensamblaje de la identidad μ(F) - 2λω(F) = σ_L(∂F)/π y de los chequeos que
la acompañan (monotonía, dependencia solo del borde, clase δ_L, Einstein).

Los tres términos se calculan por caminos independientes: μ por número de
vueltas, ω(F) por cuadratura de área y σ_L(∂F) por la traza de curvatura.
Ningún término se despeja de la identidad.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import Config
from kemaslov.controllers.canonical_controller import (
    boundary_circulation_F, boundary_phase_traces, einstein_cell_residual, oh_identity_residuals,
    winding_number,
)
from kemaslov.models.lagrangian import LagrangianImmersion, LoopInL
from kemaslov.models.report import (
    NOT_APPLICABLE, CheckResult, IdentityTerms, VerificationReport,
)
from kemaslov.models.surface import BoundedSurface
from kemaslov.utils.validators import LinkageError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES = Config.TOLERANCES


def _tolerances(overrides: Optional[Dict[str, float]]) -> Dict[str, float]:
    merged = dict(DEFAULT_TOLERANCES)
    merged.update(overrides or {})
    return merged


def _check_linked(lagrangian: LagrangianImmersion, surface: BoundedSurface):
    if surface.lagrangian is not lagrangian:
        raise LinkageError(f"{surface.label} no está enlazada con {lagrangian.label}", field='surface')


# ----------------------------------------------------------------------
# Términos de la identidad
# ----------------------------------------------------------------------
def maslov_index(lagrangian: LagrangianImmersion, surface: BoundedSurface,
                 samples: int = Config.PHASE_SAMPLES) -> int:
    """μ(F) = -Σ vueltas de θ sobre las componentes de borde con su orientación inducida"""
    _check_linked(lagrangian, surface)
    return -sum(winding_number(trace) for trace in boundary_phase_traces(lagrangian, surface, samples))


def sigma_boundary_integral(lagrangian: LagrangianImmersion, surface: BoundedSurface) -> float:
    """σ_L(∂F): suma de ∫σ_L sobre los lazos enlazados"""
    total = 0.0
    for component in range(len(surface.boundary_components)):
        loop = surface.link_for(component).loop
        total += lagrangian.integrate_sigma(loop, surface.quadrature_order, surface.resolution)
    return total


def identity_terms(lagrangian: LagrangianImmersion, surface: BoundedSurface) -> IdentityTerms:
    _check_linked(lagrangian, surface)
    lam = lagrangian.manifold.einstein_constant()
    mu = maslov_index(lagrangian, surface)
    omega = surface.symplectic_area()
    sigma = sigma_boundary_integral(lagrangian, surface)
    return IdentityTerms(surface.label, lam, mu, omega, sigma / math.pi)


# ----------------------------------------------------------------------
# Residuos auxiliares
# ----------------------------------------------------------------------
def auxiliary_residuals(lagrangian: LagrangianImmersion, surface: BoundedSurface,
                        sample_count: int = 100, seed: int = 0, fd_step: float = Config.FD_STEP) -> Dict[str, float]:
    """Residuos de las identidades usadas en la demostración, sobre muestras reproducibles"""
    rng = np.random.default_rng(seed)
    u = lagrangian.random_parameters(rng, sample_count)
    w = rng.normal(size=u.shape)
    residuals = {
        'lagrangian_residual': lagrangian.lagrangian_residual(sample_count, seed),
        'oh_identity': float(np.max(oh_identity_residuals(lagrangian, u, w))),
        'sigma_closedness': max(lagrangian.sigma_closedness_residual(p, fd_step) for p in u),
    }
    residuals.update(einstein_surface_check(surface, sample_count, seed))
    return residuals


def einstein_surface_check(surface: BoundedSurface, sample_count: int = 100, seed: int = 0) -> Dict[str, float]:
    """(a) residuo por celda de d(iξ_F) = -4πλF*ω; (b) |∮(-iξ_F)/2π - 2λω(F)|"""
    lam = surface.manifold.einstein_constant()
    cells = einstein_cell_residual(surface, sample_count, seed)
    stokes = abs(-boundary_circulation_F(surface) / (2.0 * math.pi) - 2.0 * lam * surface.symplectic_area())
    return {'einstein_cells': cells, 'einstein_stokes': stokes}


def _auxiliary_checks(aux: Dict[str, float], tol: Dict[str, float]) -> List[CheckResult]:
    return [
        CheckResult.bounded('lagrangian_residual', aux['lagrangian_residual'], tol['lagrangian']),
        CheckResult.bounded('oh_identity', aux['oh_identity'], tol['oh_identity']),
        CheckResult.bounded('sigma_closedness', aux['sigma_closedness'], tol['closedness']),
        CheckResult.bounded('einstein_cells', aux['einstein_cells'], tol['einstein_cells']),
        CheckResult.bounded('einstein_stokes', aux['einstein_stokes'], tol['einstein_stokes']),
    ]


def surfaces_auxiliary(lagrangian: LagrangianImmersion, surfaces: Sequence[BoundedSurface],
                       sample_count: int = 100, seed: int = 0) -> Dict[str, float]:
    """Peor residuo auxiliar sobre varias superficies con borde en la misma L"""
    merged: Dict[str, float] = {}
    for surface in surfaces:
        for key, value in auxiliary_residuals(lagrangian, surface, sample_count, seed).items():
            merged[key] = max(merged.get(key, 0.0), value)
    return merged


def _base_report(name: str, kind: str, lagrangian: LagrangianImmersion, surface: BoundedSurface) -> VerificationReport:
    return VerificationReport(
        scenario=name,
        kind=kind,
        manifold=lagrangian.manifold.describe(),
        lagrangian=lagrangian.describe(),
        surface=surface.describe(),
        einstein_constant=lagrangian.manifold.einstein_constant(),
        resolution=surface.resolution,
        quadrature_order=surface.quadrature_order,
    )


# ----------------------------------------------------------------------
# Operaciones de verificación
# ----------------------------------------------------------------------
def identity_residual(lagrangian: LagrangianImmersion, surface: BoundedSurface, name: str = None,
                      tolerances: Dict[str, float] = None, sample_count: int = 100,
                      seed: int = 0) -> VerificationReport:
    tol = _tolerances(tolerances)
    report = _base_report(name or surface.label, 'identity', lagrangian, surface)
    terms = identity_terms(lagrangian, surface)
    report.mu, report.omega_F, report.sigma_over_pi = terms.mu, terms.omega, terms.sigma_over_pi
    report.auxiliary = auxiliary_residuals(lagrangian, surface, sample_count, seed)
    report.checks = [CheckResult.bounded('identity', abs(report.residual), tol['identity'])]
    report.checks += _auxiliary_checks(report.auxiliary, tol)
    logger.debug(f"{report.scenario}: μ={terms.mu} ω={terms.omega:.12g} σ/π={terms.sigma_over_pi:.12g}")
    return report.finalize()


def delta_class(lagrangian: LagrangianImmersion, loops: Sequence[LoopInL],
                surfaces: Sequence[BoundedSurface]) -> List[float]:
    """δ_L(γ) = μ(F) - 2λω(F) para cada lazo con su superficie de relleno"""
    if len(loops) != len(surfaces):
        raise PreconditionError("Se necesita una superficie por lazo", field='surfaces')
    values = []
    for loop, surface in zip(loops, surfaces):
        linked = surface.link_for(0).loop
        if len(surface.boundary_components) != 1 or not _same_loop(linked, loop):
            raise LinkageError(f"El borde de {surface.label} no es el lazo dado", field='surfaces')
        _check_linked(lagrangian, surface)
        lam = lagrangian.manifold.einstein_constant()
        values.append(maslov_index(lagrangian, surface) - 2.0 * lam * surface.symplectic_area())
    return values


def _same_loop(a: LoopInL, b: LoopInL) -> bool:
    return (a.orientation == b.orientation and np.allclose(a.base, b.base, atol=1e-12)
            and np.allclose(a.step, b.step, atol=1e-12))


def max_mean_curvature(lagrangian: LagrangianImmersion, sample_count: int = 100, seed: int = 0) -> float:
    """max |H| en la métrica ambiente sobre una muestra reproducible"""
    rng = np.random.default_rng(seed)
    geo = lagrangian.geometry(lagrangian.random_parameters(rng, sample_count))
    norms = np.einsum('ni,nij,nj->n', geo.mean_curvature, geo.metric, np.conj(geo.mean_curvature)).real
    return float(np.sqrt(np.max(np.abs(norms))))


def monotonicity_check(lagrangian: LagrangianImmersion, surfaces: Sequence[BoundedSurface], name: str = None,
                       tolerances: Dict[str, float] = None, sample_count: int = 100,
                       seed: int = 0) -> VerificationReport:
    """Si L es mínima (λ > 0), μ(F) = 2λω(F) para cada superficie dada"""
    tol = _tolerances(tolerances)
    lam = lagrangian.manifold.einstein_constant()
    if lam <= 0:
        raise PreconditionError(f"La monotonía requiere λ > 0, recibido λ={lam:.6g}", field='manifold')
    first = surfaces[0]
    report = _base_report(name or lagrangian.label, 'monotonicity', lagrangian, first)
    report.surface = ', '.join(s.describe() for s in surfaces)
    h_max = max_mean_curvature(lagrangian, sample_count, seed)
    report.auxiliary = {'max_mean_curvature': h_max}
    report.auxiliary.update(surfaces_auxiliary(lagrangian, surfaces, sample_count, seed))
    if h_max > tol['minimality']:
        report.checks = [CheckResult('minimality', h_max, tol['minimality'], NOT_APPLICABLE,
                                     'L no es mínima; la monotonía no aplica')]
        report.checks += _auxiliary_checks(report.auxiliary, tol)
        logger.info(f"{report.scenario}: max|H|={h_max:.3e} > {tol['minimality']:.1e}, monotonía no aplica")
        return report.finalize()

    report.checks = [CheckResult.bounded('minimality', h_max, tol['minimality'])]
    rows = []
    for surface in surfaces:
        terms = identity_terms(lagrangian, surface)
        rows.append(terms)
        report.checks.append(CheckResult.bounded(f"monotone[{surface.describe()}]", abs(terms.delta),
                                                 tol['monotonicity']))
    report.checks += _auxiliary_checks(report.auxiliary, tol)
    report.mu, report.omega_F, report.sigma_over_pi = rows[0].mu, rows[0].omega, rows[0].sigma_over_pi
    report.details = {'surfaces': [t.to_dict() for t in rows]}
    return report.finalize()


def _check_shared_boundary(first: BoundedSurface, second: BoundedSurface):
    if len(first.boundary_components) != len(second.boundary_components):
        raise LinkageError("Las superficies tienen distinto número de componentes de borde", field='surfaces')
    for component in range(len(first.boundary_components)):
        if not _same_loop(first.link_for(component).loop, second.link_for(component).loop):
            raise LinkageError(f"{first.label} y {second.label} no comparten el lazo de borde", field='surfaces')


def boundary_dependence_check(lagrangian: LagrangianImmersion, first: BoundedSurface,
                              second: BoundedSurface) -> float:
    """|δ(F₁) - δ(F₂)| para dos superficies con el mismo lazo de borde"""
    _check_shared_boundary(first, second)
    if first is second:
        return 0.0
    a = identity_terms(lagrangian, first)
    b = identity_terms(lagrangian, second)
    return abs(a.delta - b.delta)


def boundary_dependence_report(lagrangian: LagrangianImmersion, first: BoundedSurface, second: BoundedSurface,
                               name: str = None, tolerances: Dict[str, float] = None, sample_count: int = 100,
                               seed: int = 0) -> VerificationReport:
    tol = _tolerances(tolerances)
    report = _base_report(name or lagrangian.label, 'boundary_dependence', lagrangian, first)
    report.surface = f"{first.describe()}, {second.describe()}"
    a = identity_terms(lagrangian, first)
    b = identity_terms(lagrangian, second)
    _check_shared_boundary(first, second)
    gap = abs(a.delta - b.delta)
    report.mu, report.omega_F, report.sigma_over_pi = a.mu, a.omega, a.sigma_over_pi
    report.auxiliary = {'boundary_dependence': gap}
    report.auxiliary.update(surfaces_auxiliary(lagrangian, [first, second], sample_count, seed))
    report.details = {'surfaces': [a.to_dict(), b.to_dict()]}
    report.checks = [
        CheckResult.bounded('boundary_dependence', gap, tol['boundary_dependence']),
        CheckResult.bounded(f"identity[{first.describe()}]", abs(a.residual), tol['identity']),
        CheckResult.bounded(f"identity[{second.describe()}]", abs(b.residual), tol['identity']),
    ]
    report.checks += _auxiliary_checks(report.auxiliary, tol)
    return report.finalize()


def delta_report(lagrangian: LagrangianImmersion, surfaces: Sequence[BoundedSurface], name: str = None,
                 tolerances: Dict[str, float] = None, sample_count: int = 100, seed: int = 0) -> VerificationReport:
    """δ_L por lazo; cada valor debe coincidir con σ_L(γ)/π"""
    tol = _tolerances(tolerances)
    report = _base_report(name or lagrangian.label, 'delta', lagrangian, surfaces[0])
    report.surface = ', '.join(s.describe() for s in surfaces)
    rows = [identity_terms(lagrangian, s) for s in surfaces]
    report.mu, report.omega_F, report.sigma_over_pi = rows[0].mu, rows[0].omega, rows[0].sigma_over_pi
    report.details = {'delta': [t.delta for t in rows], 'surfaces': [t.to_dict() for t in rows]}
    report.checks = [CheckResult.bounded(f"identity[{t.surface}]", abs(t.residual), tol['identity']) for t in rows]
    report.auxiliary = surfaces_auxiliary(lagrangian, surfaces, sample_count, seed)
    report.checks += _auxiliary_checks(report.auxiliary, tol)
    return report.finalize()
