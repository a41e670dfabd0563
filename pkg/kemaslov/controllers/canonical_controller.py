"""
Secciones unitarias de K²(M): fases respecto de la sección de referencia
(dz¹∧…∧dzⁿ)⊗², formas de conexión ξ y números de vueltas.

Convenciones:
- fase de κ² para un marco A (columnas = componentes en la carta): e^{-2i·arg det A};
- forma de conexión en el gauge unitario: ξ(X) = i·dφ(X) - 2i·Im(∂ log det g(X)),
  siempre imaginaria pura;
- marco de F: Gram-Schmidt (en h) del marco coordenado de su carta, con fase 1
  en esa carta; en otra carta se corrige con el jacobiano de transición.
"""

import csv
import logging
import math
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from config import Config
from kemaslov.models.ambient import ChartPoint, TangentVector
from kemaslov.models.lagrangian import LagrangianImmersion
from kemaslov.models.report import ConnectionSample, PhaseTrace
from kemaslov.models.surface import BoundedSurface
from kemaslov.utils.quadrature import composite_rule, gauss_legendre, pairwise_sum
from kemaslov.utils.validators import (
    ContractViolation, ImmersionError, InconsistentTraceError, PreconditionError, ResolutionError,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
UNWRAP_MARGIN = Config.UNWRAP_MARGIN
MAX_REFINE_DEPTH = Config.MAX_REFINE_DEPTH
PHASE_SAMPLES = Config.PHASE_SAMPLES
WINDING_TOLERANCE = 1e-3


def _wrap(angle):
    return np.angle(np.exp(1j * angle))


# ----------------------------------------------------------------------
# Fases
# ----------------------------------------------------------------------
def frame_phase_angles(frames: np.ndarray) -> np.ndarray:
    """-2·arg det A por marco; frames con forma (N, n, n)"""
    det = np.linalg.det(frames)
    scale = np.prod(np.linalg.norm(frames, axis=-2), axis=-1)
    if np.any(np.abs(det) <= 1e-14 * np.maximum(scale, 1e-300)):
        raise ImmersionError("Marco degenerado: det A = 0")
    return -2.0 * np.angle(det)


def kappa_sq_phase(frame) -> complex:
    """Fase de κ² de un marco arbitrario respecto de (dz)⊗²"""
    angle = frame_phase_angles(np.asarray(frame, dtype=complex)[None])[0]
    return complex(np.exp(1j * angle))


def kappa_sq_phase_L(lagrangian: LagrangianImmersion, u) -> complex:
    _, d1, _ = lagrangian.map_jet(u)
    return complex(np.exp(1j * frame_phase_angles(d1)[0]))


def unitary_frames(surface: BoundedSurface, radial, angle, target_chart: int = None):
    """Marcos unitarios de F y el ángulo de fase de κ²_F en `target_chart`

    Devuelve (coords en la carta de F, U con forma (N, n, n), ángulo de fase).
    """
    manifold = surface.manifold
    coords, _, _ = surface.jet(radial, angle)
    g = manifold.metric(surface.chart_id, coords)
    # Gram-Schmidt en h: U = (L^H)^{-1} con g^T = L L^H
    lower = np.linalg.cholesky(np.swapaxes(g, -1, -2))
    frames = np.linalg.inv(np.conj(np.swapaxes(lower, -1, -2)))
    if target_chart is None or target_chart == surface.chart_id:
        return coords, frames, np.zeros(coords.shape[0])
    _, jac = manifold.transition(surface.chart_id, coords, target_chart)
    moved = np.einsum('nij,njk->nik', jac, frames)
    return coords, moved, frame_phase_angles(moved)


def unitary_frame_over_surface(surface: BoundedSurface, s, target_chart: int = None) -> Tuple[List[TangentVector], complex]:
    """Marco unitario en F(s), s = (r, θ), y la fase de κ²_F"""
    radial, angle = s
    coords, frames, phase = unitary_frames(surface, [radial], [angle], target_chart)
    chart = surface.chart_id if target_chart is None else target_chart
    if chart != surface.chart_id:
        coords, _ = surface.manifold.transition(surface.chart_id, coords, chart)
    base = ChartPoint(chart, coords[0])
    vectors = [TangentVector(base, frames[0][:, a]) for a in range(frames.shape[-1])]
    return vectors, complex(np.exp(1j * phase[0]))


def generator_loop_winding(n: int, axis: int, repeats: int = 1, samples: int = 64) -> int:
    """Vueltas de κ² sobre L_t = span{v₁, …, e^{iπt}v_axis, …, vₙ}, t ∈ [0, repeats]"""
    if not 1 <= axis <= n:
        raise PreconditionError(f"axis={axis} fuera de [1, {n}]", field='axis')
    t = np.linspace(0.0, float(repeats), samples * repeats + 1)
    frames = np.broadcast_to(np.eye(n, dtype=complex), (t.size, n, n)).copy()
    frames[:, axis - 1, axis - 1] = np.exp(1j * math.pi * t)
    trace = unwrap_samples(t / repeats, frame_phase_angles(frames), np.zeros(t.size, dtype=int))
    return winding_number(trace)


# ----------------------------------------------------------------------
# Trazas de fase relativa y número de vueltas
# ----------------------------------------------------------------------
def unwrap_samples(t, wrapped, chart_ids, component: int = 0) -> PhaseTrace:
    steps = _wrap(np.diff(wrapped))
    phi = np.concatenate([[wrapped[0]], wrapped[0] + np.cumsum(steps)])
    return PhaseTrace(np.asarray(t, dtype=float), phi, np.asarray(chart_ids, dtype=int), component)


def _relative_angles(lagrangian, surface, component, loop, tau):
    params = loop.point(tau)
    _, d1, _ = lagrangian.map_jet(params)
    phase_l = frame_phase_angles(d1)
    radial, angle = surface.boundary_parameters(component, tau)
    _, _, phase_f = unitary_frames(surface, radial, angle, lagrangian.chart_id)
    return _wrap(phase_l - phase_f)


def frame_phase_rate(lagrangian: LagrangianImmersion, u, velocity) -> np.ndarray:
    """dφ(v) = -2 Im tr(A⁻¹ ∂_v A) con φ = -2·arg det A, a partir del 2-jet exacto"""
    _, d1, d2 = lagrangian.map_jet(u)
    velocity = np.atleast_2d(np.asarray(velocity, dtype=float))
    d_frame = np.einsum('nkab,nb->nka', d2, velocity)
    return -2.0 * np.einsum('nak,nka->n', np.linalg.inv(d1), d_frame).imag


def _transition_phase_rate(surface, component, tau, target_chart, step: float = 1e-7):
    """d/dτ de -2·arg det(∂w/∂z) sobre el borde de F; nula si F ya está en la carta de L"""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if target_chart == surface.chart_id:
        return np.zeros(tau.size)
    coords, velocity = surface.boundary_velocity(component, tau)
    manifold = surface.manifold
    _, jac_plus = manifold.transition(surface.chart_id, coords + step * velocity, target_chart)
    _, jac_minus = manifold.transition(surface.chart_id, coords - step * velocity, target_chart)
    ratio = np.linalg.det(jac_plus) / np.linalg.det(jac_minus)
    return -2.0 * np.angle(ratio) / (2.0 * step)


def _relative_rates(lagrangian, surface, component, loop, tau):
    """dθ/dτ exacta en L y por diferencia holomorfa estrecha en la transición de F"""
    rate_l = frame_phase_rate(lagrangian, loop.point(tau), loop.velocity(tau))
    return rate_l - _transition_phase_rate(surface, component, tau, lagrangian.chart_id)


def relative_phase_trace(lagrangian: LagrangianImmersion, surface: BoundedSurface, component: int = 0,
                         samples: int = PHASE_SAMPLES, max_depth: int = MAX_REFINE_DEPTH,
                         margin: float = UNWRAP_MARGIN) -> PhaseTrace:
    """θ = fase(κ²_L) - fase(κ²_F) a lo largo de la componente de borde, desenrollada

    Se biseca todo intervalo donde el salto envuelto, la derivada exacta dθ/dτ·Δτ en
    cualquiera de sus extremos, o el desacuerdo entre ambos, alcance `margin`.
    """
    surface.boundary_trace(samples)
    loop = surface.link_for(component).loop
    tau = np.arange(samples + 1) / samples
    wrapped = _relative_angles(lagrangian, surface, component, loop, tau)
    rates = _relative_rates(lagrangian, surface, component, loop, tau)
    # margen estricto aun con empates de redondeo en el límite
    limit = margin * (1.0 - 1e-6)

    for depth in range(max_depth + 1):
        width = np.diff(tau)
        jumps = _wrap(np.diff(wrapped))
        predicted = 0.5 * (rates[:-1] + rates[1:]) * width
        steep = np.maximum(np.abs(rates[:-1]), np.abs(rates[1:])) * width
        bad = np.nonzero((np.abs(jumps) >= limit) | (steep >= limit)
                         | (np.abs(jumps - predicted) >= limit))[0]
        if bad.size == 0:
            break
        if depth == max_depth:
            where = [float(tau[bad[0]]), float(tau[bad[0] + 1])]
            raise ResolutionError(
                f"Salto de fase no resuelto tras {max_depth} refinamientos en τ ∈ {where}",
                field='surface', details={'component': component, 'interval': where},
            )
        mids = 0.5 * (tau[bad] + tau[bad + 1])
        mid_values = _relative_angles(lagrangian, surface, component, loop, mids)
        mid_rates = _relative_rates(lagrangian, surface, component, loop, mids)
        tau = np.insert(tau, bad + 1, mids)
        wrapped = np.insert(wrapped, bad + 1, mid_values)
        rates = np.insert(rates, bad + 1, mid_rates)
        logger.debug(f"Refinamiento {depth + 1}: {bad.size} intervalos bisecados en la componente {component}")

    # las fases se miden respecto de (dz)⊗² en la carta de L
    charts = np.full(tau.size, lagrangian.chart_id, dtype=int)
    return unwrap_samples(tau, wrapped, charts, component)


def boundary_phase_traces(lagrangian: LagrangianImmersion, surface: BoundedSurface,
                          samples: int = PHASE_SAMPLES) -> List[PhaseTrace]:
    return [relative_phase_trace(lagrangian, surface, c, samples)
            for c in range(len(surface.boundary_components))]


def winding_number(trace: PhaseTrace) -> int:
    turns = trace.net_change / TWO_PI
    nearest = round(turns)
    if abs(turns - nearest) >= WINDING_TOLERANCE:
        raise InconsistentTraceError(
            f"La traza no cierra: {turns:.6f} vueltas",
            details={'component': trace.component, 'turns': turns},
        )
    return int(nearest)


def export_trace_csv(trace: PhaseTrace, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh)
        writer.writerow(['t', 'phi', 'chart_id'])
        for t, phi, chart in trace.rows():
            writer.writerow([repr(t), repr(phi), chart])
    return path


# ----------------------------------------------------------------------
# Formas de conexión
# ----------------------------------------------------------------------
def chart_connection_term(manifold, chart_id: int, coords, vectors) -> np.ndarray:
    """2·Im(∂ log det g(X)) por punto; vectors con forma (N, n)"""
    c = manifold.log_det_gradient(chart_id, coords)
    return 2.0 * np.einsum('nk,nk->n', c, vectors).imag


def xi_L(lagrangian: LagrangianImmersion, u, velocity) -> np.ndarray:
    """ξ_L sobre la velocidad v (coordenadas del dominio), imaginaria pura, forma (N,)"""
    f, d1, _ = lagrangian.map_jet(u)
    velocity = np.atleast_2d(np.asarray(velocity, dtype=float))
    d_phase = frame_phase_rate(lagrangian, u, velocity)
    ambient = np.einsum('nka,na->nk', d1, velocity)
    chart = chart_connection_term(lagrangian.manifold, lagrangian.chart_id, f, ambient)
    return 1j * (d_phase - chart)


def xi_F(surface: BoundedSurface, radial, angle, velocity) -> np.ndarray:
    """ξ_F sobre la velocidad (dr, dθ) en la carta de F (fase del marco ≡ 1)"""
    coords, f_r, f_t = surface.jet(radial, angle)
    velocity = np.atleast_2d(np.asarray(velocity, dtype=float))
    ambient = f_r * velocity[:, :1] + f_t * velocity[:, 1:2]
    return -1j * chart_connection_term(surface.manifold, surface.chart_id, coords, ambient)


def connection_form_xi(subject, section: str, params, velocities) -> List[ConnectionSample]:
    """ξ de la sección 'L' (subject = inmersión) o 'F' (subject = superficie) sobre una curva muestreada"""
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if section == 'L':
        values = xi_L(subject, params, velocities)
        coords, _, _ = subject.map_jet(params)
        chart = subject.chart_id
    elif section == 'F':
        values = xi_F(subject, params[:, 0], params[:, 1], velocities)
        coords, _, _ = subject.jet(params[:, 0], params[:, 1])
        chart = subject.chart_id
    else:
        raise ContractViolation(f"Sección '{section}' desconocida; use 'L' o 'F'", field='section')
    return [ConnectionSample(ChartPoint(chart, z), complex(v)) for z, v in zip(coords, values)]


def oh_identity_residuals(lagrangian: LagrangianImmersion, u, velocity) -> np.ndarray:
    """|σ_L(w) - iξ_L(w)/2| por punto"""
    velocity = np.atleast_2d(np.asarray(velocity, dtype=float))
    sigma = np.einsum('na,na->n', lagrangian.sigma_form(u), velocity)
    half = (1j * xi_L(lagrangian, u, velocity)).real / 2.0
    return np.abs(sigma - half)


def oh_identity_residual(lagrangian: LagrangianImmersion, u, w) -> float:
    return float(oh_identity_residuals(lagrangian, u, w)[0])


# ----------------------------------------------------------------------
# Condición de Einstein sobre F
# ----------------------------------------------------------------------
def _edge_integral(surface, radial, angle, direction, weights):
    vel = np.zeros((radial.size, 2))
    vel[:, direction] = 1.0
    return pairwise_sum((1j * xi_F(surface, radial, angle, vel)).real * weights)


def einstein_cell_residuals(surface: BoundedSurface, cells: Sequence[Tuple[int, int]],
                            resolution: int = None, order: int = None) -> np.ndarray:
    """Residuo relativo de ∮_celda iξ_F = -4πλ ∫_celda F*ω para cada celda (i, j) de la rejilla"""
    resolution = resolution or surface.resolution
    order = order or surface.quadrature_order
    lam = surface.manifold.einstein_constant()
    nodes, weights = gauss_legendre(order)
    dr, dt = 1.0 / resolution, TWO_PI / resolution
    out = np.empty(len(cells))
    for idx, (i, j) in enumerate(cells):
        r0, t0 = i * dr, j * dt
        r_nodes, r_w = r0 + dr * nodes, dr * weights
        t_nodes, t_w = t0 + dt * nodes, dt * weights
        ones = np.ones_like(nodes)
        circulation = (_edge_integral(surface, r_nodes, t0 * ones, 0, r_w)
                       + _edge_integral(surface, (r0 + dr) * ones, t_nodes, 1, t_w)
                       - _edge_integral(surface, r_nodes, (t0 + dt) * ones, 0, r_w)
                       - _edge_integral(surface, r0 * ones, t_nodes, 1, t_w))
        rr, tt = np.meshgrid(r_nodes, t_nodes, indexing='ij')
        area = pairwise_sum(surface.area_density(rr.ravel(), tt.ravel()) * np.outer(r_w, t_w).ravel())
        target = -4.0 * math.pi * lam * area
        gap = abs(circulation - target)
        out[idx] = gap / abs(target) if abs(target) > 1e-12 else gap
    return out


def einstein_cell_residual(surface: BoundedSurface, sample_count: int = 100, seed: int = 0) -> float:
    """Máximo del residuo por celda sobre celdas interiores elegidas al azar (reproducible)"""
    resolution = surface.resolution
    rng = np.random.default_rng(seed)
    count = min(sample_count, resolution * resolution)
    flat = rng.choice(resolution * resolution, size=count, replace=False)
    cells = [(int(k // resolution), int(k % resolution)) for k in np.sort(flat)]
    return float(np.max(einstein_cell_residuals(surface, cells)))


def boundary_circulation_F(surface: BoundedSurface, panels: int = None, order: int = None) -> float:
    """∮_{∂F} iξ_F con la orientación inducida, sumado sobre las componentes de borde"""
    panels = panels or surface.resolution
    order = order or surface.quadrature_order
    tau, weights = composite_rule(0.0, 1.0, panels, order)
    total = 0.0
    for component in range(len(surface.boundary_components)):
        coords, velocity = surface.boundary_velocity(component, tau)
        density = chart_connection_term(surface.manifold, surface.chart_id, coords, velocity)
        # iξ_F(X) = 2·Im(∂ log det g(X)) en la carta de F
        total += pairwise_sum(density * weights)
    return total
