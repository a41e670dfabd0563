"""
Superficies con borde F: Σ → M (discos y anillos) parametrizadas en
coordenadas polares (r, θ) ∈ [0, 1] × [0, 2π).

- Disco: el borde es r = 1, recorrido con θ creciente.
- Anillo: componente 0 en s = 1 (θ creciente) y componente 1 en s = 0 (θ decreciente).

Cada superficie vive en una sola carta (`chart_id`); ninguna celda cruza
una transición. Los bordes se enlazan con lazos en el dominio de L.
"""

import copy
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from kemaslov.models.ambient import AmbientManifold, FlatSpace, FlatTorus, HyperbolicBall, ProjectiveSpace
from kemaslov.models.base_model import BaseModel
from kemaslov.models.lagrangian import (
    FlatGeodesic, LagrangianImmersion, LoopInL, PerturbedTorus, StarCurve, TorusOrbit,
)
from kemaslov.utils.quadrature import composite_rule, pairwise_sum
from kemaslov.utils.spec_parser import ConstructorCall, build_from_registry
from kemaslov.utils.validators import (
    ConfigError, CoverageError, LinkageError, ResourceError, validate_order, validate_resolution,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_RESOLUTION = Config.DEFAULT_RESOLUTION
DEFAULT_ORDER = Config.DEFAULT_QUADRATURE_ORDER
MAX_RESOLUTION = Config.MAX_RESOLUTION
LINK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class BoundaryLink:
    """Identificación de la componente de borde `component` con un lazo en L"""
    component: int
    loop: LoopInL

    def to_dict(self):
        return {'component': self.component, 'loop': self.loop}


@dataclass
class BoundaryMatch:
    """Muestras emparejadas de una componente de borde: F(borde(τ)) frente a f(lazo(τ))"""
    component: int
    tau: np.ndarray
    radial: np.ndarray
    angle: np.ndarray
    surface_chart: int
    surface_coords: np.ndarray
    loop_params: np.ndarray
    lagrangian_coords: np.ndarray
    max_distance: float


class BoundedSurface(BaseModel):
    """Superficie parametrizada con 1-jet exacto y borde enlazado a L."""

    kind = 'surface'
    domain = 'disk'
    _descriptor_fields = ('domain', 'chart_id', 'resolution', 'quadrature_order', 'orientation')

    def __init__(self, manifold: AmbientManifold, lagrangian: Optional[LagrangianImmersion], label: str,
                 links: Sequence[BoundaryLink] = (), chart_id: int = 0):
        self.manifold = manifold
        self.lagrangian = lagrangian
        self.label = label
        self.links = tuple(links)
        self.chart_id = chart_id
        self.resolution = DEFAULT_RESOLUTION
        self.quadrature_order = DEFAULT_ORDER
        self.orientation = 1

    def _jet(self, radial: np.ndarray, angle: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """F, ∂F/∂r, ∂F/∂θ con forma (N, n) en la carta `chart_id`"""
        raise NotImplementedError

    @property
    def boundary_components(self) -> List[Tuple[float, int]]:
        """(valor radial, sentido de θ) de cada componente de borde"""
        if self.domain == 'annulus':
            return [(1.0, 1), (0.0, -1)]
        return [(1.0, 1)]

    # ------------------------------------------------------------------
    # Copias con parámetros cambiados (las instancias no se mutan)
    # ------------------------------------------------------------------
    def _clone(self, **changes) -> 'BoundedSurface':
        other = copy.copy(self)
        other.__dict__.update(changes)
        return other

    def with_resolution(self, resolution: int = None, quadrature_order: int = None) -> 'BoundedSurface':
        resolution = self.resolution if resolution is None else resolution
        order = self.quadrature_order if quadrature_order is None else quadrature_order
        validate_resolution(resolution, max_resolution=MAX_RESOLUTION)
        validate_order(order)
        return self._clone(resolution=resolution, quadrature_order=order)

    def refine(self) -> 'BoundedSurface':
        doubled = self.resolution * 2
        if doubled > MAX_RESOLUTION:
            raise ResourceError(f"Resolución {doubled} por eje supera el máximo {MAX_RESOLUTION}",
                                field='resolution', details={'resolution': doubled})
        return self._clone(resolution=doubled)

    def reversed(self) -> 'BoundedSurface':
        links = tuple(BoundaryLink(link.component, link.loop.reversed()) for link in self.links)
        label = self.label[len('reversed('):-1] if self.orientation < 0 else f"reversed({self.label})"
        return self._clone(orientation=-self.orientation, links=links, label=label)

    # ------------------------------------------------------------------
    # Evaluación
    # ------------------------------------------------------------------
    def jet(self, radial, angle) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """1-jet con la orientación aplicada: la orientación -1 es θ ↦ -θ"""
        radial = np.atleast_1d(np.asarray(radial, dtype=float))
        angle = np.atleast_1d(np.asarray(angle, dtype=float))
        f, f_r, f_t = self._jet(radial, self.orientation * angle)
        self._check_cover(f, radial, angle)
        return f, f_r, self.orientation * f_t

    def _check_cover(self, coords, radial, angle):
        inside = self.manifold.in_domain(self.chart_id, coords)
        if np.all(inside):
            return
        bad_r, bad_t = radial[~inside], angle[~inside]
        region = {'radial': [float(bad_r.min()), float(bad_r.max())],
                  'angle': [float(bad_t.min()), float(bad_t.max())]}
        raise CoverageError(
            f"{self.label} sale de la carta {self.chart_id} en la región {region}",
            field='surface', details={'chart_id': self.chart_id, 'uncovered': region},
        )

    def grid(self, resolution: int = None, order: int = None):
        """Nodos (r, θ) y pesos del producto tensorial de Gauss-Legendre compuesta"""
        resolution = resolution or self.resolution
        order = order or self.quadrature_order
        r, wr = composite_rule(0.0, 1.0, resolution, order)
        t, wt = composite_rule(0.0, TWO_PI, resolution, order)
        radial, angle = np.meshgrid(r, t, indexing='ij')
        weights = wr[:, None] * wt[None, :]
        return radial.ravel(), angle.ravel(), weights.ravel()

    def area_density(self, radial, angle) -> np.ndarray:
        """F*ω(∂_r, ∂_θ) = -Im h(F_r, F_θ)"""
        f, f_r, f_t = self.jet(radial, angle)
        return -self.manifold.hermitian(self.chart_id, f, f_r, f_t).imag

    def symplectic_area(self, resolution: int = None, order: int = None) -> float:
        radial, angle, weights = self.grid(resolution, order)
        return pairwise_sum(self.area_density(radial, angle) * weights)

    def boundary_parameters(self, component: int, tau) -> Tuple[np.ndarray, np.ndarray]:
        """Parámetros (r, θ) del borde con la orientación inducida, τ ∈ [0, 1]"""
        radial_value, direction = self.boundary_components[component]
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        angle = TWO_PI * tau if direction > 0 else TWO_PI * (1.0 - tau)
        return np.full_like(tau, radial_value), angle

    def boundary_velocity(self, component: int, tau) -> Tuple[np.ndarray, np.ndarray]:
        """F(borde(τ)) y dF/dτ"""
        radial, angle = self.boundary_parameters(component, tau)
        _, direction = self.boundary_components[component]
        f, _, f_t = self.jet(radial, angle)
        return f, direction * TWO_PI * f_t

    def link_for(self, component: int) -> BoundaryLink:
        for link in self.links:
            if link.component == component:
                return link
        raise LinkageError(f"{self.label}: la componente de borde {component} no está enlazada",
                           field='surface')

    def boundary_trace(self, samples_per_component: int = 256) -> List[BoundaryMatch]:
        if self.lagrangian is None or not self.links:
            raise LinkageError(f"{self.label} no declara enlaces de borde con L", field='surface')
        tau = np.arange(samples_per_component + 1) / samples_per_component
        lag = self.lagrangian
        matches = []
        for component in range(len(self.boundary_components)):
            loop = self.link_for(component).loop
            defect = loop.closure_defect(lag.periods)
            if defect > 1e-12:
                raise LinkageError(f"El lazo de la componente {component} no es cerrado (defecto {defect:.3e})",
                                   field='surface')
            radial, angle = self.boundary_parameters(component, tau)
            surface_coords, _, _ = self.jet(radial, angle)
            params = loop.point(tau)
            lag_coords, _, _ = lag.map_jet(params)
            in_lag_chart = surface_coords
            if self.chart_id != lag.chart_id:
                in_lag_chart, _ = self.manifold.transition(self.chart_id, surface_coords, lag.chart_id)
            distance = float(np.max(self.manifold.distance(lag.chart_id, in_lag_chart, lag_coords)))
            if distance > LINK_TOLERANCE:
                raise LinkageError(
                    f"{self.label}: el borde {component} se separa de L en {distance:.3e}",
                    field='surface', details={'component': component, 'distance': distance},
                )
            matches.append(BoundaryMatch(component, tau, radial, angle, self.chart_id, surface_coords,
                                         params, lag_coords, distance))
        return matches

    def to_dict(self):
        data = super().to_dict()
        data['links'] = list(self.links)
        return data


class PolarDisk(BoundedSurface):
    """F_k(r, θ) = c_k + a_k r^{|m_k|} e^{i m_k θ}: discos planos, de carta, de órbitas tóricas."""

    kind = 'polar_disk'

    def __init__(self, manifold, lagrangian, label, centers, radii, windings,
                 loop_step=None, chart_id: int = 0):
        n = manifold.dim
        self.centers = np.asarray(centers, dtype=complex).reshape(n)
        self.radii = np.asarray(radii, dtype=float).reshape(n)
        self.windings = np.asarray(windings, dtype=int).reshape(n)
        links = ()
        if lagrangian is not None:
            step = TWO_PI * self.windings if loop_step is None else np.asarray(loop_step, dtype=float)
            links = (BoundaryLink(0, LoopInL(np.zeros(n), step)),)
        super().__init__(manifold, lagrangian, label, links, chart_id)

    def _jet(self, radial, angle):
        m = self.windings[None, :]
        power = np.abs(m)
        rho = radial[:, None]
        phase = np.exp(1j * m * angle[:, None])
        rho_m = rho ** power
        # d/dr de ρ^|m|, con 0·ρ^{-1} = 0 cuando m = 0
        d_rho_m = np.where(power > 0, power * rho ** np.maximum(power - 1, 0), 0.0)
        f = self.centers[None, :] + self.radii[None, :] * rho_m * phase
        f_r = self.radii[None, :] * d_rho_m * phase
        f_t = 1j * m * self.radii[None, :] * rho_m * phase
        return f, f_r, f_t


class FarCap(PolarDisk):
    """Casquete |z| ≥ rho de ℂP¹ en la carta 1: w = (r/rho)e^{iθ}; su borde recorre la latitud en sentido horario."""

    kind = 'far_cap'

    def __init__(self, manifold, lagrangian, rho: float, label: str):
        super().__init__(manifold, lagrangian, label, centers=[0.0], radii=[1.0 / rho], windings=[1],
                         chart_id=1)
        self.links = (BoundaryLink(0, LoopInL(np.zeros(1), [TWO_PI], orientation=-1)),)


class WavyDisk(BoundedSurface):
    """F(r, θ) = a·r·e^{iθ} + amp·r²(1 - r²)e^{2iθ}: mismo borde que el disco plano de radio a."""

    kind = 'wavy_disk'

    def __init__(self, manifold, lagrangian, radius: float, amp: float, label: str):
        super().__init__(manifold, lagrangian, label, (BoundaryLink(0, LoopInL([0.0], [TWO_PI])),))
        self.radius, self.amp = float(radius), float(amp)

    def _jet(self, radial, angle):
        r = radial[:, None]
        e1, e2 = np.exp(1j * angle)[:, None], np.exp(2j * angle)[:, None]
        bump = self.amp * r ** 2 * (1 - r ** 2)
        f = self.radius * r * e1 + bump * e2
        f_r = self.radius * e1 + self.amp * (2 * r - 4 * r ** 3) * e2
        f_t = 1j * self.radius * r * e1 + 2j * bump * e2
        return f, f_r, f_t


class StarDisk(BoundedSurface):
    """Disco estrellado F(r, θ) = r·R(θ)e^{iθ} con R(θ) = a(1 + eps·cos kθ)."""

    kind = 'star_disk'

    def __init__(self, manifold, lagrangian, radius: float, eps: float, k: int, label: str):
        super().__init__(manifold, lagrangian, label, (BoundaryLink(0, LoopInL([0.0], [TWO_PI])),))
        self.radius, self.eps, self.k = float(radius), float(eps), int(k)

    def _jet(self, radial, angle):
        r = radial[:, None]
        t = angle[:, None]
        big_r = self.radius * (1 + self.eps * np.cos(self.k * t))
        d_big_r = -self.radius * self.eps * self.k * np.sin(self.k * t)
        e = np.exp(1j * t)
        f = r * big_r * e
        f_r = big_r * e
        f_t = r * (d_big_r + 1j * big_r) * e
        return f, f_r, f_t


class TorusAnnulus(BoundedSurface):
    """Anillo F(s, θ) = (θ/2π)·v + (1 - s)·k·p₂ en el toro plano, con v la dirección de la geodésica."""

    kind = 'torus_annulus'
    domain = 'annulus'

    def __init__(self, manifold: FlatTorus, lagrangian: FlatGeodesic, k: int, label: str):
        outer = LoopInL([0.0], [1.0])
        inner = LoopInL([0.0], [1.0], orientation=-1)
        super().__init__(manifold, lagrangian, label, (BoundaryLink(0, outer), BoundaryLink(1, inner)))
        self.k = int(k)
        self.vector = lagrangian.vector
        self.shift = self.k * manifold.periods[1]

    def _jet(self, radial, angle):
        s = radial[:, None]
        t = angle[:, None]
        f = (t / TWO_PI) * self.vector + (1 - s) * self.shift
        f_r = np.broadcast_to(-self.shift, f.shape).astype(complex)
        f_t = np.broadcast_to(self.vector / TWO_PI, f.shape).astype(complex)
        return f, f_r, f_t


class ChartAnnulus(BoundedSurface):
    """Anillo rho_in ≤ |z| ≤ rho_out en la carta 0 de una variedad de dimensión 1 (sin enlaces)."""

    kind = 'chart_annulus'
    domain = 'annulus'

    def __init__(self, manifold, rho_in: float, rho_out: float, label: str):
        super().__init__(manifold, None, label)
        self.rho_in, self.rho_out = float(rho_in), float(rho_out)

    def _jet(self, radial, angle):
        width = self.rho_out - self.rho_in
        rad = (self.rho_in + radial * width)[:, None]
        e = np.exp(1j * angle)[:, None]
        return rad * e, width * e, 1j * rad * e


class ConstantDisk(BoundedSurface):
    """Disco constante en f(0); se enlaza con el lazo constante."""

    kind = 'constant_disk'

    def __init__(self, manifold, lagrangian, label: str):
        n = manifold.dim
        super().__init__(manifold, lagrangian, label, (BoundaryLink(0, LoopInL(np.zeros(n), np.zeros(n))),),
                         chart_id=lagrangian.chart_id)
        self.point, _, _ = lagrangian.map_jet(np.zeros((1, n)))

    def _jet(self, radial, angle):
        f = np.repeat(self.point, radial.size, axis=0)
        zeros = np.zeros_like(f)
        return f, zeros, zeros.copy()


# ----------------------------------------------------------------------
# Constructores nombrados: factory(manifold, lagrangian, *args)
# ----------------------------------------------------------------------
def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message, code='INCOMPATIBLE_SURFACE', field='surface')


def _positive(value, name):
    if value is None or float(value) <= 0:
        raise ConfigError(f"{name} debe ser positivo, recibido {value!r}", field='surface')
    return float(value)


def flat_disk(manifold, lagrangian, r: float = 1.0):
    _require(type(manifold) is FlatSpace and manifold.dim == 1, "flat_disk requiere Cn(n=1)")
    r = _positive(r, 'r')
    return PolarDisk(manifold, lagrangian, f"flat_disk({r:g})", [0.0], [r], [1])


def chart_disk(manifold, lagrangian, rho: float = 1.0):
    _require(manifold.dim == 1, "chart_disk requiere dimensión compleja 1")
    rho = _positive(rho, 'rho')
    return PolarDisk(manifold, lagrangian, f"chart_disk({rho:g})", [0.0], [rho], [1])


def chart_annulus(manifold, lagrangian, rho_in: float, rho_out: float):
    _require(manifold.dim == 1, "chart_annulus requiere dimensión compleja 1")
    _require(0 <= rho_in < rho_out, "chart_annulus requiere 0 ≤ rho_in < rho_out")
    return ChartAnnulus(manifold, rho_in, rho_out, f"chart_annulus({rho_in:g}, {rho_out:g})")


def hyperbolic_disk_cap(manifold, lagrangian, s: float = None):
    _require(isinstance(manifold, HyperbolicBall) and manifold.dim == 1, "hyperbolic_disk_cap requiere HyperbolicDisk(n=1)")
    if s is None:
        _require(isinstance(lagrangian, TorusOrbit), "hyperbolic_disk_cap sin s requiere un hyperbolic_circle")
        radius = float(lagrangian.radii[0])
        label = "hyperbolic_disk_cap"
    else:
        radius = manifold.euclidean_radius(_positive(s, 's'))
        label = f"hyperbolic_disk_cap({s:g})"
    return PolarDisk(manifold, lagrangian, label, [0.0], [radius], [1])


def cap(manifold, lagrangian, rho: float = None):
    """Casquete: en ℂP¹ el disco lejano por la carta 1; en el disco hiperbólico, el disco geodésico"""
    if isinstance(manifold, HyperbolicBall):
        return hyperbolic_disk_cap(manifold, lagrangian)
    _require(isinstance(manifold, ProjectiveSpace) and manifold.dim == 1, "cap requiere CPn(n=1) o HyperbolicDisk")
    if rho is None:
        _require(isinstance(lagrangian, TorusOrbit), "cap sin rho requiere una latitud")
        rho = float(lagrangian.radii[0])
    rho = _positive(rho, 'rho')
    return FarCap(manifold, lagrangian, rho, f"cap({rho:g})")


def torus_disk(manifold, lagrangian, *windings: int):
    _require(isinstance(lagrangian, TorusOrbit), "torus_disk requiere una órbita tórica")
    n = manifold.dim
    if not windings:
        windings = (1,) + (0,) * (n - 1)
    _require(len(windings) == n, f"torus_disk requiere {n} enrollamientos")
    _require(any(windings), "torus_disk requiere algún enrollamiento no nulo")
    label = f"torus_disk({', '.join(str(int(w)) for w in windings)})"
    return PolarDisk(manifold, lagrangian, label, np.zeros(n), lagrangian.radii, windings)


def disk_filling(manifold, lagrangian, *windings: int):
    """Discos que rellenan los ciclos básicos del toro perturbado"""
    _require(isinstance(lagrangian, PerturbedTorus), "disk_filling requiere perturbed_torus")
    eps = lagrangian.eps
    windings = tuple(int(w) for w in windings) or (0, 1)
    if windings == (0, 1):
        return PolarDisk(manifold, lagrangian, "disk_filling(0, 1)", [0.0, eps], [1.0, 1.0], [0, 1],
                         loop_step=[0.0, TWO_PI])
    if windings == (1, 0):
        return PolarDisk(manifold, lagrangian, "disk_filling(1, 0)", [0.0, 1.0], [1.0, eps], [1, 1],
                         loop_step=[TWO_PI, 0.0])
    raise ConfigError(f"disk_filling solo admite (0, 1) y (1, 0), recibido {windings}", field='surface')


def wavy_disk(manifold, lagrangian, r: float = 1.0, amp: float = 0.1):
    _require(type(manifold) is FlatSpace and manifold.dim == 1, "wavy_disk requiere Cn(n=1)")
    return WavyDisk(manifold, lagrangian, _positive(r, 'r'), amp, f"wavy_disk({r:g}, {amp:g})")


def star_disk(manifold, lagrangian, r: float = None, eps: float = None, k: int = None):
    if isinstance(lagrangian, StarCurve):
        r = lagrangian.radius if r is None else r
        eps = lagrangian.eps if eps is None else eps
        k = lagrangian.k if k is None else k
    _require(None not in (r, eps, k), "star_disk requiere r, eps y k")
    return StarDisk(manifold, lagrangian, _positive(r, 'r'), eps, k, f"star_disk({r:g}, {eps:g}, {k})")


def torus_annulus(manifold, lagrangian, k: int = 1):
    _require(isinstance(manifold, FlatTorus) and manifold.dim == 1, "torus_annulus requiere FlatTorus(n=1)")
    _require(isinstance(lagrangian, FlatGeodesic), "torus_annulus requiere flat_torus_geodesic")
    return TorusAnnulus(manifold, lagrangian, k, f"torus_annulus({int(k)})")


def constant_disk(manifold, lagrangian):
    return ConstantDisk(manifold, lagrangian, "constant_disk")


def reversed_surface(manifold, lagrangian, inner):
    if not isinstance(inner, ConstructorCall):
        raise ConfigError("reversed(...) espera un constructor de superficie", field='surface')
    return build_surface(inner, manifold, lagrangian).reversed()


SURFACE_CONSTRUCTORS = {
    'flat_disk': flat_disk,
    'chart_disk': chart_disk,
    'chart_annulus': chart_annulus,
    'cap': cap,
    'hyperbolic_disk_cap': hyperbolic_disk_cap,
    'torus_disk': torus_disk,
    'disk_filling': disk_filling,
    'wavy_disk': wavy_disk,
    'star_disk': star_disk,
    'torus_annulus': torus_annulus,
    'constant_disk': constant_disk,
    'reversed': reversed_surface,
}


def build_surface(call: ConstructorCall, manifold, lagrangian) -> BoundedSurface:
    return build_from_registry(call, SURFACE_CONSTRUCTORS, 'surface', manifold, lagrangian)
