"""
Inmersiones lagrangianas parametrizadas con 2-jet exacto.

Cada inmersión vive en una sola carta del ambiente y expone, en forma
vectorizada sobre parámetros u con forma (N, n):
    f(u)        (N, n)        coordenadas en la carta
    ∂f/∂uᵃ      (N, n, n)     [N, componente, parámetro]
    ∂²f/∂uᵃ∂uᵇ  (N, n, n, n)  [N, componente, parámetro, parámetro]

La forma de curvatura media es σ_L(w) = g(H, Jw), con H la traza (sin
promediar) de la segunda forma fundamental respecto de la métrica inducida.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from kemaslov.models.ambient import (
    AmbientManifold, ChartPoint, FlatSpace, FlatTorus, HyperbolicBall, ProjectiveSpace, TangentVector,
)
from kemaslov.models.base_model import BaseModel
from kemaslov.utils.quadrature import composite_rule, observed_orders, pairwise_sum
from kemaslov.utils.validators import ConfigError, ContractViolation, DomainError, ImmersionError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class LoopInL:
    """Lazo cerrado en el dominio de L: u(τ) = base + orientation·s(τ)·step, τ ∈ [0, 1].

    `step` es combinación entera de los períodos del dominio; `warp` deforma la
    parametrización (s(τ) = τ + warp·sin(2πτ)/2π) sin cambiar la curva.
    """
    base: np.ndarray
    step: np.ndarray
    orientation: int = 1
    warp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'base', np.asarray(self.base, dtype=float).reshape(-1))
        object.__setattr__(self, 'step', np.asarray(self.step, dtype=float).reshape(-1))
        if self.base.shape != self.step.shape:
            raise ContractViolation("base y step del lazo con dimensiones distintas", field='loop')
        if self.orientation not in (1, -1):
            raise ContractViolation(f"Orientación inválida: {self.orientation}", field='orientation')
        if not abs(self.warp) < 1.0:
            raise ContractViolation(f"warp={self.warp} produce un lazo no regular", field='warp')

    def _s(self, tau):
        return tau + self.warp * np.sin(TWO_PI * tau) / TWO_PI

    def _ds(self, tau):
        return 1.0 + self.warp * np.cos(TWO_PI * tau)

    def point(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self.base[None, :] + self.orientation * self._s(tau)[:, None] * self.step[None, :]

    def velocity(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self.orientation * self._ds(tau)[:, None] * self.step[None, :]

    @property
    def is_constant(self) -> bool:
        return not np.any(self.step)

    def reversed(self) -> 'LoopInL':
        return LoopInL(self.base, self.step, -self.orientation, self.warp)

    def repeated(self, times: int) -> 'LoopInL':
        return LoopInL(self.base, times * self.step, self.orientation, self.warp)

    def reparametrized(self, warp: float) -> 'LoopInL':
        return LoopInL(self.base, self.step, self.orientation, warp)

    def closure_defect(self, periods: Sequence[Optional[float]]) -> float:
        """Distancia entre extremos módulo los períodos declarados"""
        gap = self.point(1.0)[0] - self.point(0.0)[0]
        worst = 0.0
        for delta, period in zip(gap, periods):
            if period:
                delta = delta - period * round(delta / period)
            worst = max(worst, abs(delta))
        return worst

    def to_dict(self):
        return {'base': self.base, 'step': self.step, 'orientation': self.orientation, 'warp': self.warp}


@dataclass
class ImmersionGeometry:
    """Datos de curvatura evaluados en un lote de parámetros"""
    coords: np.ndarray
    frame: np.ndarray
    metric: np.ndarray
    induced: np.ndarray
    second_form: np.ndarray
    mean_curvature: np.ndarray
    sigma: np.ndarray = field(default=None)


class LagrangianImmersion(BaseModel):
    """Inmersión f: L → M en la carta `chart_id` con dominio producto de círculos/intervalos."""

    kind = 'lagrangian'
    _descriptor_fields = ('dim', 'periods')

    def __init__(self, manifold: AmbientManifold, label: str,
                 periods: Sequence[Optional[float]], chart_id: int = 0):
        self.manifold = manifold
        self.label = label
        self.periods = tuple(periods)
        self.chart_id = chart_id
        self.dim = manifold.dim
        if len(self.periods) != self.dim:
            raise ConfigError(f"{label}: {len(self.periods)} períodos para dimensión {self.dim}",
                              field='lagrangian')

    def _jet(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    # ------------------------------------------------------------------
    # Evaluación vectorizada
    # ------------------------------------------------------------------
    def check_parameters(self, u) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if u.shape[-1] != self.dim:
            raise ContractViolation(f"Parámetros de dimensión {u.shape[-1]} para {self.label}", field='u')
        if not np.all(np.isfinite(u)):
            raise DomainError(f"Parámetro no finito para {self.label}", field='u')
        return u

    def map_jet(self, u) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        u = self.check_parameters(u)
        f, d1, d2 = self._jet(u)
        self.manifold.check_coords(self.chart_id, f)
        return f, d1, d2

    def random_parameters(self, rng: np.random.Generator, count: int) -> np.ndarray:
        cols = []
        for period in self.periods:
            if period:
                cols.append(rng.uniform(0.0, period, size=count))
            else:
                cols.append(rng.normal(size=count))
        return np.stack(cols, axis=-1)

    def induced_metrics(self, u) -> np.ndarray:
        f, d1, _ = self.map_jet(u)
        g = self.manifold.metric(self.chart_id, f)
        return np.einsum('nia,nij,njb->nab', d1, g, np.conj(d1)).real

    def omega_defects(self, u) -> np.ndarray:
        """ω(e_a, e_b) por punto, matriz antisimétrica (N, n, n)"""
        f, d1, _ = self.map_jet(u)
        g = self.manifold.metric(self.chart_id, f)
        return -np.einsum('nia,nij,njb->nab', d1, g, np.conj(d1)).imag

    def geometry(self, u) -> ImmersionGeometry:
        f, d1, d2 = self.map_jet(u)
        manifold = self.manifold
        g = manifold.metric(self.chart_id, f)
        gamma = manifold.christoffel(self.chart_id, f)
        induced = np.einsum('nia,nij,njb->nab', d1, g, np.conj(d1)).real
        eig = np.linalg.eigvalsh(induced)
        if np.any(eig[:, 0] <= 1e-14 * np.maximum(eig[:, -1], 1e-300)):
            raise ImmersionError(f"Métrica inducida singular en {self.label}", field='u')
        induced_inv = np.linalg.inv(induced)

        # aceleración covariante y su proyección tangencial en la métrica g
        accel = d2 + np.einsum('nkij,nia,njb->nkab', gamma, d1, d1)
        along = np.einsum('niab,nij,njc->nabc', accel, g, np.conj(d1)).real
        coeff = np.einsum('ncd,nabd->nabc', induced_inv, along)
        second = accel - np.einsum('nkc,nabc->nkab', d1, coeff)
        mean = np.einsum('nab,nkab->nk', induced_inv, second)
        # σ_a = g(H, J e_a) = Im h(H, e_a)
        sigma = np.einsum('ni,nij,nja->na', mean, g, np.conj(d1)).imag
        return ImmersionGeometry(f, d1, g, induced, second, mean, sigma)

    def sigma_form(self, u) -> np.ndarray:
        """Coeficientes σ_L(∂/∂uᵃ) con forma (N, n)"""
        return self.geometry(u).sigma

    # ------------------------------------------------------------------
    # Operaciones puntuales
    # ------------------------------------------------------------------
    def point_at(self, u) -> ChartPoint:
        f, _, _ = self.map_jet(u)
        return ChartPoint(self.chart_id, f[0])

    def tangent_frame(self, u) -> List[TangentVector]:
        f, d1, _ = self.map_jet(u)
        real_frame = np.concatenate([d1[0].real, d1[0].imag], axis=0)
        if np.linalg.matrix_rank(real_frame, tol=1e-12) < self.dim:
            raise ImmersionError(f"Marco tangente de rango deficiente en {self.label}", field='u',
                                 details={'u': np.atleast_1d(u)})
        base = ChartPoint(self.chart_id, f[0])
        return [TangentVector(base, d1[0][:, a]) for a in range(self.dim)]

    def induced_metric(self, u) -> np.ndarray:
        return self.induced_metrics(u)[0]

    def lagrangian_residual(self, sample_count: int = 100, seed: int = 0) -> float:
        """max |ω(e_a, e_b)| sobre una muestra reproducible del dominio"""
        if self.dim == 1:
            return 0.0
        rng = np.random.default_rng(seed)
        defects = self.omega_defects(self.random_parameters(rng, sample_count))
        return float(np.max(np.abs(defects)))

    def second_fundamental_form(self, u) -> np.ndarray:
        """II[k, a, b]: componentes (normales) de II(∂_a, ∂_b)"""
        return self.geometry(u).second_form[0]

    def mean_curvature_vector(self, u) -> TangentVector:
        geo = self.geometry(u)
        return TangentVector(ChartPoint(self.chart_id, geo.coords[0]), geo.mean_curvature[0])

    def sigma_at(self, u, w: TangentVector) -> float:
        geo = self.geometry(u)
        coords, frame = geo.coords[0], geo.frame[0]
        if w.base.chart_id != self.chart_id or np.max(np.abs(w.base.coords - coords)) > 1e-12:
            raise ContractViolation("El vector no está basado en f(u)", field='w')
        g = geo.metric[0]
        # componentes tangentes de w en el marco coordenado
        rhs = np.einsum('i,ij,ja->a', w.components, g, np.conj(frame)).real
        coeff = np.linalg.solve(geo.induced[0], rhs)
        normal = w.components - frame @ coeff
        scale = max(1.0, float(np.linalg.norm(w.components)))
        if np.linalg.norm(normal) > 1e-8 * scale:
            raise ContractViolation("El vector no es tangente a L", field='w')
        return float(np.einsum('i,ij,j->', geo.mean_curvature[0], g, np.conj(w.components)).imag)

    def integrate_sigma(self, loop: LoopInL, quadrature_order: int = 8, panels: int = 64) -> float:
        """∫ σ_L a lo largo del lazo con Gauss-Legendre compuesta en τ"""
        if loop.base.size != self.dim:
            raise ContractViolation(f"Lazo de dimensión {loop.base.size} en {self.label}", field='loop')
        if loop.is_constant:
            return 0.0
        tau, weights = composite_rule(0.0, 1.0, panels, quadrature_order)
        sigma = self.sigma_form(loop.point(tau))
        integrand = np.einsum('na,na->n', sigma, loop.velocity(tau))
        return pairwise_sum(integrand * weights)

    def sigma_closedness_residual(self, u, h: float = 1e-4) -> float:
        """max_{a<b} |∂_a σ_b - ∂_b σ_a| por diferencias centradas con paso h"""
        if self.dim == 1:
            return 0.0
        u = self.check_parameters(u)[0]
        eye = np.eye(self.dim)
        shifted = np.concatenate([u + h * eye, u - h * eye], axis=0)
        sigma = self.sigma_form(shifted)
        plus, minus = sigma[:self.dim], sigma[self.dim:]
        # deriv[a, b] = ∂_a σ_b
        deriv = (plus - minus) / (2.0 * h)
        return float(np.max(np.abs(deriv - deriv.T)))

    def closedness_order(self, u, h: float = 1e-2) -> list:
        """Órdenes observados de la escalera h, h/2, h/4 (None en el piso de redondeo)"""
        residuals = [self.sigma_closedness_residual(u, h / 2 ** k) for k in range(3)]
        return observed_orders(residuals)


class TorusOrbit(LagrangianImmersion):
    """Órbita toral f_k(u) = r_k e^{i u_k}: círculos, toros producto, latitudes, Clifford."""

    kind = 'torus_orbit'
    _descriptor_fields = ('dim', 'radii')

    def __init__(self, manifold: AmbientManifold, radii: Sequence[float], label: str):
        radii = tuple(float(r) for r in radii)
        if any(r <= 0 for r in radii):
            raise ConfigError(f"{label}: radios deben ser positivos", field='lagrangian')
        super().__init__(manifold, label, (TWO_PI,) * len(radii))
        self.radii = radii
        self._r = np.array(radii)

    def _jet(self, u):
        e = self._r[None, :] * np.exp(1j * u)
        n = self.dim
        d1 = np.zeros((u.shape[0], n, n), dtype=complex)
        d2 = np.zeros((u.shape[0], n, n, n), dtype=complex)
        idx = np.arange(n)
        d1[:, idx, idx] = 1j * e
        d2[:, idx, idx, idx] = -e
        return e, d1, d2

    def factor_loop(self, axis: int, orientation: int = 1) -> LoopInL:
        step = np.zeros(self.dim)
        step[axis] = TWO_PI
        return LoopInL(np.zeros(self.dim), step, orientation)


class FlatGeodesic(LagrangianImmersion):
    """f_k(u) = v·u_k: ℝⁿ ⊂ ℂⁿ (v = 1) o geodésica cerrada del toro plano (v vector de red)."""

    kind = 'flat_geodesic'
    _descriptor_fields = ('dim', 'direction')

    def __init__(self, manifold: AmbientManifold, direction, label: str):
        if isinstance(manifold, FlatTorus):
            p, q = direction
            if int(p) != p or int(q) != q or (p, q) == (0, 0):
                raise ConfigError(f"{label}: la dirección debe ser un vector entero no nulo de la red",
                                  field='lagrangian')
            p1, p2 = manifold.periods
            vector = int(p) * p1 + int(q) * p2
            periods = (1.0,) * manifold.dim
            direction = (int(p), int(q))
        else:
            vector = complex(direction)
            if vector == 0:
                raise ConfigError(f"{label}: dirección nula", field='lagrangian')
            periods = (None,) * manifold.dim
        super().__init__(manifold, label, periods)
        self.direction = direction
        self.vector = vector

    def _jet(self, u):
        n = self.dim
        f = self.vector * u.astype(complex)
        d1 = np.broadcast_to(self.vector * np.eye(n, dtype=complex), (u.shape[0], n, n)).copy()
        d2 = np.zeros((u.shape[0], n, n, n), dtype=complex)
        return f, d1, d2


class StarCurve(LagrangianImmersion):
    """Curva estrellada r(1 + eps·cos kt)e^{it} en ℂ; encierra área πr²(1 + eps²/2)."""

    kind = 'star_curve'
    _descriptor_fields = ('radius', 'eps', 'k')

    def __init__(self, manifold, r: float, eps: float, k: int, label: str):
        if r <= 0 or not abs(eps) < 1.0 or int(k) < 1:
            raise ConfigError(f"{label}: parámetros fuera del rango regular", field='lagrangian')
        super().__init__(manifold, label, (TWO_PI,))
        self.radius, self.eps, self.k = float(r), float(eps), int(k)

    def enclosed_area(self) -> float:
        return math.pi * self.radius ** 2 * (1.0 + self.eps ** 2 / 2.0)

    def _jet(self, u):
        t = u[:, 0]
        r, eps, k = self.radius, self.eps, self.k
        rho = r * (1 + eps * np.cos(k * t))
        drho = -r * eps * k * np.sin(k * t)
        ddrho = -r * eps * k * k * np.cos(k * t)
        e = np.exp(1j * t)
        f = (rho * e)[:, None]
        d1 = ((drho + 1j * rho) * e)[:, None, None]
        d2 = ((ddrho + 2j * drho - rho) * e)[:, None, None, None]
        return f, d1, d2


class GradientGraph(LagrangianImmersion):
    """Toro lagrangiano u + i∇S(u) en ℂ²/ℤ[i]², S = amp/(4π²)·cos 2πu₁·cos 2πu₂."""

    kind = 'gradient_graph'
    _descriptor_fields = ('amplitude',)

    def __init__(self, manifold, amp: float, label: str):
        super().__init__(manifold, label, (1.0, 1.0))
        self.amplitude = float(amp)

    def _jet(self, u):
        a = self.amplitude
        x, y = TWO_PI * u[:, 0], TWO_PI * u[:, 1]
        cx, sx, cy, sy = np.cos(x), np.sin(x), np.cos(y), np.sin(y)
        grad = np.stack([-a / TWO_PI * sx * cy, -a / TWO_PI * cx * sy], axis=-1)
        hess = np.empty((u.shape[0], 2, 2))
        hess[:, 0, 0] = hess[:, 1, 1] = -a * cx * cy
        hess[:, 0, 1] = hess[:, 1, 0] = a * sx * sy
        third = np.empty((u.shape[0], 2, 2, 2))
        s111 = TWO_PI * a * sx * cy
        s112 = TWO_PI * a * cx * sy
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    ones = i + j + k
                    third[:, i, j, k] = s111 if ones in (0, 2) else s112
        f = u + 1j * grad
        d1 = np.eye(2)[None] + 1j * hess
        d2 = 1j * third
        return f, d1, d2


class PerturbedTorus(LagrangianImmersion):
    """Toro no lagrangiano (e^{iu₁}, e^{iu₂} + eps·e^{iu₁}) en ℂ²; ω(e₁, e₂) = -eps·sin(u₁ - u₂)."""

    kind = 'perturbed_torus'
    _descriptor_fields = ('eps',)

    def __init__(self, manifold, eps: float, label: str):
        super().__init__(manifold, label, (TWO_PI, TWO_PI))
        self.eps = float(eps)

    def _jet(self, u):
        e1, e2 = np.exp(1j * u[:, 0]), np.exp(1j * u[:, 1])
        f = np.stack([e1, e2 + self.eps * e1], axis=-1)
        d1 = np.zeros((u.shape[0], 2, 2), dtype=complex)
        d1[:, 0, 0] = 1j * e1
        d1[:, 1, 0] = 1j * self.eps * e1
        d1[:, 1, 1] = 1j * e2
        d2 = np.zeros((u.shape[0], 2, 2, 2), dtype=complex)
        d2[:, 0, 0, 0] = -e1
        d2[:, 1, 0, 0] = -self.eps * e1
        d2[:, 1, 1, 1] = -e2
        return f, d1, d2


# ----------------------------------------------------------------------
# Constructores nombrados (primer argumento: la variedad ambiente)
# ----------------------------------------------------------------------
def _require(manifold, cls, name, dim=None, exact=False):
    ok = type(manifold) is cls if exact else isinstance(manifold, cls)
    if not ok or (dim is not None and manifold.dim != dim):
        expected = f"{cls.__name__}" + (f" con n={dim}" if dim is not None else "")
        raise ConfigError(f"{name} requiere una variedad {expected}, recibido {manifold.describe()}",
                          code='INCOMPATIBLE_MANIFOLD', field='lagrangian')


def circle(manifold, r: float = 1.0):
    _require(manifold, FlatSpace, 'circle', dim=1, exact=True)
    return TorusOrbit(manifold, (r,), f"circle({r:g})")


def product_torus(manifold, *radii: float):
    _require(manifold, FlatSpace, 'product_torus', dim=len(radii), exact=True)
    return TorusOrbit(manifold, radii, f"product_torus({', '.join(f'{r:g}' for r in radii)})")


def latitude(manifold, rho: float = 1.0):
    _require(manifold, ProjectiveSpace, 'latitude', dim=1)
    return TorusOrbit(manifold, (rho,), f"latitude({rho:g})")


def clifford(manifold, n: int = None):
    n = manifold.dim if n is None else n
    _require(manifold, ProjectiveSpace, 'clifford', dim=n)
    return TorusOrbit(manifold, (1.0,) * n, f"clifford({n})")


def hyperbolic_circle(manifold, s: float = 1.0):
    _require(manifold, HyperbolicBall, 'hyperbolic_circle', dim=1)
    if s <= 0:
        raise ConfigError("hyperbolic_circle requiere radio hiperbólico positivo", field='lagrangian')
    return TorusOrbit(manifold, (manifold.euclidean_radius(s),), f"hyperbolic_circle({s:g})")


def flat_torus_geodesic(manifold, direction=(1, 0)):
    _require(manifold, FlatTorus, 'flat_torus_geodesic')
    return FlatGeodesic(manifold, tuple(direction), f"flat_torus_geodesic({tuple(direction)})")


def real_plane(manifold):
    _require(manifold, FlatSpace, 'real_plane', exact=True)
    return FlatGeodesic(manifold, 1.0, "real_plane")


def star_curve(manifold, r: float = 1.0, eps: float = 0.1, k: int = 3):
    _require(manifold, FlatSpace, 'star_curve', dim=1, exact=True)
    return StarCurve(manifold, r, eps, k, f"star_curve({r:g}, {eps:g}, {k})")


def gradient_graph(manifold, amp: float = 0.3):
    _require(manifold, FlatTorus, 'gradient_graph', dim=2)
    if manifold.lattice != 'square':
        raise ConfigError("gradient_graph requiere la red cuadrada", field='lagrangian')
    return GradientGraph(manifold, amp, f"gradient_graph({amp:g})")


def perturbed_torus(manifold, eps: float = 0.1):
    _require(manifold, FlatSpace, 'perturbed_torus', dim=2, exact=True)
    return PerturbedTorus(manifold, eps, f"perturbed_torus({eps:g})")


LAGRANGIAN_CONSTRUCTORS = {
    'circle': circle,
    'product_torus': product_torus,
    'latitude': latitude,
    'clifford': clifford,
    'hyperbolic_circle': hyperbolic_circle,
    'flat_torus_geodesic': flat_torus_geodesic,
    'real_plane': real_plane,
    'star_curve': star_curve,
    'gradient_graph': gradient_graph,
    'perturbed_torus': perturbed_torus,
}
