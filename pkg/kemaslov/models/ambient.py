"""
Variedades Kähler-Einstein descritas por cartas holomorfas con jets exactos
de la métrica: ℂⁿ plano, ℂPⁿ con Fubini-Study, toro plano ℂⁿ/Λ y la bola
hiperbólica compleja.

Convenciones (fijadas para todo el paquete):
- forma hermítica h(u, v) = Σ g_{ij̄} uⁱ conj(vʲ), métrica riemanniana Re h;
- J actúa como multiplicación por i sobre las componentes;
- ω(u, v) = g(Ju, v) = -Im h(u, v), que en ℂⁿ plano es Σ dxⁱ∧dyⁱ;
- forma de Ricci con coeficiente R_{ij̄} = -∂ᵢ∂_j̄ log det g; Einstein ⇔ R = πλ g.

Las operaciones vectorizadas reciben coordenadas con forma (N, n).
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from config import Config
from kemaslov.models.base_model import BaseModel
from kemaslov.utils.validators import ConfigError, ContractViolation, DomainError, ImmersionError

logger = logging.getLogger(__name__)

OVERLAP_TOLERANCE = Config.OVERLAP_TOLERANCE


@dataclass(frozen=True, eq=False)
class ChartPoint:
    """Punto de la variedad en coordenadas holomorfas de la carta `chart_id`"""
    chart_id: int
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'coords', np.asarray(self.coords, dtype=complex).reshape(-1))

    @property
    def dim(self) -> int:
        return self.coords.size

    def to_dict(self):
        return {'chart_id': self.chart_id, 'coords': self.coords}


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Vector tangente real dado por sus componentes en el marco ∂/∂zⁱ"""
    base: ChartPoint
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'components', np.asarray(self.components, dtype=complex).reshape(-1))

    def J(self) -> 'TangentVector':
        return TangentVector(self.base, 1j * self.components)

    def to_dict(self):
        return {'base': self.base, 'components': self.components}


@dataclass(frozen=True, eq=False)
class MetricJet:
    """g[i, j] = g_{ij̄}; dg[k, i, j] = ∂_k g_{ij̄}; ddbar[k, l, i, j] = ∂_k ∂_l̄ g_{ij̄}"""
    g: np.ndarray
    dg: np.ndarray
    ddbar: np.ndarray


def _same_base(p: ChartPoint, q: ChartPoint) -> bool:
    return p is q or (p.chart_id == q.chart_id and np.array_equal(p.coords, q.coords))


class AmbientManifold(BaseModel):
    """Variedad Kähler-Einstein dada por un atlas de cartas abiertas de ℂⁿ."""

    kind = 'ambient'
    chart_count = 1
    _descriptor_fields = ('dim', 'chart_count')

    def __init__(self, dim: int, label: str):
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise ConfigError(f"Dimensión compleja inválida: {dim!r}", field='manifold')
        self.dim = dim
        self.label = label

    # ------------------------------------------------------------------
    # Interfaz a implementar por cada variedad (coords con forma (N, n))
    # ------------------------------------------------------------------
    def _in_domain(self, chart_id: int, coords: np.ndarray) -> np.ndarray:
        return np.all(np.isfinite(coords), axis=-1)

    def _metric(self, chart_id: int, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _metric_d(self, chart_id: int, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _metric_ddbar(self, chart_id: int, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _transition(self, chart_id: int, coords: np.ndarray, target: int):
        raise DomainError(
            f"{self.label} tiene una sola carta; no existe solapamiento con la carta {target}",
            field='chart_id', details={'chart_id': chart_id, 'target_chart': target},
        )

    def einstein_constant(self) -> float:
        raise NotImplementedError

    def random_coords(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Puntos aleatorios (count, n) dentro del dominio de la carta 0"""
        return rng.normal(size=(count, self.dim)) + 1j * rng.normal(size=(count, self.dim))

    def _reduce_difference(self, diff: np.ndarray) -> np.ndarray:
        return diff

    # ------------------------------------------------------------------
    # Operaciones vectorizadas
    # ------------------------------------------------------------------
    def in_domain(self, chart_id: int, coords) -> np.ndarray:
        return self._in_domain(chart_id, np.atleast_2d(np.asarray(coords, dtype=complex)))

    def check_coords(self, chart_id: int, coords) -> np.ndarray:
        z = np.atleast_2d(np.asarray(coords, dtype=complex))
        if chart_id < 0 or chart_id >= self.chart_count:
            raise DomainError(f"Carta {chart_id} inexistente en {self.label}", field='chart_id')
        if z.shape[-1] != self.dim:
            raise ContractViolation(
                f"Coordenadas de dimensión {z.shape[-1]} en {self.label} (n={self.dim})", field='coords')
        inside = self._in_domain(chart_id, z)
        if not np.all(inside):
            bad = z[~inside][0]
            raise DomainError(
                f"Punto fuera del dominio de la carta {chart_id} de {self.label}",
                field='coords', details={'chart_id': chart_id, 'coords': bad},
            )
        return z

    def metric(self, chart_id: int, coords) -> np.ndarray:
        z = self.check_coords(chart_id, coords)
        return self._metric(chart_id, z)

    def metric_derivative(self, chart_id: int, coords) -> np.ndarray:
        z = self.check_coords(chart_id, coords)
        return self._metric_d(chart_id, z)

    def metric_ddbar(self, chart_id: int, coords) -> np.ndarray:
        z = self.check_coords(chart_id, coords)
        return self._metric_ddbar(chart_id, z)

    def hermitian(self, chart_id: int, coords, u: np.ndarray, v: np.ndarray, g: np.ndarray = None) -> np.ndarray:
        """h(u, v) por punto; u, v con forma (N, n)"""
        if g is None:
            g = self.metric(chart_id, coords)
        return np.einsum('ni,nij,nj->n', u, g, np.conj(v))

    def christoffel(self, chart_id: int, coords) -> np.ndarray:
        """Γ[N, k, i, j] = g^{k l̄} ∂_j g_{i l̄}"""
        z = self.check_coords(chart_id, coords)
        g = self._metric(chart_id, z)
        dg = self._metric_d(chart_id, z)
        ginv = np.linalg.inv(g)
        return np.einsum('nlk,njil->nkij', ginv, dg)

    def log_det_gradient(self, chart_id: int, coords) -> np.ndarray:
        """c[N, k] = ∂_k log det g = tr(g⁻¹ ∂_k g)"""
        z = self.check_coords(chart_id, coords)
        g = self._metric(chart_id, z)
        dg = self._metric_d(chart_id, z)
        return np.einsum('nji,nkij->nk', np.linalg.inv(g), dg)

    def ricci(self, chart_id: int, coords) -> np.ndarray:
        """R[N, k, l] = -∂_k ∂_l̄ log det g a partir del jet exacto"""
        z = self.check_coords(chart_id, coords)
        g = self._metric(chart_id, z)
        dg = self._metric_d(chart_id, z)
        ddbar = self._metric_ddbar(chart_id, z)
        ginv = np.linalg.inv(g)
        dbar = np.conj(np.swapaxes(dg, -1, -2))
        first = np.einsum('nji,nklij->nkl', ginv, ddbar)
        second = np.einsum('nab,nlbc,ncd,nkda->nkl', ginv, dbar, ginv, dg)
        return -(first - second)

    def transition(self, chart_id: int, coords, target: int) -> Tuple[np.ndarray, np.ndarray]:
        """Coordenadas en la carta destino y jacobiano ∂w/∂z con forma (N, n, n)"""
        z = self.check_coords(chart_id, coords)
        if target == chart_id:
            eye = np.broadcast_to(np.eye(self.dim, dtype=complex), (z.shape[0], self.dim, self.dim))
            return z.copy(), eye.copy()
        if target < 0 or target >= self.chart_count:
            raise DomainError(f"Carta destino {target} inexistente en {self.label}", field='target_chart')
        return self._transition(chart_id, z, target)

    def distance(self, chart_id: int, coords_a, coords_b) -> np.ndarray:
        """Distancia euclídea en la carta entre conjuntos de puntos (con reducción por red)"""
        diff = np.atleast_2d(coords_a) - np.atleast_2d(coords_b)
        return np.linalg.norm(self._reduce_difference(diff), axis=-1)

    # ------------------------------------------------------------------
    # Operaciones puntuales
    # ------------------------------------------------------------------
    def metric_at(self, p: ChartPoint) -> MetricJet:
        z = self.check_coords(p.chart_id, p.coords)
        return MetricJet(
            g=self._metric(p.chart_id, z)[0],
            dg=self._metric_d(p.chart_id, z)[0],
            ddbar=self._metric_ddbar(p.chart_id, z)[0],
        )

    def christoffel_at(self, p: ChartPoint) -> np.ndarray:
        gamma = self.christoffel(p.chart_id, p.coords)[0]
        if not np.all(np.isfinite(gamma)):
            raise ImmersionError(f"Métrica singular en la carta {p.chart_id} de {self.label}")
        return gamma

    def inner(self, p: ChartPoint, u: TangentVector, v: TangentVector) -> float:
        self._check_bases(p, u, v)
        return float(self.hermitian(p.chart_id, p.coords, u.components[None], v.components[None])[0].real)

    def symplectic_pair(self, p: ChartPoint, u: TangentVector, v: TangentVector) -> float:
        """ω(u, v) = g(Ju, v) = -Im h(u, v)"""
        self._check_bases(p, u, v)
        return float(-self.hermitian(p.chart_id, p.coords, u.components[None], v.components[None])[0].imag)

    def ricci_form_at(self, p: ChartPoint) -> np.ndarray:
        return self.ricci(p.chart_id, p.coords)[0]

    def einstein_residual(self, p: ChartPoint) -> float:
        """max |R - πλ g| en el punto"""
        g = self.metric(p.chart_id, p.coords)[0]
        ricci = self.ricci(p.chart_id, p.coords)[0]
        return float(np.max(np.abs(ricci - math.pi * self.einstein_constant() * g)))

    def kahler_residual(self, p: ChartPoint) -> float:
        """max |∂_k g_{ij̄} - ∂_i g_{kj̄}|"""
        dg = self.metric_derivative(p.chart_id, p.coords)[0]
        return float(np.max(np.abs(dg - np.swapaxes(dg, 0, 1))))

    def chart_transition(self, p: ChartPoint, target_chart: int) -> Tuple[ChartPoint, np.ndarray]:
        coords, jac = self.transition(p.chart_id, p.coords, target_chart)
        if np.linalg.matrix_rank(jac[0]) < self.dim:
            raise DomainError(f"Jacobiano de transición singular hacia la carta {target_chart}")
        return ChartPoint(target_chart, coords[0]), jac[0]

    def chart_distance(self, p: ChartPoint, q: ChartPoint) -> float:
        if q.chart_id != p.chart_id:
            q, _ = self.chart_transition(q, p.chart_id)
        return float(self.distance(p.chart_id, p.coords, q.coords)[0])

    def _check_bases(self, p: ChartPoint, *vectors: TangentVector):
        for v in vectors:
            if not _same_base(p, v.base):
                raise ContractViolation("Vectores tangentes con puntos base distintos", field='base')


class FlatSpace(AmbientManifold):
    """ℂⁿ con la métrica plana; Ricci-plana (λ = 0)."""

    kind = 'flat'

    def __init__(self, n: int = 1):
        super().__init__(n, f"Cn(n={n})")

    def einstein_constant(self) -> float:
        return 0.0

    def _metric(self, chart_id, coords):
        return np.broadcast_to(np.eye(self.dim, dtype=complex), (coords.shape[0], self.dim, self.dim)).copy()

    def _metric_d(self, chart_id, coords):
        return np.zeros((coords.shape[0],) + (self.dim,) * 3, dtype=complex)

    def _metric_ddbar(self, chart_id, coords):
        return np.zeros((coords.shape[0],) + (self.dim,) * 4, dtype=complex)


LATTICES: Dict[str, Tuple[complex, complex]] = {
    'square': (1.0 + 0j, 1j),
    'hexagonal': (1.0 + 0j, complex(0.5, math.sqrt(3) / 2)),
}


class FlatTorus(FlatSpace):
    """ℂⁿ/Λ con Λ producto de una red plana por coordenada; carta = recubrimiento universal."""

    kind = 'flat_torus'
    _descriptor_fields = ('dim', 'lattice')

    def __init__(self, lattice: str = 'square', n: int = 1):
        if lattice not in LATTICES:
            raise ConfigError(f"Red '{lattice}' desconocida. Válidas: {', '.join(sorted(LATTICES))}",
                              field='manifold')
        super().__init__(n)
        self.lattice = lattice
        self.label = f"FlatTorus(lattice={lattice}, n={n})"
        p1, p2 = LATTICES[lattice]
        self.periods = (p1, p2)
        basis = np.array([[p1.real, p2.real], [p1.imag, p2.imag]])
        self._basis = basis
        self._basis_inv = np.linalg.inv(basis)

    def _reduce_difference(self, diff):
        re_im = np.stack([diff.real, diff.imag], axis=-1)
        coeff = np.einsum('ab,...b->...a', self._basis_inv, re_im)
        coeff = coeff - np.round(coeff)
        back = np.einsum('ab,...b->...a', self._basis, coeff)
        return back[..., 0] + 1j * back[..., 1]


class KahlerPotentialSpace(AmbientManifold):
    """Métricas con potencial (a/s)·log(1 + s|z|²): s = +1 Fubini-Study, s = -1 bola hiperbólica.

    g_{ij̄} = a(δᵢⱼ/q - s z̄ᵢ zⱼ/q²), q = 1 + s|z|²; det g = aⁿ q^{-(n+1)}, λ = s(n+1)/(πa).
    """

    def __init__(self, dim: int, label: str, scale: float, sign: int):
        super().__init__(dim, label)
        self.scale = float(scale)
        self.sign = int(sign)

    def einstein_constant(self) -> float:
        return self.sign * (self.dim + 1) / (math.pi * self.scale)

    def _q(self, coords):
        return 1.0 + self.sign * np.sum(np.abs(coords) ** 2, axis=-1)

    def _metric(self, chart_id, coords):
        a, s = self.scale, self.sign
        q = self._q(coords)
        zb = np.conj(coords)
        eye = np.eye(self.dim)
        return a * (eye[None] / q[:, None, None]
                    - s * zb[:, :, None] * coords[:, None, :] / q[:, None, None] ** 2)

    def _metric_d(self, chart_id, coords):
        a, s = self.scale, self.sign
        q = self._q(coords)[:, None, None, None]
        z, zb = coords, np.conj(coords)
        eye = np.eye(self.dim)
        # índices (N, k, i, j)
        t1 = -zb[:, :, None, None] * eye[None, None, :, :]
        t2 = -zb[:, None, :, None] * eye[None, :, None, :]
        t3 = zb[:, None, :, None] * z[:, None, None, :] * zb[:, :, None, None]
        return a * s * ((t1 + t2) / q ** 2 + 2 * s * t3 / q ** 3)

    def _metric_ddbar(self, chart_id, coords):
        a, s = self.scale, self.sign
        q = self._q(coords)[:, None, None, None, None]
        z, zb = coords, np.conj(coords)
        d = np.eye(self.dim)
        # índices (N, k, l, i, j)
        quad = (-np.einsum('ij,kl->klij', d, d) - np.einsum('jk,il->klij', d, d))[None]
        cubic = (np.einsum('ij,nk,nl->nklij', d, zb, z)
                 + np.einsum('jk,ni,nl->nklij', d, zb, z)
                 + np.einsum('il,nj,nk->nklij', d, z, zb)
                 + np.einsum('kl,ni,nj->nklij', d, zb, z))
        quartic = np.einsum('ni,nj,nk,nl->nklij', zb, z, zb, z)
        return a * s * (quad / q ** 2 + 2 * s * cubic / q ** 3 - 6 * s * s * quartic / q ** 4)


class ProjectiveSpace(KahlerPotentialSpace):
    """ℂPⁿ con Fubini-Study normalizada a área π por recta; n+1 cartas afines."""

    kind = 'projective'

    def __init__(self, n: int = 1):
        super().__init__(n, f"CPn(n={n})", scale=1.0, sign=1)
        self.chart_count = n + 1

    def homogeneous(self, chart_id: int, coords: np.ndarray) -> np.ndarray:
        return np.insert(coords, chart_id, 1.0, axis=-1)

    def _transition(self, chart_id, coords, target):
        Z = self.homogeneous(chart_id, coords)
        zb = Z[:, target]
        if np.any(np.abs(zb) < OVERLAP_TOLERANCE):
            raise DomainError(
                f"Punto fuera del solapamiento entre las cartas {chart_id} y {target} de {self.label}",
                field='coords', details={'chart_id': chart_id, 'target_chart': target},
            )
        w = np.delete(Z, target, axis=1) / zb[:, None]
        m = self.dim + 1
        full = (np.eye(m)[None] / zb[:, None, None]
                - Z[:, :, None] * (np.arange(m) == target)[None, None, :] / zb[:, None, None] ** 2)
        jac = np.delete(np.delete(full, target, axis=1), chart_id, axis=2)
        return w, jac

    def random_coords(self, rng, count):
        return 0.8 * (rng.normal(size=(count, self.dim)) + 1j * rng.normal(size=(count, self.dim)))


class HyperbolicBall(KahlerPotentialSpace):
    """Bola unidad con la métrica de Bergman escalada: curvatura de Gauss K para n = 1."""

    kind = 'hyperbolic'
    _descriptor_fields = ('dim', 'curvature')

    def __init__(self, K: float = -1.0, n: int = 1):
        K = float(K)
        if not K < 0:
            raise ConfigError(f"La curvatura hiperbólica debe ser negativa, recibido K={K}", field='manifold')
        super().__init__(n, f"HyperbolicDisk(K={K:g}, n={n})", scale=4.0 / abs(K), sign=-1)
        self.curvature = K

    def _in_domain(self, chart_id, coords):
        return np.all(np.isfinite(coords), axis=-1) & (np.sum(np.abs(coords) ** 2, axis=-1) < 1.0)

    def random_coords(self, rng, count):
        direction = rng.normal(size=(count, self.dim)) + 1j * rng.normal(size=(count, self.dim))
        direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
        radius = 0.9 * rng.uniform(size=(count, 1)) ** (1.0 / (2 * self.dim))
        return radius * direction

    def euclidean_radius(self, s: float) -> float:
        """Radio euclídeo del círculo geodésico de radio hiperbólico s centrado en 0"""
        return math.tanh(s * math.sqrt(abs(self.curvature)) / 2.0)


MANIFOLD_CONSTRUCTORS = {
    'Cn': FlatSpace,
    'CPn': ProjectiveSpace,
    'FlatTorus': FlatTorus,
    'HyperbolicDisk': HyperbolicBall,
}
