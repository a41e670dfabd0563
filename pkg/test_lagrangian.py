"""
Pruebas de las inmersiones lagrangianas: jets, métrica inducida, curvatura media y σ_L
"""

import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from kemaslov.models.ambient import ChartPoint, FlatSpace, FlatTorus, HyperbolicBall, ProjectiveSpace, TangentVector
from kemaslov.models.lagrangian import (
    LAGRANGIAN_CONSTRUCTORS, LoopInL, circle, clifford, flat_torus_geodesic, gradient_graph, hyperbolic_circle,
    latitude, perturbed_torus, product_torus, real_plane, star_curve,
)
from kemaslov.utils.spec_parser import build_from_registry, parse_constructor
from kemaslov.utils.validators import ConfigError, ContractViolation


@pytest.fixture
def plane():
    return FlatSpace(1)


@pytest.fixture
def cp1():
    return ProjectiveSpace(1)


def test_circle_sigma_is_one_per_unit_parameter(plane):
    for r in (0.5, 1.0, 2.0):
        L = circle(plane, r)
        assert np.allclose(L.sigma_form([[0.3], [2.0]]), 1.0)


def test_sigma_at_on_unit_circle(plane):
    L = circle(plane, 1.0)
    base = L.point_at([0.0])
    w = TangentVector(base, [1j])
    assert L.sigma_at([0.0], w) == pytest.approx(1.0)


def test_sigma_at_rejects_normal_vector(plane):
    L = circle(plane, 1.0)
    base = L.point_at([0.0])
    with pytest.raises(ContractViolation):
        L.sigma_at([0.0], TangentVector(base, [1.0]))


def test_sigma_at_rejects_foreign_base(plane):
    L = circle(plane, 1.0)
    with pytest.raises(ContractViolation):
        L.sigma_at([0.0], TangentVector(ChartPoint(0, [0.5]), [1j]))


def test_induced_metric_of_circle(plane):
    assert circle(plane, 2.0).induced_metric([1.0]) == pytest.approx(np.array([[4.0]]))


def test_mean_curvature_points_inward(plane):
    H = circle(plane, 2.0).mean_curvature_vector([0.0])
    # H = -f/r² para el círculo de radio r
    assert np.allclose(H.components, [-0.5])


def test_circle_sigma_integral(plane):
    L = circle(plane, 1.5)
    assert L.integrate_sigma(L.factor_loop(0)) / math.pi == pytest.approx(2.0, abs=1e-12)
    assert L.integrate_sigma(L.factor_loop(0, orientation=-1)) / math.pi == pytest.approx(-2.0, abs=1e-12)


@pytest.mark.parametrize('rho', [0.3, 0.5, 0.8, 1.0, 2.0])
def test_latitude_sigma_integral(cp1, rho):
    L = latitude(cp1, rho)
    expected = 2.0 * (1 - rho ** 2) / (1 + rho ** 2)
    assert L.integrate_sigma(L.factor_loop(0)) / math.pi == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize('s', [0.5, 1.0])
def test_hyperbolic_circle_sigma_integral(s):
    disk = HyperbolicBall(-1.0)
    L = hyperbolic_circle(disk, s)
    assert L.integrate_sigma(L.factor_loop(0)) / math.pi == pytest.approx(2.0 * math.cosh(s), rel=1e-10)


def test_equator_and_clifford_are_minimal():
    for L in (latitude(ProjectiveSpace(1), 1.0), clifford(ProjectiveSpace(2)), clifford(ProjectiveSpace(3))):
        u = L.random_parameters(np.random.default_rng(3), 10)
        assert np.max(np.abs(L.geometry(u).mean_curvature)) <= 1e-12


def test_lagrangian_residuals():
    assert product_torus(FlatSpace(2), 1.0, 2.0).lagrangian_residual() <= 1e-14
    assert clifford(ProjectiveSpace(2)).lagrangian_residual() <= 1e-14
    assert gradient_graph(FlatTorus('square', n=2), 0.3).lagrangian_residual() <= 1e-12
    assert perturbed_torus(FlatSpace(2), 0.1).lagrangian_residual() > 1e-3


def test_perturbed_torus_omega_defect():
    L = perturbed_torus(FlatSpace(2), 0.1)
    u = np.array([[1.0, 0.2]])
    assert L.omega_defects(u)[0, 0, 1] == pytest.approx(-0.1 * math.sin(0.8))


def test_second_fundamental_form_is_normal():
    L = clifford(ProjectiveSpace(2))
    geo = L.geometry([[0.4, 1.3]])
    # g(II(e_a, e_b), e_c) = 0
    along = np.einsum('niab,nij,njc->nabc', geo.second_form, geo.metric, np.conj(geo.frame)).real
    assert np.max(np.abs(along)) <= 1e-12


def test_flat_geodesics_have_no_curvature():
    L = flat_torus_geodesic(FlatTorus('hexagonal'), (1, 1))
    assert np.allclose(L.sigma_form([[0.1], [0.7]]), 0.0)
    assert real_plane(FlatSpace(2)).lagrangian_residual() == 0.0


def test_sigma_closedness_on_product_torus():
    L = product_torus(FlatSpace(2), 1.0, 3.0)
    assert L.sigma_closedness_residual([0.3, 1.1]) <= 1e-8


def test_sigma_closedness_on_gradient_graph():
    L = gradient_graph(FlatTorus('square', n=2), 0.3)
    assert L.sigma_closedness_residual([0.13, 0.37], h=1e-4) <= 1e-4
    assert np.max(np.abs(L.sigma_form([[0.13, 0.37]]))) > 1e-3


def test_star_curve_area_and_sigma(plane):
    L = star_curve(plane, 1.0, 0.05, 3)
    assert L.enclosed_area() == pytest.approx(math.pi * (1 + 0.05 ** 2 / 2))
    loop = LoopInL([0.0], [2 * math.pi])
    assert L.integrate_sigma(loop, panels=128) / math.pi == pytest.approx(2.0, abs=1e-10)


def test_reparametrized_loop_keeps_sigma_integral(cp1):
    L = latitude(cp1, 0.5)
    loop = L.factor_loop(0)
    assert L.integrate_sigma(loop.reparametrized(0.4)) == pytest.approx(L.integrate_sigma(loop), abs=1e-10)


def test_loop_helpers():
    loop = LoopInL([0.0, 0.0], [2 * math.pi, 0.0])
    assert loop.reversed().orientation == -1
    assert loop.repeated(2).step[0] == pytest.approx(4 * math.pi)
    assert loop.closure_defect((2 * math.pi, 2 * math.pi)) == pytest.approx(0.0, abs=1e-15)
    assert LoopInL([0.0], [0.0]).is_constant
    with pytest.raises(ContractViolation):
        LoopInL([0.0], [1.0], orientation=2)
    with pytest.raises(ContractViolation):
        LoopInL([0.0], [1.0], warp=1.0)


def test_constant_loop_integrates_to_zero(plane):
    L = circle(plane, 1.0)
    assert L.integrate_sigma(LoopInL([0.3], [0.0])) == 0.0


def test_tangent_frame(cp1):
    frame = latitude(cp1, 0.5).tangent_frame([0.0])
    assert len(frame) == 1
    assert frame[0].components[0] == pytest.approx(0.5j)


def test_constructors_check_the_manifold(cp1):
    with pytest.raises(ConfigError) as info:
        circle(cp1, 1.0)
    assert info.value.code == 'INCOMPATIBLE_MANIFOLD'
    with pytest.raises(ConfigError):
        latitude(FlatSpace(1), 0.5)
    with pytest.raises(ConfigError):
        product_torus(FlatSpace(3), 1.0, 2.0)


def test_lagrangian_from_constructor_string(cp1):
    L = build_from_registry(parse_constructor('latitude(0.5)', 'lagrangian'), LAGRANGIAN_CONSTRUCTORS,
                            'lagrangian', cp1)
    assert L.describe() == 'latitude(0.5)'
    with pytest.raises(ConfigError) as info:
        build_from_registry(parse_constructor('sphere', 'lagrangian'), LAGRANGIAN_CONSTRUCTORS, 'lagrangian', cp1)
    assert 'latitude' in info.value.message


def test_closedness_residual_is_second_order():
    L = gradient_graph(FlatTorus('square', n=2), 0.3)
    orders = L.closedness_order([0.13, 0.37])
    assert len(orders) == 2
    assert all(o is not None and 1.7 < o < 2.3 for o in orders)


def test_second_fundamental_form_shape():
    L = clifford(ProjectiveSpace(2))
    II = L.second_fundamental_form([0.4, 1.3])
    assert II.shape == (2, 2, 2)
    # mínima pero no totalmente geodésica
    assert np.linalg.norm(II) > 1e-3
