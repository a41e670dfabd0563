"""
Pruebas de superficies con borde: áreas simplécticas, enlaces de borde, orientación y refinamiento
"""

import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from kemaslov.models.ambient import FlatSpace, FlatTorus, HyperbolicBall, ProjectiveSpace
from kemaslov.models.lagrangian import (
    circle, clifford, flat_torus_geodesic, hyperbolic_circle, latitude, perturbed_torus, product_torus, star_curve,
)
from kemaslov.models.surface import (
    MAX_RESOLUTION, build_surface, cap, chart_annulus, chart_disk, constant_disk, disk_filling, flat_disk,
    star_disk, torus_annulus, torus_disk, wavy_disk,
)
from kemaslov.utils.spec_parser import parse_constructor
from kemaslov.utils.validators import ConfigError, CoverageError, LinkageError, ResourceError


@pytest.fixture
def plane():
    return FlatSpace(1)


@pytest.fixture
def cp1():
    return ProjectiveSpace(1)


@pytest.mark.parametrize('r', [0.5, 1.0, 2.0])
def test_flat_disk_area(plane, r):
    F = flat_disk(plane, circle(plane, r), r)
    assert F.symplectic_area() == pytest.approx(math.pi * r * r, rel=1e-12)


@pytest.mark.parametrize('rho', [0.3, 0.5, 0.8])
def test_chart_disk_area(cp1, rho):
    F = chart_disk(cp1, latitude(cp1, rho), rho)
    assert F.symplectic_area() == pytest.approx(math.pi * rho ** 2 / (1 + rho ** 2), rel=1e-10)


def test_hemispheres_have_equal_area(cp1):
    L = latitude(cp1, 1.0)
    near = chart_disk(cp1, L, 1.0)
    far = cap(cp1, L, 1.0)
    assert near.symplectic_area() == pytest.approx(math.pi / 2, rel=1e-10)
    assert far.symplectic_area() == pytest.approx(math.pi / 2, rel=1e-10)
    assert far.chart_id == 1


def test_far_cap_area(cp1):
    F = cap(cp1, latitude(cp1, 0.5))
    assert F.symplectic_area() == pytest.approx(math.pi / 1.25, rel=1e-10)


def test_chart_annulus_area_is_difference_of_disks(cp1):
    annulus = chart_annulus(cp1, None, 0.5, 2.0)
    expected = math.pi * 4 / 5 - math.pi * 0.25 / 1.25
    assert annulus.symplectic_area() == pytest.approx(expected, rel=1e-10)
    assert len(annulus.boundary_components) == 2


def test_hyperbolic_cap_area():
    disk = HyperbolicBall(-1.0)
    F = cap(disk, hyperbolic_circle(disk, 1.0))
    assert F.symplectic_area() == pytest.approx(2 * math.pi * (math.cosh(1.0) - 1), rel=1e-10)


def test_wavy_disk_has_area_of_round_disk(plane):
    F = wavy_disk(plane, circle(plane, 1.0), 1.0, 0.2)
    assert F.symplectic_area() == pytest.approx(math.pi, rel=1e-12)


def test_star_disk_area(plane):
    L = star_curve(plane, 1.5, 0.2, 4)
    F = star_disk(plane, L)
    assert F.symplectic_area() == pytest.approx(L.enclosed_area(), rel=1e-12)


def test_torus_annulus_area():
    torus = FlatTorus('square')
    L = flat_torus_geodesic(torus, (1, 0))
    for k in (1, 2, 3):
        assert torus_annulus(torus, L, k).symplectic_area() == pytest.approx(float(k), rel=1e-12)


def test_torus_disks_in_c2():
    c2 = FlatSpace(2)
    L = product_torus(c2, 1.0, 2.0)
    assert torus_disk(c2, L, 1, 0).symplectic_area() == pytest.approx(math.pi)
    assert torus_disk(c2, L, 0, 1).symplectic_area() == pytest.approx(4 * math.pi)
    assert torus_disk(c2, L, 1, 1).symplectic_area() == pytest.approx(5 * math.pi)


def test_clifford_coordinate_disk_area():
    cp2 = ProjectiveSpace(2)
    F = torus_disk(cp2, clifford(cp2), 1, 0)
    assert F.symplectic_area() == pytest.approx(math.pi / 3, rel=1e-10)


def test_constant_disk_has_zero_area(plane):
    assert constant_disk(plane, circle(plane, 1.0)).symplectic_area() == 0.0


def test_reversed_surface_negates_area(plane):
    F = flat_disk(plane, circle(plane, 1.0), 1.0)
    back = F.reversed()
    assert back.orientation == -1
    assert back.label == 'reversed(flat_disk(1))'
    assert back.symplectic_area() == pytest.approx(-math.pi, rel=1e-12)
    assert back.link_for(0).loop.orientation == -1
    assert back.reversed().label == 'flat_disk(1)'


def test_boundary_trace_matches_lagrangian(cp1):
    F = cap(cp1, latitude(cp1, 0.5))
    matches = F.boundary_trace(64)
    assert len(matches) == 1
    assert matches[0].max_distance <= 1e-10


def test_mismatched_boundary_is_a_linkage_error(plane):
    F = flat_disk(plane, circle(plane, 1.0), 2.0)
    with pytest.raises(LinkageError):
        F.boundary_trace(32)


def test_surface_outside_chart_is_a_coverage_error():
    disk = HyperbolicBall(-1.0)
    F = chart_disk(disk, hyperbolic_circle(disk, 1.0), 2.0)
    with pytest.raises(CoverageError) as info:
        F.symplectic_area()
    assert info.value.details['chart_id'] == 0


def test_refine_and_resolution_limits(plane):
    F = flat_disk(plane, circle(plane, 1.0), 1.0).with_resolution(16, 4)
    assert F.refine().resolution == 32
    assert F.refine().quadrature_order == 4
    with pytest.raises(ResourceError):
        F.with_resolution(MAX_RESOLUTION).refine()
    with pytest.raises(ConfigError) as info:
        F.with_resolution(17)
    assert info.value.code == 'INVARIANT_VIOLATION'


def test_area_converges_under_refinement(cp1):
    F = chart_disk(cp1, latitude(cp1, 0.8), 0.8).with_resolution(8, 2)
    exact = math.pi * 0.64 / 1.64
    errors = []
    for _ in range(3):
        errors.append(abs(F.symplectic_area() - exact))
        F = F.refine()
    assert errors[2] < errors[1] < errors[0]


def test_disk_filling_links_perturbed_torus():
    c2 = FlatSpace(2)
    L = perturbed_torus(c2, 0.1)
    for windings in ((0, 1), (1, 0)):
        F = disk_filling(c2, L, *windings)
        assert F.boundary_trace(32)[0].max_distance <= 1e-10
    with pytest.raises(ConfigError):
        disk_filling(c2, L, 1, 1)


def test_build_surface_from_strings(cp1):
    L = latitude(cp1, 1.0)
    F = build_surface(parse_constructor('reversed(cap(1))', 'surface'), cp1, L)
    assert F.orientation == -1
    assert F.symplectic_area() == pytest.approx(-math.pi / 2, rel=1e-10)
    with pytest.raises(ConfigError):
        build_surface(parse_constructor('flat_disk(1)', 'surface'), cp1, L)


def test_grid_weights_sum_to_parameter_area(plane):
    F = flat_disk(plane, circle(plane, 1.0), 1.0).with_resolution(8, 3)
    radial, angle, weights = F.grid()
    assert radial.size == (8 * 3) ** 2
    assert np.sum(weights) == pytest.approx(2 * math.pi)
