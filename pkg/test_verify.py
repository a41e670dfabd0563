"""
Pruebas de la identidad μ(F) - 2λω(F) = σ_L(∂F)/π y de los chequeos derivados
"""

import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from kemaslov.controllers.verify_controller import (
    boundary_dependence_check, boundary_dependence_report, delta_class, delta_report, einstein_surface_check,
    identity_residual, identity_terms, maslov_index, max_mean_curvature, monotonicity_check,
    sigma_boundary_integral,
)
from kemaslov.models.ambient import FlatSpace, FlatTorus, HyperbolicBall, ProjectiveSpace
from kemaslov.models.lagrangian import (
    LoopInL, circle, clifford, flat_torus_geodesic, hyperbolic_circle, latitude, perturbed_torus, product_torus,
    star_curve,
)
from kemaslov.models.report import FAIL, NOT_APPLICABLE, PASS
from kemaslov.models.surface import (
    cap, chart_disk, constant_disk, disk_filling, flat_disk, star_disk, torus_annulus, torus_disk, wavy_disk,
)
from kemaslov.utils.validators import LinkageError, PreconditionError


@pytest.fixture
def plane():
    return FlatSpace(1)


@pytest.fixture
def cp1():
    return ProjectiveSpace(1)


@pytest.fixture
def c2_torus():
    c2 = FlatSpace(2)
    return c2, product_torus(c2, 1.0, 2.0)


def test_flat_circle_identity(plane):
    L = circle(plane, 1.0)
    report = identity_residual(L, flat_disk(plane, L, 1.0), name='flat-circle', sample_count=20)
    assert report.status == PASS
    assert report.mu == 2
    assert report.omega_F == pytest.approx(math.pi, rel=1e-12)
    assert report.sigma_over_pi == pytest.approx(2.0, abs=1e-12)
    assert abs(report.residual) <= 1e-6
    assert report.scenario == 'flat-circle'


def test_latitude_identity_terms(cp1):
    L = latitude(cp1, 0.5)
    terms = identity_terms(L, chart_disk(cp1, L, 0.5))
    assert terms.mu == 2
    assert 2 * terms.einstein_constant * terms.omega == pytest.approx(0.8, abs=1e-10)
    assert terms.sigma_over_pi == pytest.approx(1.2, abs=1e-10)
    assert abs(terms.residual) <= 1e-8


def test_latitude_identity_report(cp1):
    L = latitude(cp1, 0.5)
    report = identity_residual(L, chart_disk(cp1, L, 0.5), sample_count=30)
    assert report.status == PASS
    assert report.einstein_constant == pytest.approx(2 / math.pi)
    assert {c.name for c in report.checks} >= {'identity', 'oh_identity', 'einstein_cells', 'einstein_stokes'}
    assert report.auxiliary['lagrangian_residual'] == 0.0


def test_far_cap_identity(cp1):
    L = latitude(cp1, 0.5)
    terms = identity_terms(L, cap(cp1, L))
    assert terms.mu == 2
    # 2λ·π/(1 + ρ²) = 3.2
    assert 2 * terms.einstein_constant * terms.omega == pytest.approx(3.2, abs=1e-10)
    assert terms.sigma_over_pi == pytest.approx(-1.2, abs=1e-10)
    assert abs(terms.residual) <= 1e-8


def test_hyperbolic_identity():
    disk = HyperbolicBall(-1.0)
    L = hyperbolic_circle(disk, 1.0)
    report = identity_residual(L, cap(disk, L), sample_count=30)
    assert report.status == PASS
    assert report.mu == 2
    assert report.sigma_over_pi == pytest.approx(2 * math.cosh(1.0), rel=1e-10)
    assert abs(report.residual) <= 1e-6


def test_reversed_surface_flips_every_term(plane):
    L = circle(plane, 1.0)
    terms = identity_terms(L, flat_disk(plane, L, 1.0).reversed())
    assert terms.mu == -2
    assert terms.omega == pytest.approx(-math.pi, rel=1e-12)
    assert terms.sigma_over_pi == pytest.approx(-2.0, abs=1e-12)
    assert abs(terms.residual) <= 1e-10


def test_star_disk_keeps_maslov_index(plane):
    L = star_curve(plane, 1.0, 0.05, 3)
    F = star_disk(plane, L)
    terms = identity_terms(L, F)
    assert terms.mu == 2
    assert terms.omega == pytest.approx(math.pi * (1 + 0.05 ** 2 / 2), rel=1e-10)
    assert abs(terms.residual) <= 1e-8


def test_torus_annulus_has_zero_maslov_index():
    torus = FlatTorus('square')
    L = flat_torus_geodesic(torus, (1, 0))
    F = torus_annulus(torus, L, 2)
    assert maslov_index(L, F) == 0
    assert sigma_boundary_integral(L, F) == pytest.approx(0.0, abs=1e-14)


def test_unlinked_surface_is_rejected(plane):
    L = circle(plane, 1.0)
    other = circle(plane, 1.0)
    with pytest.raises(LinkageError):
        identity_terms(L, flat_disk(plane, other, 1.0))


def test_perturbed_torus_fails_lagrangian_check():
    c2 = FlatSpace(2)
    L = perturbed_torus(c2, 0.1)
    report = identity_residual(L, disk_filling(c2, L, 0, 1), sample_count=20)
    assert report.status == FAIL
    assert report.mu == 2
    assert 'lagrangian_residual' in [c.name for c in report.failed_checks]


def test_einstein_surface_check(cp1):
    F = chart_disk(cp1, latitude(cp1, 0.5), 0.5)
    result = einstein_surface_check(F, sample_count=20, seed=3)
    assert result['einstein_cells'] <= 1e-4
    assert result['einstein_stokes'] <= 1e-6


def test_equator_is_monotone(cp1):
    L = latitude(cp1, 1.0)
    report = monotonicity_check(L, [chart_disk(cp1, L, 1.0), cap(cp1, L, 1.0)], sample_count=20)
    assert report.status == PASS
    assert report.checks[0].name == 'minimality'
    assert len(report.details['surfaces']) == 2
    for row in report.details['surfaces']:
        assert row['mu'] == 2
        assert row['two_lambda_omega'] == pytest.approx(2.0, abs=1e-8)


def test_clifford_torus_is_monotone():
    cp2 = ProjectiveSpace(2)
    L = clifford(cp2)
    surfaces = [torus_disk(cp2, L, 1, 0), torus_disk(cp2, L, 0, 1)]
    report = monotonicity_check(L, surfaces, sample_count=20)
    assert report.status == PASS
    assert report.mu == 2
    assert report.omega_F == pytest.approx(math.pi / 3, rel=1e-10)


def test_monotonicity_not_applicable_off_the_equator(cp1):
    L = latitude(cp1, 0.5)
    report = monotonicity_check(L, [chart_disk(cp1, L, 0.5)], sample_count=20)
    assert report.checks[0].status == NOT_APPLICABLE
    assert report.status == PASS
    assert report.mu is None
    assert max_mean_curvature(L, 20) > 1e-3


def test_monotonicity_requires_positive_lambda(plane):
    L = circle(plane, 1.0)
    with pytest.raises(PreconditionError):
        monotonicity_check(L, [flat_disk(plane, L, 1.0)])
    disk = HyperbolicBall(-1.0)
    H = hyperbolic_circle(disk, 1.0)
    with pytest.raises(PreconditionError):
        monotonicity_check(H, [cap(disk, H)])


def test_boundary_dependence_same_surface(plane):
    L = circle(plane, 1.0)
    F = flat_disk(plane, L, 1.0)
    assert boundary_dependence_check(L, F, F) == 0.0


def test_boundary_dependence_flat_and_wavy(plane):
    L = circle(plane, 1.0)
    gap = boundary_dependence_check(L, flat_disk(plane, L, 1.0), wavy_disk(plane, L, 1.0, 0.2))
    assert gap <= 1e-6


def test_boundary_dependence_across_charts(cp1):
    L = latitude(cp1, 1.0)
    near = chart_disk(cp1, L, 1.0)
    far = cap(cp1, L, 1.0).reversed()
    assert boundary_dependence_check(L, near, far) <= 1e-5
    report = boundary_dependence_report(L, near, far, name='equator')
    assert report.status == PASS
    assert report.details['surfaces'][1]['mu'] == -2
    assert report.details['surfaces'][1]['omega_F'] == pytest.approx(-math.pi / 2, rel=1e-10)


def test_boundary_dependence_needs_a_shared_loop(cp1):
    L = latitude(cp1, 1.0)
    with pytest.raises(LinkageError):
        boundary_dependence_check(L, chart_disk(cp1, L, 1.0), cap(cp1, L, 1.0))


def test_delta_class_on_factor_loops(c2_torus):
    c2, L = c2_torus
    loops = [L.factor_loop(0), L.factor_loop(1)]
    surfaces = [torus_disk(c2, L, 1, 0), torus_disk(c2, L, 0, 1)]
    assert delta_class(L, loops, surfaces) == pytest.approx([2.0, 2.0])


def test_delta_class_is_additive(c2_torus):
    c2, L = c2_torus
    diagonal = LoopInL(np.zeros(2), [2 * math.pi, 2 * math.pi])
    (value,) = delta_class(L, [diagonal], [torus_disk(c2, L, 1, 1)])
    assert value == pytest.approx(4.0)


def test_delta_class_of_constant_loop(c2_torus):
    c2, L = c2_torus
    constant = LoopInL(np.zeros(2), np.zeros(2))
    assert delta_class(L, [constant], [constant_disk(c2, L)]) == [0.0]


def test_delta_class_checks_its_inputs(c2_torus):
    c2, L = c2_torus
    with pytest.raises(PreconditionError):
        delta_class(L, [L.factor_loop(0)], [])
    with pytest.raises(LinkageError):
        delta_class(L, [L.factor_loop(1)], [torus_disk(c2, L, 1, 0)])


def test_delta_report_matches_sigma(c2_torus):
    c2, L = c2_torus
    report = delta_report(L, [torus_disk(c2, L, 1, 0), torus_disk(c2, L, 0, 1), torus_disk(c2, L, 1, 1)])
    assert report.status == PASS
    assert report.details['delta'] == pytest.approx([2.0, 2.0, 4.0])


AUXILIARY_CHECKS = {'lagrangian_residual', 'oh_identity', 'sigma_closedness', 'einstein_cells', 'einstein_stokes'}


def test_monotonicity_report_runs_auxiliary_checks():
    cp2 = ProjectiveSpace(2)
    L = clifford(cp2)
    report = monotonicity_check(L, [torus_disk(cp2, L, 1, 0), torus_disk(cp2, L, 0, 1)], sample_count=20)
    assert {c.name for c in report.checks} >= AUXILIARY_CHECKS
    assert set(report.auxiliary) >= AUXILIARY_CHECKS | {'max_mean_curvature'}
    assert report.status == PASS


def test_monotonicity_not_applicable_still_runs_auxiliary_checks(cp1):
    L = latitude(cp1, 0.5)
    report = monotonicity_check(L, [chart_disk(cp1, L, 0.5)], sample_count=20)
    assert {c.name for c in report.checks} >= AUXILIARY_CHECKS


def test_boundary_dependence_report_runs_auxiliary_checks(cp1):
    L = latitude(cp1, 1.0)
    report = boundary_dependence_report(L, chart_disk(cp1, L, 1.0), cap(cp1, L, 1.0).reversed(), sample_count=20)
    assert {c.name for c in report.checks} >= AUXILIARY_CHECKS
    assert report.status == PASS


def test_delta_report_runs_auxiliary_checks(c2_torus):
    c2, L = c2_torus
    report = delta_report(L, [torus_disk(c2, L, 1, 0), torus_disk(c2, L, 0, 1)], sample_count=20)
    assert set(report.auxiliary) == AUXILIARY_CHECKS
    assert report.status == PASS


def test_delta_report_fails_on_non_lagrangian_torus():
    c2 = FlatSpace(2)
    L = perturbed_torus(c2, 0.1)
    report = delta_report(L, [disk_filling(c2, L, 0, 1)], sample_count=20)
    assert report.status == FAIL
    assert 'lagrangian_residual' in [c.name for c in report.failed_checks]
