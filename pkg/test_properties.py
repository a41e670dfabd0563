"""
Pruebas basadas en propiedades (hypothesis) de los invariantes geométricos
"""

import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
from hypothesis import given, settings, strategies as st

from kemaslov.controllers.canonical_controller import generator_loop_winding, unwrap_samples
from kemaslov.controllers.verify_controller import identity_terms
from kemaslov.models.ambient import ChartPoint, FlatSpace, ProjectiveSpace, TangentVector
from kemaslov.models.lagrangian import circle, latitude
from kemaslov.models.surface import cap, chart_disk, flat_disk
from kemaslov.utils.validators import validate_tolerances

FAST = settings(max_examples=15, deadline=None)

radii = st.floats(min_value=0.2, max_value=5.0, allow_nan=False)
latitudes = st.floats(min_value=0.2, max_value=3.0, allow_nan=False)


@st.composite
def generator_loops(draw):
    n = draw(st.integers(min_value=1, max_value=4))
    axis = draw(st.integers(min_value=1, max_value=n))
    repeats = draw(st.integers(min_value=1, max_value=3))
    return n, axis, repeats


@st.composite
def phase_walks(draw):
    """Fases continuas con saltos menores que π entre muestras"""
    steps = draw(st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=2, max_size=60))
    start = draw(st.floats(min_value=-10.0, max_value=10.0))
    return start + np.concatenate([[0.0], np.cumsum(steps)])


@FAST
@given(r=radii)
def test_flat_circle_terms(r):
    plane = FlatSpace(1)
    L = circle(plane, r)
    F = flat_disk(plane, L, r)
    terms = identity_terms(L, F)
    assert terms.mu == 2
    assert math.isclose(terms.omega, math.pi * r * r, rel_tol=1e-12)
    assert abs(terms.sigma_over_pi - 2.0) <= 1e-10
    assert abs(terms.residual) <= 1e-9


@FAST
@given(r=radii)
def test_reversal_negates_every_term(r):
    plane = FlatSpace(1)
    L = circle(plane, r)
    forward = identity_terms(L, flat_disk(plane, L, r))
    backward = identity_terms(L, flat_disk(plane, L, r).reversed())
    assert backward.mu == -forward.mu
    assert math.isclose(backward.omega, -forward.omega, rel_tol=1e-12)
    assert math.isclose(backward.sigma_over_pi, -forward.sigma_over_pi, rel_tol=1e-12)


@FAST
@given(rho=latitudes)
def test_latitude_identity_on_both_sides(rho):
    cp1 = ProjectiveSpace(1)
    L = latitude(cp1, rho)
    near = identity_terms(L, chart_disk(cp1, L, rho).with_resolution(32))
    far = identity_terms(L, cap(cp1, L).with_resolution(32))
    assert near.mu == far.mu == 2
    assert abs(near.residual) <= 1e-8
    assert abs(far.residual) <= 1e-8
    # las dos mitades cubren la esfera de área π
    assert math.isclose(near.omega + far.omega, math.pi, rel_tol=1e-10)


@FAST
@given(loop=generator_loops())
def test_generator_loop_winding(loop):
    n, axis, repeats = loop
    assert generator_loop_winding(n, axis, repeats) == -repeats


@FAST
@given(modulus=st.floats(min_value=0.2, max_value=5.0), angle=st.floats(min_value=-math.pi, max_value=math.pi),
       v=st.tuples(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=-2.0, max_value=2.0)))
def test_cp1_metric_is_chart_invariant(modulus, angle, v):
    cp1 = ProjectiveSpace(1)
    p = ChartPoint(0, [modulus * np.exp(1j * angle)])
    vector = TangentVector(p, [complex(*v)])
    q, jac = cp1.chart_transition(p, 1)
    moved = TangentVector(q, jac @ vector.components)
    expected = cp1.inner(p, vector, vector)
    assert math.isclose(cp1.inner(q, moved, moved), expected, rel_tol=1e-10, abs_tol=1e-14)


@FAST
@given(rho=latitudes, warp=st.floats(min_value=-0.9, max_value=0.9))
def test_sigma_integral_ignores_parametrization(rho, warp):
    L = latitude(ProjectiveSpace(1), rho)
    loop = L.factor_loop(0)
    assert math.isclose(L.integrate_sigma(loop.reparametrized(warp)), L.integrate_sigma(loop),
                        rel_tol=1e-10, abs_tol=1e-12)


@FAST
@given(phi=phase_walks())
def test_unwrap_recovers_continuous_phase(phi):
    wrapped = np.angle(np.exp(1j * phi))
    t = np.linspace(0.0, 1.0, phi.size)
    trace = unwrap_samples(t, wrapped, np.zeros(phi.size, dtype=int))
    offset = trace.phi[0] - phi[0]
    assert np.allclose(trace.phi - phi, offset, atol=1e-9)


@FAST
@given(values=st.dictionaries(st.sampled_from(['identity', 'oh_identity', 'einstein_cells']),
                              st.floats(min_value=1e-14, max_value=1.0)))
def test_tolerance_overrides_are_merged(values):
    known = {'identity': 1e-5, 'oh_identity': 1e-7, 'einstein_cells': 1e-4, 'lagrangian': 1e-10}
    merged = validate_tolerances(values, known)
    assert set(merged) == set(known)
    for key, value in values.items():
        assert merged[key] == value
    assert merged['lagrangian'] == 1e-10
