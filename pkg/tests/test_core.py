import math

import numpy as np
import pytest
from conftest import TWO_PI, diamond_map, exp_circle_map, newton
from hypothesis import given
from hypothesis import strategies as st

from genexp.bignum import Tower
from genexp.core import (
    UNCERTIFIED,
    build_map,
    compute_constants,
    find_fixed_point,
    min_singular_value,
    operator_norm,
)
from genexp.curve import CurveSpec, build_curve
from genexp.errors import (
    CertificationFailed,
    InvalidInput,
    NotCertified,
    NotDifferentiableHere,
)
from genexp.growth import GrowthSpec, build_growth

circle = build_curve(CurveSpec.unit_circle())
diamond_curve = build_curve(CurveSpec.diamond())
exp_g = build_growth(GrowthSpec.exponential())
MAPS = (exp_circle_map(), diamond_map())


def test_exp_circle_constants_closed_form():
    c = compute_constants(circle, exp_g)
    # c_h = 1 and g = g' = e^x: e^M = 2.  g + g' = 2 e^x = 1/4 at m.  a_min = g(M) - m.
    assert c.M == pytest.approx(math.log(2), abs=1e-8)
    assert c.M >= math.log(2)
    assert c.m == pytest.approx(math.log(1 / 8), abs=1e-8)
    assert c.m <= math.log(1 / 8)
    assert c.a_min == pytest.approx(2 + math.log(8), abs=1e-7)


def test_diamond_constants_consistent():
    c = compute_constants(diamond_curve, exp_g)
    assert c.c_h * math.exp(c.M) == pytest.approx(2.0, rel=1e-8)
    assert c.a_min == pytest.approx(max(0.0, math.exp(c.M) - c.m, math.exp(c.M) - c.M))
    assert c.a_min == pytest.approx(5.98932, abs=1e-4)


def test_fixed_point_matches_newton(exp_circle):
    xi = newton(lambda x: math.exp(x) - x - 5, lambda x: math.exp(x) - 1, -5.0)
    assert exp_circle.xi.imag == 0.0
    assert exp_circle.xi.real == pytest.approx(xi, abs=1e-9)
    assert find_fixed_point(exp_circle) == pytest.approx(xi, abs=1e-9)


def test_uncertified_map_is_flagged():
    f = diamond_map(2.0, UNCERTIFIED)
    assert not f.certified
    with pytest.raises(NotCertified):
        find_fixed_point(f)
    xi = newton(lambda x: math.exp(x) - x - 2, lambda x: math.exp(x) - 1, -2.0)
    assert f.xi.real == pytest.approx(xi, abs=1e-9)


def test_certified_mode_rejects_small_a():
    with pytest.raises(NotCertified):
        exp_circle_map(4.0)


def test_certification_fails_for_slow_growth():
    slow = build_growth(GrowthSpec.log_convex_polyline([0.0, 1.0], [0.0, 0.01]))
    with pytest.raises(CertificationFailed):
        build_map(diamond_curve, slow, 10.0)


def test_rejects_bad_parameters():
    with pytest.raises(InvalidInput):
        build_map(circle, exp_g, -1.0)
    with pytest.raises(InvalidInput):
        compute_constants(circle, exp_g, mu_target=1.0)


def test_head_start_constant(exp_circle, diamond):
    assert exp_circle.K == pytest.approx(TWO_PI)
    assert diamond.K > 1


def test_f_real_axis(exp_circle):
    assert exp_circle.f(0.0) == pytest.approx(-4.0)
    assert exp_circle.f(1 + 1j * math.pi) == pytest.approx(-math.e - 5)


@given(st.floats(-5, 5), st.floats(-20, 20))
def test_f_is_2pi_i_periodic(x, y):
    f = MAPS[0]
    z = complex(x, y)
    assert f.f(z + TWO_PI * 1j) == pytest.approx(f.f(z), rel=1e-9, abs=1e-9)


@given(st.floats(-5, 5), st.floats(-20, 20), st.floats(0, TWO_PI))
def test_jacobian_matches_finite_differences(x, y, phi):
    for f in MAPS:
        z = complex(x, y)
        yp = (y + math.pi / 2) % math.pi - math.pi / 2
        if f.curve.vertices.size and np.min(np.abs(yp - f.curve.vertices)) < 1e-4:
            continue
        d = complex(math.cos(phi), math.sin(phi))
        step = 1e-6
        fd = (f.f(z + step * d) - f.f(z - step * d)) / (2 * step)
        J = f.jacobian(z)
        jd = J @ np.array([d.real, d.imag])
        assert abs(complex(*jd) - fd) <= 1e-5 * max(1.0, abs(fd))


def test_jacobian_raises_at_vertex(diamond):
    with pytest.raises(NotDifferentiableHere):
        diamond.jacobian(1.0 + 0.0j)


@given(st.floats(0, 30), st.floats(-40, 40))
def test_expansion_right_of_M(dx, y):
    for f in MAPS:
        z = complex(f.M + dx, y)
        yp = (y + math.pi / 2) % math.pi - math.pi / 2
        if f.curve.vertices.size and np.min(np.abs(yp - f.curve.vertices)) < 1e-9:
            continue
        assert min_singular_value(f.jacobian(z)) >= f.mu * (1 - 1e-9)


@given(st.floats(0, 30), st.floats(-40, 40))
def test_contraction_norm_left_of_m(dx, y):
    for f in MAPS:
        z = complex(f.m - dx, y)
        yp = (y + math.pi / 2) % math.pi - math.pi / 2
        if f.curve.vertices.size and np.min(np.abs(yp - f.curve.vertices)) < 1e-9:
            continue
        assert operator_norm(f.jacobian(z)) <= 0.5


@given(st.floats(0.0, 20.0), st.floats(-1.5, 1.5), st.integers(-3, 3))
def test_image_of_tract_lies_in_H(dx, u, k):
    for f in MAPS:
        z = complex(f.M + 1e-6 + dx, TWO_PI * k + u)
        assert f.in_H(f.f(z))


def test_H_excludes_points_left_of_image_of_boundary(exp_circle):
    # For the circle H is the exterior of the disc of radius 2 about -a, intersected with Re > -a.
    assert not exp_circle.in_H(-5 + 0j)
    assert not exp_circle.in_H(-4 + 0j)
    assert exp_circle.in_H(-2.9 + 0j)
    assert not exp_circle.in_H(-5.5 + 3j)
    edge = exp_circle.growth.g(exp_circle.M) - 5.0
    assert exp_circle.in_H(edge + 0j, closure=True)
    assert not exp_circle.in_H(edge + 0j)


def test_f_big_agrees_with_f(exp_circle):
    for z in (2 + 0.3j, 10 - 1j, 100 + 0.01j):
        re, im = exp_circle.f_big(z.real, z.imag)
        w = exp_circle.f(z)
        assert re == pytest.approx(w.real, rel=1e-12)
        assert im == pytest.approx(w.imag, rel=1e-12, abs=1e-12)


def test_f_big_overflow_to_tower(exp_circle):
    re, im = exp_circle.f_big(1000.0, 0.0)
    assert re == Tower(1, 1000.0)
    assert im == 0.0
    re2, _ = exp_circle.f_big(re, 0.0)
    assert re2 == Tower(2, 1000.0)
