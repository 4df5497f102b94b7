import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from catenoid_index.errors import DomainError
from catenoid_index.geometry import (
    Chart,
    Grid1D,
    boundary_integral,
    chart_convert,
    embedding,
    outward_conormal,
    phi_to_s,
    second_fundamental_norm_sq,
    solve_critical_T,
    surface_integral,
    surface_point,
    tangent_vectors,
    unit_normal,
)

# frozen from brentq on t tanh t - 1 over [1, 2] with xtol 1e-15
T_ORACLE = 1.1996786402577337


def test_oracle_root_is_frozen_value():
    assert brentq(lambda t: t * math.tanh(t) - 1.0, 1.0, 2.0, xtol=1e-15) == pytest.approx(T_ORACLE, abs=1e-15)


def test_critical_constants(p):
    assert p.T == pytest.approx(T_ORACLE, abs=1e-13)
    assert abs(p.T * math.tanh(p.T) - 1.0) <= 1e-12
    assert abs(p.a * p.T * math.cosh(p.T) - 1.0) <= 1e-12
    assert abs(math.cos(p.phi_star) - 1.0 / p.T) <= 1e-12
    assert abs(math.sin(p.phi_star) - 1.0 / math.cosh(p.T)) <= 1e-12
    assert abs(p.boundary_radius - 1.0 / p.T) <= 1e-12
    assert p.a == pytest.approx(0.46048, abs=1e-5)
    assert p.phi_star == pytest.approx(0.58528, abs=1e-5)


def test_solver_tolerance_and_bracket():
    assert solve_critical_T(1e-12).T == pytest.approx(1.1996786, abs=1e-7)
    assert 1.0 * math.tanh(1.0) - 1.0 == pytest.approx(-0.23840, abs=1e-5)
    for bad in (0.0, -1.0, 1e-3):
        with pytest.raises(ValueError):
            solve_critical_T(bad)


def test_second_fundamental_form(p):
    assert second_fundamental_norm_sq(0.0, p) == pytest.approx(2.0 / p.a**2, rel=1e-14)
    assert 2.0 / p.a**2 == pytest.approx(9.43189, abs=1e-5)
    edge = second_fundamental_norm_sq(p.T, p)
    assert edge == pytest.approx(2.0 * p.T**2 / math.cosh(p.T) ** 2, rel=1e-12)
    assert edge == pytest.approx(0.8785, abs=1e-4)
    s = np.linspace(-p.T, p.T, 37)
    np.testing.assert_allclose(second_fundamental_norm_sq(s, p), second_fundamental_norm_sq(-s, p), rtol=0, atol=0)
    with pytest.raises(DomainError):
        second_fundamental_norm_sq(p.T + 1e-6, p)


def test_second_fundamental_form_from_shape_operator(p):
    # |A|^2 = tr((g^{-1} b)^2) with b_ij = <X_ij, N> by finite differences
    s0, th0, h = 0.37, 1.1, 1e-3

    def X(s, t):
        return embedding(s, t, p)

    X_ss = (X(s0 + h, th0) - 2 * X(s0, th0) + X(s0 - h, th0)) / h**2
    X_tt = (X(s0, th0 + h) - 2 * X(s0, th0) + X(s0, th0 - h)) / h**2
    X_st = (X(s0 + h, th0 + h) - X(s0 + h, th0 - h) - X(s0 - h, th0 + h) + X(s0 - h, th0 - h)) / (4 * h * h)
    N = unit_normal(s0, th0)
    b = np.array([[X_ss @ N, X_st @ N], [X_st @ N, X_tt @ N]])
    xs, xt = tangent_vectors(s0, th0, p)
    g = np.array([[xs @ xs, xs @ xt], [xs @ xt, xt @ xt]])
    shape = np.linalg.solve(g, b)
    assert np.trace(shape @ shape) == pytest.approx(second_fundamental_norm_sq(s0, p), rel=1e-5)
    assert np.trace(shape) == pytest.approx(0.0, abs=1e-5)


def test_chart_convert_examples(p):
    assert chart_convert(0.0, Chart.S, Chart.PHI, p) == pytest.approx(math.pi / 2, abs=1e-15)
    phi = chart_convert(p.T, Chart.S, Chart.PHI, p)
    assert phi == pytest.approx(p.phi_star, abs=1e-14)
    assert math.cos(phi) == pytest.approx(1.0 / p.T, abs=1e-12)
    assert chart_convert(-p.T, Chart.S, Chart.PHI, p) == pytest.approx(math.pi - p.phi_star, abs=1e-14)
    with pytest.raises(DomainError):
        chart_convert(p.T + 1e-9, Chart.S, Chart.PHI, p)
    with pytest.raises(DomainError):
        chart_convert(0.1, Chart.PHI, Chart.S, p)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-1.0, max_value=1.0))
def test_chart_round_trip(t):
    from catenoid_index.geometry import critical_params

    p = critical_params()
    s = t * p.T
    phi = chart_convert(s, Chart.S, Chart.PHI, p)
    assert abs(chart_convert(phi, Chart.PHI, Chart.S, p) - s) <= 1e-12


@pytest.mark.parametrize("chart", list(Chart))
def test_grid_invariants(chart, p):
    g = Grid1D.uniform(chart, 101, p)
    d = np.diff(g.nodes)
    assert np.all(d > 0)
    np.testing.assert_allclose(d, g.spacing, rtol=1e-10)
    lo, hi = (-p.T, p.T) if chart is Chart.S else (p.phi_star, math.pi - p.phi_star)
    assert g.nodes[0] == lo and g.nodes[-1] == hi
    other = Chart.PHI if chart is Chart.S else Chart.S
    back = chart_convert(g.converted(other, p), other, chart, p)
    np.testing.assert_allclose(back, g.nodes, rtol=0, atol=1e-12)
    r = g.refined(p)
    assert r.n_nodes == 201
    np.testing.assert_allclose(r.nodes[::2], g.nodes, atol=1e-14)
    with pytest.raises(ValueError):
        Grid1D.uniform(chart, 2, p)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=0.0, max_value=2 * math.pi))
def test_surface_point_invariants(t, theta):
    from catenoid_index.geometry import critical_params

    p = critical_params()
    s = t * p.T
    pt = surface_point(s, theta, p)
    assert abs(pt.position[2] - p.a * s) <= 1e-12
    assert abs(pt.position[0] ** 2 + pt.position[1] ** 2 - (p.a * math.cosh(s)) ** 2) <= 1e-12
    assert abs(np.linalg.norm(pt.normal) - 1.0) <= 1e-12
    xs, xt = tangent_vectors(s, theta, p)
    assert abs(pt.normal @ xs) <= 1e-10 and abs(pt.normal @ xt) <= 1e-10


def test_free_boundary_condition(p):
    theta = np.linspace(0, 2 * np.pi, 41)
    for side in (1, -1):
        nu = outward_conormal(side, theta, p)
        X = embedding(side * p.T, theta, p)
        assert np.max(np.linalg.norm(nu - X, axis=-1)) <= 1e-10
    with pytest.raises(ValueError):
        outward_conormal(0, theta, p)


def test_gauss_map_pulls_back_round_metric(p):
    # the normal, viewed as a function of (phi, theta), is an isometry onto the unit sphere
    h = 1e-3

    def N(phi, th):
        return unit_normal(phi_to_s(phi), th)

    def d(f, x, step):
        return (-f(x + 2 * step) + 8 * f(x + step) - 8 * f(x - step) + f(x - 2 * step)) / (12 * step)

    for phi in np.linspace(p.phi_star + 0.01, np.pi - p.phi_star - 0.01, 7):
        for th in (0.0, 0.9, 2.5):
            n_phi = d(lambda x: N(x, th), phi, h)
            n_th = d(lambda x: N(phi, x), th, h)
            assert abs(n_phi @ n_phi - 1.0) <= 1e-10
            assert abs(n_th @ n_th - math.sin(phi) ** 2) <= 1e-10
            assert abs(n_phi @ n_th) <= 1e-10


def test_surface_integral_examples(p):
    area = 2 * math.pi * p.a**2 * (p.T + p.sinhT * p.coshT)
    # frozen from scipy dblquad of a^2 cosh^2 s over the parameter rectangle
    assert area == pytest.approx(5.237390327987948, rel=1e-13)
    assert surface_integral(lambda s, t: np.ones_like(s), 1025, 16, p) == pytest.approx(area, rel=5e-6)
    assert surface_integral(lambda s, t: second_fundamental_norm_sq(s, p), 1025, 16, p) == pytest.approx(
        8 * math.pi / p.T, rel=5e-6
    )
    assert surface_integral(lambda s, t: 0 * s, 64, 16, p) == 0.0


def test_area_quadrature_converges_at_second_order(p):
    area = 2 * math.pi * p.a**2 * (p.T + p.sinhT * p.coshT)
    e1 = abs(surface_integral(lambda s, t: np.ones_like(s), 129, 8, p) - area)
    e2 = abs(surface_integral(lambda s, t: np.ones_like(s), 257, 8, p) - area)
    assert e1 / e2 == pytest.approx(4.0, rel=0.2)


def test_boundary_integral_examples(p):
    assert boundary_integral(lambda s, t: np.ones_like(t), 16, p) == pytest.approx(4 * math.pi / p.T, rel=1e-14)
    assert 4 * math.pi / p.T == pytest.approx(10.475, abs=1e-3)
    assert boundary_integral(lambda s, t: np.cos(t), 16, p) == pytest.approx(0.0, abs=1e-14)
    vz2 = boundary_integral(lambda s, t: np.tanh(s) ** 2 + 0 * t, 16, p)
    assert vz2 == pytest.approx(4 * math.pi / p.T**3, rel=1e-13)
    assert vz2 == pytest.approx(7.278, abs=1e-3)
