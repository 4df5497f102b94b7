import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from catenoid_index.errors import ChartMismatchError, NonpositiveHError
from catenoid_index.fields import rotation_profile
from catenoid_index.geometry import Chart, Grid1D, critical_params
from catenoid_index.linalg_core import BKind, pencil_eigs, pencil_eigvec
from catenoid_index.sturm_liouville import (
    BoundaryCondition,
    assemble,
    boundary_alpha,
    discrete_form,
    ground_state_certificate,
    legendre_substitution_check,
    mode_problem,
    qn_value,
)


def test_potential_shift(p):
    s = np.linspace(-p.T, p.T, 31)
    base = mode_problem(0, Chart.S, BoundaryCondition.ROBIN, p)
    for n in range(1, 6):
        mp = mode_problem(n, Chart.S, BoundaryCondition.ROBIN, p)
        np.testing.assert_allclose(mp.potential(s) - base.potential(s), n * n, atol=1e-13)
    with pytest.raises(ValueError):
        mode_problem(-1, Chart.S, BoundaryCondition.ROBIN, p)


def test_robin_coefficient(p):
    # du/dnu = u with nu = d_s / (a cosh s) gives f'(+-T) = +-(1/T) f(+-T)
    for chart in Chart:
        mp = mode_problem(2, chart, BoundaryCondition.ROBIN, p)
        assert boundary_alpha(mp, p) == pytest.approx(1.0 / p.T, rel=1e-14)
    assert mode_problem(0, Chart.S, BoundaryCondition.ROBIN, p).robin_coeff == pytest.approx(p.boundary_radius, rel=1e-12)
    assert mode_problem(0, Chart.PHI, BoundaryCondition.ROBIN, p).robin_coeff == pytest.approx(p.coshT / p.T)


def test_dirichlet_ground_state_is_xi(p):
    g = Grid1D.uniform(Chart.S, 1024, p)
    P = assemble(mode_problem(0, Chart.S, BoundaryCondition.DIRICHLET, p), g, p)
    lam = pencil_eigs(P, 1, 1e-13)[0]
    assert abs(lam) <= 5e-5
    v = pencil_eigvec(P, lam)
    s = g.nodes[1:-1]
    xi = 1 - s * np.tanh(s)
    assert abs(v @ xi) / (np.linalg.norm(v) * np.linalg.norm(xi)) >= 0.9999


def test_assembly_matches_direct_form(p):
    g = Grid1D.uniform(Chart.PHI, 201, p)
    f = np.cos(3 * g.nodes) + 0.2 * g.nodes**2
    P = assemble(mode_problem(2, Chart.PHI, BoundaryCondition.ROBIN, p), g, p)
    assert P.A.quadratic_form(f) == pytest.approx(2 * qn_value(2, f, g, p), abs=1e-10)
    gs = Grid1D.uniform(Chart.S, 201, p)
    mp = mode_problem(1, Chart.S, BoundaryCondition.ROBIN, p)
    fs = np.exp(gs.nodes)
    assert assemble(mp, gs, p).A.quadratic_form(fs) == pytest.approx(discrete_form(mp, gs, fs, p), abs=1e-10)


def test_steklov_assembly_structure(p):
    P = assemble(mode_problem(1, Chart.S, BoundaryCondition.STEKLOV, p), Grid1D.uniform(Chart.S, 65, p), p)
    assert np.count_nonzero(P.B.diag) == 2
    assert P.b_kind is BKind.BOUNDARY_SEMIDEF and P.boundary_idx == (0, 64)
    P.validate()


def test_dirichlet_drops_endpoints(p):
    P = assemble(mode_problem(1, Chart.S, BoundaryCondition.DIRICHLET, p), Grid1D.uniform(Chart.S, 65, p), p)
    assert P.n == 63
    P.validate()


def test_chart_mismatch(p):
    with pytest.raises(ChartMismatchError):
        assemble(mode_problem(0, Chart.PHI, BoundaryCondition.ROBIN, p), Grid1D.uniform(Chart.S, 65, p), p)
    with pytest.raises(ChartMismatchError):
        qn_value(2, np.zeros(65), Grid1D.uniform(Chart.S, 65, p), p)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_chart_equivalence(n, p):
    # relative to max(1, |lambda|): the fifth eigenvalues are O(100)
    a = pencil_eigs(assemble(mode_problem(n, Chart.S, BoundaryCondition.DIRICHLET, p), Grid1D.uniform(Chart.S, 2048, p), p), 5, 1e-12)
    b = pencil_eigs(
        assemble(mode_problem(n, Chart.PHI, BoundaryCondition.DIRICHLET, p), Grid1D.uniform(Chart.PHI, 2048, p), p), 5, 1e-12
    )
    assert np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))) <= 1e-4


def _shoot(f0, df0, s0, s1):
    sol = solve_ivp(
        lambda s, y: [y[1], (1 - 2 / np.cosh(s) ** 2) * y[0]],
        (s0, s1),
        [f0, df0],
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
    )
    return sol.sol


def test_mode_one_kernel_by_shooting(p):
    s = np.linspace(-p.T, p.T, 41)
    sech = 1 / np.cosh(s)
    lam = rotation_profile(s, p)
    dlam = lambda x: p.a * (1 / np.cosh(x) - x * np.tanh(x) / np.cosh(x) + np.cosh(x))
    for start, end in ((-p.T, p.T), (p.T, -p.T)):
        even = _shoot(1 / math.cosh(start), -math.tanh(start) / math.cosh(start), start, end)(s)[0]
        odd = _shoot(float(rotation_profile(start, p)), dlam(start), start, end)(s)[0]
        np.testing.assert_allclose(even, sech, rtol=1e-6)
        np.testing.assert_allclose(odd, lam, rtol=1e-6, atol=1e-10)


def _qn_continuous(n, f, df, p):
    def integrand(x):
        return math.sin(x) * (df(x) ** 2 + (n * n / math.sin(x) ** 2 - 2) * f(x) ** 2)

    body = quad(integrand, p.phi_star, math.pi - p.phi_star, epsabs=1e-13, limit=200)[0]
    return 0.5 * (body - (f(p.phi_star) ** 2 + f(math.pi - p.phi_star) ** 2) / p.T)


def test_qn_against_quadrature_oracle(p):
    f = lambda x: 1 / math.sin(x) ** 2
    df = lambda x: -2 * math.cos(x) / math.sin(x) ** 3
    exact = _qn_continuous(2, f, df, p)
    errs = []
    for n in (513, 1025):
        g = Grid1D.uniform(Chart.PHI, n, p)
        v = qn_value(2, 1 / np.sin(g.nodes) ** 2, g, p)
        assert v > 0
        errs.append(abs(v - exact))
    assert errs[1] <= 2e-4 * exact
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_qn_zero(p):
    g = Grid1D.uniform(Chart.PHI, 65, p)
    assert qn_value(2, np.zeros(65), g, p) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=5, max_size=5))
def test_qn_monotone_in_n(c):
    p = critical_params()
    g = Grid1D.uniform(Chart.PHI, 129, p)
    f = np.polynomial.polynomial.polyval(g.nodes - math.pi / 2, c)
    assert qn_value(3, f, g, p) >= qn_value(2, f, g, p) - 1e-12


def test_certificate_passes_for_inverse_sine_squared(p):
    g = Grid1D.uniform(Chart.PHI, 1024, p)
    r = ground_state_certificate(2, g, 1 / np.sin(g.nodes) ** 2, p)
    assert r.passed
    assert r.left_margin == pytest.approx(1 / p.T, abs=1e-6)
    assert r.right_margin == pytest.approx(1 / p.T, abs=1e-6)
    assert 1 / p.T == pytest.approx(0.83356, abs=1e-5)


def test_certificate_fails_for_constant(p):
    g = Grid1D.uniform(Chart.PHI, 257, p)
    r = ground_state_certificate(2, g, np.ones(257), p)
    assert not r.passed
    assert r.interior_min > 0
    assert r.left_margin == pytest.approx(-1 / p.T, abs=1e-12)
    assert r.right_margin == pytest.approx(-1 / p.T, abs=1e-12)


def test_certificate_rejects_nonpositive(p):
    g = Grid1D.uniform(Chart.PHI, 65, p)
    h = np.ones(65)
    h[10] = 0.0
    with pytest.raises(NonpositiveHError):
        ground_state_certificate(2, g, h, p)


def test_legendre_substitution(p):
    r = legendre_substitution_check(1024, p)
    assert r.relative <= 1e-4
    a = legendre_substitution_check(513, p)
    b = legendre_substitution_check(1025, p)
    assert a.absolute / b.absolute == pytest.approx(4.0, rel=0.1)
    with pytest.raises(ValueError):
        legendre_substitution_check(2, p)
