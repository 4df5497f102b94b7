import math

import numpy as np
import pytest
import scipy.linalg

from catenoid_index import index_engine as ie
from catenoid_index.errors import GramSingularError, NotSolvableError
from catenoid_index.fields import FieldKind
from catenoid_index.geometry import Chart, Grid1D
from catenoid_index.index_engine import (
    BoundaryMode,
    complement_positivity_check,
    disk_eigenvalues,
    disk_index,
    morse_index,
    read_boundary_csv,
    sigma1_laplacian,
    solve_dirichlet,
    split_parity,
    steklov_eigenvector_odd_mode0,
    steklov_mode,
    steklov_spectrum_J,
)
from catenoid_index.sturm_liouville import BoundaryCondition, assemble, mode_problem


@pytest.fixture(scope="module")
def g1025(p):
    return Grid1D.uniform(Chart.S, 1025, p)


# --- Morse index -------------------------------------------------------------------


@pytest.mark.parametrize("n", [513, 1025, 2049])
def test_index_stable_under_refinement(n, p):
    r = morse_index(10, Grid1D.uniform(Chart.S, n, p), p)
    assert r.per_mode_negative[:3] == (2, 1, 0)
    assert r.total_index == 4
    assert r.converged


def test_index_independent_of_max_mode(p):
    g = Grid1D.uniform(Chart.S, 513, p)
    small, large = morse_index(2, g, p), morse_index(20, g, p)
    assert small.total_index == large.total_index == 4
    assert all(c == 0 for c in large.per_mode_negative[2:])


def test_index_phi_chart(p):
    r = morse_index(5, Grid1D.uniform(Chart.PHI, 1025, p), p)
    assert r.total_index == 4


def test_translation_kernel_is_near_zero(g1025, p):
    r = morse_index(5, g1025, p)
    assert r.per_mode_near_zero[1] == 1


def test_dirichlet_variant_has_no_negatives(g1025, p):
    r = morse_index(10, g1025, p, BoundaryCondition.DIRICHLET)
    assert r.total_index == 0
    # xi spans the Dirichlet kernel in mode 0
    assert r.per_mode_near_zero[0] == 1


def test_index_rejects_bad_input(g1025, p):
    with pytest.raises(ValueError):
        morse_index(1, g1025, p)
    with pytest.raises(ValueError):
        morse_index(5, g1025, p, BoundaryCondition.STEKLOV)


def test_index_report_dict(g1025, p):
    d = morse_index(3, g1025, p).as_dict()
    assert d["per_mode"] == [2, 1, 0, 0]
    assert d["total"] == 4 and d["grid_size"] == 1025 and d["max_mode"] == 3
    assert len(d["refinements"]) == 3


def test_threads_give_identical_results(monkeypatch, p):
    g = Grid1D.uniform(Chart.S, 513, p)
    monkeypatch.setenv("THREADS", "1")
    serial = morse_index(8, g, p)
    monkeypatch.setenv("THREADS", "4")
    threaded = morse_index(8, g, p)
    assert serial == threaded


# --- Steklov ------------------------------------------------------------------------


def _kernel_steklov(n, T):
    """Steklov eigenvalues T f'(T)/f(T) from the closed-form mode-n kernels."""
    k = lambda s: np.exp(n * s) * (np.tanh(s) - n)
    dk = lambda s: np.exp(n * s) * (n * (np.tanh(s) - n) + 1 / np.cosh(s) ** 2)
    even = T * (dk(T) - dk(-T)) / (k(T) + k(-T))
    odd = T * (dk(T) + dk(-T)) / (k(T) - k(-T))
    return even, odd


# frozen from _kernel_steklov at the critical T
STEKLOV_EXACT = {
    2: (2.0, 2.174448646049982),
    3: (3.420873631114144, 3.439228839890644),
    4: (4.6821140400689725, 4.684063984318642),
}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_steklov_higher_modes(n, g1025, p):
    assert _kernel_steklov(n, p.T) == pytest.approx(STEKLOV_EXACT[n], rel=1e-13)
    sm = steklov_mode(n, g1025, p)
    assert (sm.even, sm.odd) == pytest.approx(STEKLOV_EXACT[n], rel=5e-5)
    assert min(sm.eigenvalues) > 1.0


def test_steklov_low_modes(g1025, p):
    sm0, sm1 = steklov_spectrum_J(1, g1025, p)
    assert sm0.even is None and sm0.singular_even_channel
    assert sm0.odd == pytest.approx(1 / p.sinhT**2, abs=1e-4)
    assert 1 / p.sinhT**2 == pytest.approx(0.43923, abs=1e-5)
    assert sm1.eigenvalues == pytest.approx([-1.0, 1.0], abs=1e-4)
    assert not (sm1.singular_even_channel or sm1.singular_odd_channel)


def test_steklov_second_order_convergence(p):
    errs = []
    for n in (257, 513, 1025):
        sm = steklov_mode(0, Grid1D.uniform(Chart.S, n, p), p)
        errs.append(abs(sm.odd - 1 / p.sinhT**2))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.8 < o < 2.2 for o in orders)


def test_steklov_eigenvector_matches_vz(g1025, p):
    lam, v = steklov_eigenvector_odd_mode0(g1025, p)
    assert lam == pytest.approx(1 / p.sinhT**2, abs=1e-4)
    t = np.tanh(g1025.nodes)
    corr = abs(v @ t) / (np.linalg.norm(v) * np.linalg.norm(t))
    assert corr >= 0.999


@pytest.mark.parametrize("N", [9, 10, 33, 64])
@pytest.mark.parametrize("bc", [BoundaryCondition.ROBIN, BoundaryCondition.DIRICHLET])
def test_split_parity_spectrum(N, bc, p):
    g = Grid1D.uniform(Chart.S, N + (2 if bc is BoundaryCondition.DIRICHLET else 0), p)
    P = assemble(mode_problem(1, Chart.S, bc, p), g, p)
    full = scipy.linalg.eigh(P.A.to_dense(), P.B.to_dense(), eigvals_only=True)
    halves = [
        scipy.linalg.eigh(h.A.to_dense(), h.B.to_dense(), eigvals_only=True) for h in split_parity(P)
    ]
    assert np.sort(np.concatenate(halves)) == pytest.approx(full, rel=1e-9, abs=1e-9)


def test_sigma1_of_laplacian(g1025, p):
    r = sigma1_laplacian(g1025, p, max_mode=10)
    assert r.value == pytest.approx(1.0, abs=1e-4)
    assert 1 in r.attaining_modes
    assert 0 in r.attaining_modes


def test_sigma1_converges(p):
    vals = [sigma1_laplacian(Grid1D.uniform(Chart.S, n, p), p, 4).value for n in (257, 513, 1025)]
    errs = [abs(v - 1.0) for v in vals]
    assert errs[2] < errs[1] < errs[0] or errs[2] < 1e-10


# --- Dirichlet problem -------------------------------------------------------------


def _exact_profile(n, plus, minus, s, p):
    if n == 0:
        return plus * np.tanh(s) / np.tanh(p.T)
    if n == 1:
        lam = lambda x: p.a * (x / np.cosh(x) + np.sinh(x))
        even = 0.5 * (plus + minus) * np.cosh(p.T) / np.cosh(s)
        return even + 0.5 * (plus - minus) * lam(s) / lam(p.T)
    k = lambda x: np.exp(n * x) * (np.tanh(x) - n)
    M = np.array([[k(p.T), k(-p.T)], [k(-p.T), k(p.T)]])
    c = np.linalg.solve(M, [plus, minus])
    return c[0] * k(s) + c[1] * k(-s)


@pytest.mark.parametrize("n,plus,minus", [(0, 1.0, -1.0), (1, 0.3, 0.7), (2, -0.5, 1.2), (3, 1.0, 1.0)])
def test_dirichlet_profiles(n, plus, minus, g1025, p):
    kind = "cos" if n == 0 else "sin"
    sol = solve_dirichlet([BoundaryMode(n, kind, plus, minus)], g1025, p)
    f = sol.solution[(n, kind)]
    assert f[-1] == pytest.approx(plus, abs=1e-12)
    assert f[0] == pytest.approx(minus, abs=1e-12)
    exact = _exact_profile(n, plus, minus, g1025.nodes, p)
    assert np.max(np.abs(f - exact)) <= 1e-5
    assert abs(sol.flux) <= 1e-5


def test_dirichlet_evaluate_and_merge(g1025, p):
    data = [BoundaryMode(1, "cos", 0.2, 0.0), BoundaryMode(1, "cos", 0.3, 0.1), BoundaryMode(2, "sin", 1.0, 0.0)]
    sol = solve_dirichlet(data, g1025, p)
    assert sol.trace()[(1, "cos")] == pytest.approx((0.5, 0.1))
    u = sol.evaluate(np.array([0.0, np.pi / 4]))
    assert u.shape == (1025, 2)
    assert u[-1] == pytest.approx([0.5, 0.5 * math.cos(math.pi / 4) + 1.0])


def test_dirichlet_nonzero_mean_not_solvable(g1025, p):
    with pytest.raises(NotSolvableError):
        solve_dirichlet([BoundaryMode(0, "cos", 1.0, 1.0)], g1025, p)


@pytest.mark.parametrize("bad", [BoundaryMode(0, "sin", 1.0, 0.0), BoundaryMode(1, "tan", 1.0, 0.0), BoundaryMode(-1, "cos", 1.0, 0.0)])
def test_dirichlet_rejects_bad_modes(bad, g1025, p):
    with pytest.raises(ValueError):
        solve_dirichlet([bad], g1025, p)


def test_read_boundary_csv(tmp_path):
    f = tmp_path / "b.csv"
    f.write_text("mode,cos_or_sin,value_at_plusT,value_at_minusT\n0,cos,1,-1\n\n2, SIN ,0.5,0.25\n")
    assert read_boundary_csv(f) == [BoundaryMode(0, "cos", 1.0, -1.0), BoundaryMode(2, "sin", 0.5, 0.25)]


@pytest.mark.parametrize("text", ["", "h\n1,cos,1\n", "h\nx,cos,1,1\n", "h\n1,cos,1,one\n"])
def test_read_boundary_csv_errors(text, tmp_path):
    f = tmp_path / "b.csv"
    f.write_text(text)
    with pytest.raises(ValueError):
        read_boundary_csv(f)


# --- flat disk -----------------------------------------------------------------------


def test_disk_index_is_one():
    r = disk_index(257, 5)
    assert r.total_index == 1
    assert r.per_mode_near_zero[1] == 1
    assert r.converged


def test_disk_robin_ground_state():
    # mode-0 Robin ground state: -J0-type root of sqrt(-mu) I1 = I0 with mu < 0
    from scipy.optimize import brentq
    from scipy.special import i0, i1

    k = brentq(lambda k: k * i1(k) - i0(k), 0.5, 3.0)
    mu = disk_eigenvalues(0, 1025, 1)[0]
    assert mu == pytest.approx(-k * k, rel=1e-4)


# --- complement positivity -------------------------------------------------------------


def test_complement_positive():
    from catenoid_index.geometry import critical_params

    r = complement_positivity_check(200, critical_params())
    assert r.n_samples == 200
    assert r.passed
    assert r.min_ratio > 0


def test_complement_deterministic(p):
    a = complement_positivity_check(5, p, seed=7)
    b = complement_positivity_check(5, p, seed=7)
    c = complement_positivity_check(5, p, seed=8)
    assert a.q_values == b.q_values
    assert a.q_values != c.q_values


def test_complement_rejects_degenerate_basis(monkeypatch, p):
    monkeypatch.setattr(ie, "W_BASIS", (FieldKind.CONST_ONE, FieldKind.VX, FieldKind.VY, FieldKind.XI))
    with pytest.raises(GramSingularError):
        complement_positivity_check(1, p)
    with pytest.raises(ValueError):
        complement_positivity_check(0, p)
