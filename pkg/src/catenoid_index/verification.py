"""Acceptance checks shared by ``catenoid-index verify`` and the test suite.

Each ``criterion_*`` function returns a list of :class:`Check` records; a
record carries the measured value, what it was compared against, and the
tolerance, so a failure can be reported without rerunning anything.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NotSolvableError
from .fields import FieldKind, closed_form_field, rotation_profile
from .geometry import Chart, Grid1D, critical_params, solve_critical_T
from .index_engine import (
    BoundaryMode,
    complement_positivity_check,
    disk_eigenvalues,
    disk_index,
    disk_threshold,
    lower_bound_certificate,
    morse_index,
    robin_eigenvalues,
    sigma1_laplacian,
    solve_dirichlet,
    steklov_mode,
    w_gram,
    zero_threshold,
    count_negative_and_zero,
)
from .linalg_core import TriMatrix, ldlt_inertia, pencil_eigs, pencil_eigvec
from .quadratic_forms import form_grid, mode_bilinear
from .sturm_liouville import (
    BoundaryCondition,
    assemble,
    ground_state_certificate,
    legendre_substitution_check,
    mode_problem,
)


@dataclass(frozen=True)
class VerifyConfig:
    grid_n: int = 1024
    modes: int = 10
    tol: float = 1e-4
    seed: int = 0
    n_samples: int = 200


@dataclass
class Check:
    criterion: str
    name: str
    passed: bool
    actual: float
    expected: float
    tolerance: float
    converged: bool = True
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)
    # wall-clock measurements are left out of documents so reruns are byte-identical
    timing: bool = False

    def as_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "name": self.name,
            "passed": bool(self.passed),
            "actual": None if self.timing else float(self.actual),
            "expected": float(self.expected),
            "tolerance": float(self.tolerance),
            "converged": bool(self.converged),
            "detail": self.detail,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"{flag} [{self.criterion}] {self.name}: actual={self.actual:.6e} "
            f"expected={self.expected:.6e} tol={self.tolerance:.1e}"
        )


def _within(name, crit, actual, expected, tol, **kw) -> Check:
    return Check(crit, name, bool(abs(actual - expected) <= tol), float(actual), float(expected), tol, **kw)


def _order(errors, spacings) -> list[float]:
    return [
        math.log(errors[i] / errors[i + 1]) / math.log(spacings[i] / spacings[i + 1]) for i in range(len(errors) - 1)
    ]


# --- criteria ---------------------------------------------------------------------


def criterion_1(cfg: VerifyConfig) -> list[Check]:
    solve_critical_T()
    t0 = time.perf_counter()
    p = solve_critical_T()
    elapsed = time.perf_counter() - t0
    T = p.T
    return [
        _within("T tanh T = 1", "1", T * math.tanh(T), 1.0, 1e-12),
        _within("a T cosh T = 1", "1", p.a * T * math.cosh(T), 1.0, 1e-12),
        _within("tan(phi*/2) = exp(-T)", "1", math.tan(0.5 * p.phi_star), math.exp(-T), 1e-12),
        Check("1", "critical-T runtime (s)", elapsed < 1e-3, elapsed, 0.0, 1e-3, timing=True),
    ]


def _steklov_targets(grid, p):
    m0 = steklov_mode(0, grid, p)
    m1 = steklov_mode(1, grid, p)
    return np.array([m1.even, m1.odd, m0.odd]), m0.singular_even_channel


def steklov_convergence(cfg: VerifyConfig) -> Check:
    """Richardson estimate of the Steklov discretization error at ``grid_n``."""
    p = critical_params()
    g = Grid1D.uniform(Chart.S, cfg.grid_n, p)
    coarse, _ = _steklov_targets(g, p)
    fine, _ = _steklov_targets(g.refined(p), p)
    est = float(np.max(np.abs(coarse - fine)) * 4.0 / 3.0)
    ok = est <= cfg.tol
    return Check("conv", "Steklov Richardson error estimate", ok, est, 0.0, cfg.tol, converged=ok)


def criterion_2(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    t0 = time.perf_counter()
    exact = np.array([-1.0, 1.0, 1.0 / p.sinhT**2])
    sizes = (cfg.grid_n // 2, cfg.grid_n, 2 * cfg.grid_n)
    errs, spac, flags = [], [], []
    for n in sizes:
        g = Grid1D.uniform(Chart.S, n, p)
        vals, flag = _steklov_targets(g, p)
        errs.append(np.abs(vals - exact))
        spac.append(g.spacing)
        flags.append(flag)
        if n == cfg.grid_n:
            at_n = vals
    elapsed = time.perf_counter() - t0
    errs = np.array(errs)
    orders = np.array([_order(errs[:, j], spac) for j in range(3)])
    worst = float(np.max(np.abs(orders - 2.0)))
    return [
        _within("mode-1 Steklov eigenvalue -1", "2", at_n[0], -1.0, cfg.tol),
        _within("mode-1 Steklov eigenvalue +1", "2", at_n[1], 1.0, cfg.tol),
        _within("mode-0 finite Steklov eigenvalue 1/sinh^2 T", "2", at_n[2], exact[2], cfg.tol),
        Check("2", "mode-0 even channel flagged singular", all(flags), float(all(flags)), 1.0, 0.0),
        Check(
            "2",
            "observed convergence order (worst deviation from 2)",
            worst <= 0.3,
            2.0 + worst,
            2.0,
            0.3,
            detail={"orders": orders.tolist()},
        ),
        Check("2", "Steklov runtime (s)", elapsed < 1.0, elapsed, 0.0, 1.0, timing=True),
    ]


def xi_nodes(s):
    return 1.0 - s * np.tanh(s)


def criterion_3(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    g = Grid1D.uniform(Chart.S, cfg.grid_n, p)
    thr = zero_threshold(g, p)
    P0 = assemble(mode_problem(0, Chart.S, BoundaryCondition.DIRICHLET, p), g, p)
    lam = float(pencil_eigs(P0, 1, 1e-13)[0])
    v = pencil_eigvec(P0, lam)
    xi = xi_nodes(g.nodes[1:-1])
    corr = abs(v @ xi) / (np.linalg.norm(v) * np.linalg.norm(xi))
    negatives = [
        count_negative_and_zero(assemble(mode_problem(n, Chart.S, BoundaryCondition.DIRICHLET, p), g, p), thr)[0]
        for n in range(max(cfg.modes, 10) + 1)
    ]
    return [
        Check("3", "mode-0 Dirichlet lambda_1 inside zero band", abs(lam) <= thr, lam, 0.0, thr),
        Check("3", "eigenfunction correlation with xi", corr >= 0.9999, corr, 1.0, 1e-4),
        Check(
            "3",
            "negative Dirichlet eigenvalues in modes 0..10",
            sum(negatives) == 0,
            float(sum(negatives)),
            0.0,
            0.0,
            detail={"per_mode": negatives},
        ),
    ]


def criterion_4(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    g = Grid1D.uniform(Chart.S, cfg.grid_n, p)
    t0 = time.perf_counter()
    out = []
    for mm in sorted({5, 10, 20, cfg.modes}):
        r = morse_index(mm, g, p)
        expected = [2, 1] + [0] * (mm - 1)
        ok = list(r.per_mode_negative) == expected and r.total_index == 4
        out.append(
            Check(
                "4",
                f"Robin index with max_mode={mm}",
                ok and r.converged,
                r.total_index,
                4,
                0.0,
                converged=r.converged,
                detail={"per_mode": list(r.per_mode_negative), "refinements": [list(c) for c in r.refinement_counts]},
            )
        )
    elapsed = time.perf_counter() - t0
    out.append(Check("4", "Morse index runtime (s)", elapsed < 5.0, elapsed, 0.0, 5.0, timing=True))
    return out


def criterion_5(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    g = Grid1D.uniform(Chart.S, cfg.grid_n, p)
    lam2 = float(robin_eigenvalues(2, g, p, 1)[0])
    gp = Grid1D.uniform(Chart.PHI, cfg.grid_n, p)
    cert = ground_state_certificate(2, gp, 1.0 / np.sin(gp.nodes) ** 2, p)
    return [
        Check("5", "lowest mode-2 Robin eigenvalue (margin)", lam2 > 0.0, lam2, 0.0, 0.0),
        Check("5", "ground-state certificate interior", cert.interior_min >= -cert.tol_interior, cert.interior_min, 0.0, cert.tol_interior),
        _within("certificate left margin = 1/T", "5", cert.left_margin, 1.0 / p.T, 1e-6),
        _within("certificate right margin = 1/T", "5", cert.right_margin, 1.0 / p.T, 1e-6),
    ]


def criterion_6(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    r1 = legendre_substitution_check(1024, p)
    a = legendre_substitution_check(1025, p)
    b = legendre_substitution_check(2049, p)
    order = math.log2(a.relative / b.relative)
    return [
        Check("6", "Legendre relative residual at 1024 nodes", r1.relative <= 1e-4, r1.relative, 0.0, 1e-4),
        _within("Legendre residual halving order", "6", order, 2.0, 0.2),
    ]


def criterion_7(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    r = w_gram(p)
    G = r.matrix
    scale = float(np.max(np.abs(np.diag(G))))
    q1 = G[0, 0]
    exact = -12.0 * math.pi / p.T
    return [
        Check("7", "Q-Gram inertia on W is (4,0,0)", r.inertia.as_tuple() == (4, 0, 0), r.inertia.n_neg, 4, 0.0),
        Check("7", "max off-diagonal / diagonal scale", r.max_offdiag_abs <= 1e-5 * scale, r.max_offdiag_abs / scale, 0.0, 1e-5),
        _within("Q(1) relative to -12 pi/T", "7", q1 / exact, 1.0, 1e-5),
    ]


def dirichlet_exact_profile(n: int, plus: float, minus: float, s, p):
    """Closed-form mode-``n`` Jacobi profile with values ``plus``/``minus`` at ``s = +-T``."""
    s = np.asarray(s, float)
    if n == 0:
        return 0.5 * (plus - minus) * np.tanh(s) / math.tanh(p.T)
    if n == 1:
        even, odd = 1.0 / np.cosh(s), rotation_profile(s, p)
        e_T, o_T = 1.0 / p.coshT, 1.0
    else:
        # e^{ns}(tanh s - n) and its reflection span the mode-n kernel
        f1 = np.exp(n * s) * (np.tanh(s) - n)
        f2 = np.exp(-n * s) * (-np.tanh(s) - n)
        even, odd = f1 + f2, f1 - f2
        fT = math.exp(n * p.T) * (math.tanh(p.T) - n)
        gT = math.exp(-n * p.T) * (-math.tanh(p.T) - n)
        e_T, o_T = fT + gT, fT - gT
    return 0.5 * (plus + minus) * even / e_T + 0.5 * (plus - minus) * odd / o_T


SAMPLE_DATA = (
    BoundaryMode(0, "cos", 1.0, -1.0),
    BoundaryMode(1, "cos", 1.0, 1.0),
    BoundaryMode(2, "sin", 0.5, -0.25),
)


def criterion_8(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    g = Grid1D.uniform(Chart.S, cfg.grid_n, p)
    try:
        solve_dirichlet([BoundaryMode(0, "cos", 1.0, 1.0)], g, p)
        rejected = False
    except NotSolvableError:
        rejected = True
    errs, spac, flux = [], [], 0.0
    trace_err = 0.0
    for gg in (g, g.refined(p)):
        sol = solve_dirichlet(SAMPLE_DATA, gg, p)
        flux = max(flux, abs(sol.flux))
        e = 0.0
        for bm in SAMPLE_DATA:
            f = sol.solution[(bm.mode, bm.kind)]
            e = max(e, float(np.max(np.abs(f - dirichlet_exact_profile(bm.mode, bm.plus, bm.minus, gg.nodes, p)))))
            trace_err = max(trace_err, abs(f[-1] - bm.plus), abs(f[0] - bm.minus))
        errs.append(e)
        spac.append(gg.spacing)
    order = _order(errs, spac)[0]
    return [
        Check("8", "constant data rejected as NOT_SOLVABLE", rejected, float(rejected), 1.0, 0.0),
        Check("8", "flux of mean-zero solution", flux <= 1e-8, flux, 0.0, 1e-8),
        Check("8", "boundary trace error", trace_err <= 1e-12, trace_err, 0.0, 1e-12),
        _within("solution error order", "8", order, 2.0, 0.3, detail={"errors": errs}),
    ]


def criterion_9(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    cert = lower_bound_certificate(p)
    index = morse_index(cfg.modes, Grid1D.uniform(Chart.S, cfg.grid_n, p), p, refinements=0).total_index
    return [
        Check("9", "S-Gram on V has no positive eigenvalue", cert.s_gram.inertia.n_pos == 0, cert.s_gram.inertia.n_pos, 0, 0.0),
        Check("9", "span of V has dimension 4", cert.s_gram.l2_rank == 4, cert.s_gram.l2_rank, 4, 0.0),
        Check("9", "strict gaps Q < S on V", all(gp.positive for gp in cert.gaps), min(gp.gap for gp in cert.gaps), 0.0, 0.0),
        Check(
            "9",
            "lower bound consistent with Robin index",
            cert.index_lower_bound == 4 and index >= cert.index_lower_bound,
            cert.index_lower_bound,
            4,
            0.0,
        ),
    ]


def criterion_10(cfg: VerifyConfig) -> list[Check]:
    nn = cfg.grid_n + 1
    r = disk_index(nn, cfg.modes)
    lam1 = float(disk_eigenvalues(1, nn, 1)[0])
    thr = disk_threshold(nn)
    return [
        Check("10", "disk index", r.total_index == 1 and r.converged, r.total_index, 1, 0.0, converged=r.converged),
        Check("10", "disk mode-1 Robin eigenvalue inside zero band", abs(lam1) <= thr, lam1, 0.0, thr),
    ]


def criterion_11(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    r = sigma1_laplacian(Grid1D.uniform(Chart.S, cfg.grid_n, p), p, cfg.modes)
    return [
        _within(
            "sigma_1 of the Laplacian",
            "11",
            r.value,
            1.0,
            1e-3,
            detail={"mode": r.mode, "attaining_modes": list(r.attaining_modes)},
        )
    ]


def _test_function(s, th):
    return 0.7 + 0.3 * s + np.cos(th) * (1.0 + 0.2 * s * s) + 0.4 * s * np.sin(th) + 0.25 * np.cos(2 * th)


def criterion_12(cfg: VerifyConfig) -> list[Check]:
    p = critical_params()
    fg = form_grid(512, 512, p)
    out = []
    worst = 0.0
    for k in (FieldKind.VX, FieldKind.VY, FieldKind.VZ):
        u = fg.sample(closed_form_field(k, p))
        worst = max(worst, abs(fg.q(u) / (-2.0 * fg.l2(u, u)) - 1.0))
    out.append(Check("12", "Q(v_perp) = -2 int v_perp^2 (relative)", worst <= 1e-6, worst, 0.0, 1e-6))

    worst = 0.0
    v = fg.sample(_test_function)
    for k in (FieldKind.VX, FieldKind.VY, FieldKind.VZ, FieldKind.ROT_XZ, FieldKind.ROT_YZ):
        field_ = closed_form_field(k, p)
        u = fg.sample(field_)
        lhs = fg.q(u, v)
        rhs = (field_.steklov_eigenvalue - 1.0) * fg.boundary(u, v)
        denom = abs(rhs) if rhs != 0.0 and abs(rhs) > 1e-12 else math.sqrt(fg.energy(u) * fg.energy(v))
        worst = max(worst, abs(lhs - rhs) / denom)
    out.append(Check("12", "Green/Steklov identity (relative)", worst <= 1e-5, worst, 0.0, 1e-5))

    out.append(mode_split_check(cfg.seed))
    out.append(linalg_oracle_check(cfg.seed))
    return out


def mode_split_check(seed: int = 0, n_s: int = 512, n_theta: int = 64) -> Check:
    """Q of a random theta-degree-5 function against the sum of its per-mode forms."""
    p = critical_params()
    fg = form_grid(n_s, n_theta, p)
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((6, 4))
    S = rng.standard_normal((6, 4))
    x = fg.s / p.T

    def prof(c):
        return np.polynomial.legendre.legval(x, c)

    def u(s, th):
        xs = s / p.T
        out = np.zeros_like(s * th)
        for n in range(6):
            out = out + np.polynomial.legendre.legval(xs, C[n]) * np.cos(n * th)
            if n:
                out = out + np.polynomial.legendre.legval(xs, S[n]) * np.sin(n * th)
        return out

    total = fg.q(u)
    split = 2.0 * math.pi * mode_bilinear(prof(C[0]), prof(C[0]), 0, fg.s, p)
    for n in range(1, 6):
        split += math.pi * (mode_bilinear(prof(C[n]), prof(C[n]), n, fg.s, p) + mode_bilinear(prof(S[n]), prof(S[n]), n, fg.s, p))
    rel = abs(total - split) / abs(total)
    return Check("12", "mode split of Q (relative)", rel <= 1e-8, rel, 0.0, 1e-8)


def linalg_oracle_check(seed: int = 0, trials: int = 300) -> Check:
    """LDL^T inertia against dense eigenvalue signs on small random tridiagonals."""
    rng = np.random.default_rng(seed)
    mismatches = 0
    done = 0
    while done < trials:
        n = int(rng.integers(1, 9))
        M = TriMatrix(rng.integers(-4, 5, n).astype(float), rng.integers(-3, 4, n - 1).astype(float))
        ev = np.linalg.eigvalsh(M.to_dense())
        if np.min(np.abs(ev)) < 1e-6 and np.min(np.abs(ev)) > 1e-12:
            continue
        done += 1
        expect = (int(np.sum(ev < -1e-9)), int(np.sum(np.abs(ev) <= 1e-9)), int(np.sum(ev > 1e-9)))
        if ldlt_inertia(M).as_tuple() != expect:
            mismatches += 1
    return Check("12", "LDL^T inertia vs brute force (n <= 8)", mismatches == 0, mismatches, 0, 0.0)


def complement_check(cfg: VerifyConfig) -> Check:
    p = critical_params()
    r = complement_positivity_check(cfg.n_samples, p, cfg.seed)
    return Check(
        "extra",
        f"Q >= 0 on the Q-complement of W ({cfg.n_samples} samples, min Q/||u||^2)",
        r.passed,
        r.min_ratio,
        0.0,
        r.tol_ratio,
    )


CRITERIA: dict[str, Callable[[VerifyConfig], list[Check]]] = {
    "1": criterion_1,
    "2": criterion_2,
    "3": criterion_3,
    "4": criterion_4,
    "5": criterion_5,
    "6": criterion_6,
    "7": criterion_7,
    "8": criterion_8,
    "9": criterion_9,
    "10": criterion_10,
    "11": criterion_11,
    "12": criterion_12,
}


@dataclass
class VerifyResult:
    checks: list[Check]
    seconds: float

    @property
    def converged(self) -> bool:
        return all(c.converged for c in self.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def exit_code(self) -> int:
        if not self.converged:
            return 3
        return 0 if self.passed else 1


def run_all(cfg: VerifyConfig) -> VerifyResult:
    t0 = time.perf_counter()
    checks = [steklov_convergence(cfg)]
    for fn in CRITERIA.values():
        start = time.perf_counter()
        for c in fn(cfg):
            c.seconds = time.perf_counter() - start
            checks.append(c)
    checks.append(complement_check(cfg))
    elapsed = time.perf_counter() - t0
    checks.append(Check("12", "full verify wall time (s)", elapsed <= 60.0, elapsed, 0.0, 60.0, timing=True))
    return VerifyResult(checks, elapsed)
