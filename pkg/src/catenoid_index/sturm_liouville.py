"""Per-Fourier-mode Sturm-Liouville problems for the Jacobi operator.

For ``u = f(x) cos(n theta)`` the second variation reduces to the 1D form::

    q(f) = int (m f'^2 + m V f^2) dx - alpha (f(x_0)^2 + f(x_1)^2)

with ``alpha = 1/T`` in both charts:

=======  ============  ========================  =================  =============
chart    m (leading)   V (potential)             w (L2 density)     robin coeff
=======  ============  ========================  =================  =============
s        1             n^2 - 2 sech^2 s          a^2 cosh^2 s       1/T
phi      sin(phi)      n^2 / sin^2 phi - 2       a^2 / sin^3 phi    cosh(T)/T
=======  ============  ========================  =================  =============

The phi-chart Robin coefficient multiplies the boundary measure
``m(phi*) = sech T``. Dropping the ``-2`` (resp. ``-2 sech^2``) term gives
the Laplacian instead of the Jacobi operator.

Assembly is quadratic-form consistent: ``f^T A f`` is exactly the
discretization of ``q(f)`` with the derivative term on cells (midpoint
coefficient) and the potential term by the trapezoid rule, so inertia counts
of the pencil are Morse-index counts of the discretized form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._stencils import derivative
from .errors import ChartMismatchError, NonpositiveHError
from .geometry import Chart, CriticalParams, Grid1D, chart_interval
from .linalg_core import BKind, TriMatrix, TriPencil


class BoundaryCondition(enum.Enum):
    DIRICHLET = "dirichlet"
    ROBIN = "robin"
    STEKLOV = "steklov"


@dataclass(frozen=True)
class ModeProblem:
    n: int
    chart: Chart
    potential: Callable
    weight: Callable
    leading_coeff: Callable
    bc: BoundaryCondition
    robin_coeff: float
    laplacian: bool = False


def mode_problem(
    n: int,
    chart: Chart,
    bc: BoundaryCondition,
    p: CriticalParams,
    laplacian: bool = False,
) -> ModeProblem:
    if n < 0:
        raise ValueError("mode index must be nonnegative")
    curv = 0.0 if laplacian else 2.0
    n2 = float(n * n)
    a2 = p.a**2
    if chart is Chart.S:
        return ModeProblem(
            n=n,
            chart=chart,
            potential=lambda s: n2 - curv / np.cosh(s) ** 2,
            weight=lambda s: a2 * np.cosh(s) ** 2,
            leading_coeff=lambda s: np.ones_like(np.asarray(s, dtype=float)),
            bc=bc,
            robin_coeff=1.0 / p.T,
            laplacian=laplacian,
        )
    return ModeProblem(
        n=n,
        chart=chart,
        potential=lambda phi: n2 / np.sin(phi) ** 2 - curv,
        weight=lambda phi: a2 / np.sin(phi) ** 3,
        leading_coeff=np.sin,
        bc=bc,
        robin_coeff=p.coshT / p.T,
        laplacian=laplacian,
    )


def boundary_alpha(mp: ModeProblem, p: CriticalParams) -> float:
    """Boundary-term coefficient of the 1D form (``1/T`` for both charts)."""
    lo, _ = chart_interval(mp.chart, p)
    return float(mp.robin_coeff * mp.leading_coeff(lo))


def _check_chart(mp: ModeProblem, grid: Grid1D) -> None:
    if mp.chart is not grid.chart:
        raise ChartMismatchError(f"mode problem on {mp.chart.value}-chart, grid on {grid.chart.value}-chart")


def assemble(mp: ModeProblem, grid: Grid1D, p: CriticalParams) -> TriPencil:
    """Tridiagonal pencil ``(A, B)`` for one Fourier mode.

    DIRICHLET drops the two end nodes, ROBIN subtracts the boundary term from
    the end diagonal entries, STEKLOV keeps natural end rows and puts the
    boundary measure in a boundary-supported ``B``.
    """
    _check_chart(mp, grid)
    x, h = grid.nodes, grid.spacing
    m_mid = mp.leading_coeff(0.5 * (x[:-1] + x[1:])) / h
    wts = grid.trapezoid_weights()
    m_nodes = mp.leading_coeff(x)

    diag = wts * m_nodes * mp.potential(x)
    diag[:-1] += m_mid
    diag[1:] += m_mid
    off = -m_mid
    bdiag = wts * mp.weight(x)

    if mp.bc is BoundaryCondition.DIRICHLET:
        return TriPencil(TriMatrix(diag[1:-1], off[1:-1]), TriMatrix(bdiag[1:-1], np.zeros(x.size - 3)))
    alpha_lo = mp.robin_coeff * m_nodes[0]
    alpha_hi = mp.robin_coeff * m_nodes[-1]
    if mp.bc is BoundaryCondition.ROBIN:
        diag[0] -= alpha_lo
        diag[-1] -= alpha_hi
        return TriPencil(TriMatrix(diag, off), TriMatrix(bdiag, np.zeros(x.size - 1)))
    bsteklov = np.zeros(x.size)
    bsteklov[0], bsteklov[-1] = alpha_lo, alpha_hi
    return TriPencil(
        TriMatrix(diag, off),
        TriMatrix(bsteklov, np.zeros(x.size - 1)),
        BKind.BOUNDARY_SEMIDEF,
        (0, x.size - 1),
    )


def discrete_form(mp: ModeProblem, grid: Grid1D, f, p: CriticalParams) -> float:
    """The discretized 1D form evaluated directly on nodal values ``f``.

    Includes the boundary term regardless of ``mp.bc``.
    """
    _check_chart(mp, grid)
    f = np.asarray(f, dtype=float)
    x, h = grid.nodes, grid.spacing
    mid = 0.5 * (x[:-1] + x[1:])
    kinetic = np.sum(mp.leading_coeff(mid) * np.diff(f) ** 2) / h
    potential = np.sum(grid.trapezoid_weights() * mp.leading_coeff(x) * mp.potential(x) * f**2)
    return float(kinetic + potential - boundary_alpha(mp, p) * (f[0] ** 2 + f[-1] ** 2))


def qn_value(n: int, f, grid: Grid1D, p: CriticalParams) -> float:
    """Mode form ``Q_n`` on a phi-chart grid: half the bracketed 1D form.

    ``Q(f(phi) cos(n theta)) = 2 pi * Q_n(f)`` for ``n >= 1``.
    """
    if grid.chart is not Chart.PHI:
        raise ChartMismatchError("qn_value needs a phi-chart grid")
    mp = mode_problem(n, Chart.PHI, BoundaryCondition.ROBIN, p)
    return 0.5 * discrete_form(mp, grid, f, p)


@dataclass(frozen=True)
class CertificateResult:
    passed: bool
    interior_min: float
    left_margin: float
    right_margin: float
    tol_interior: float


def ground_state_certificate(
    n: int,
    grid: Grid1D,
    h,
    p: CriticalParams,
    rel_tol_interior: float = 1e-8,
) -> CertificateResult:
    """Check the hypotheses of the ground-state positivity criterion for mode ``n``.

    For the 1D form ``int (f'^2 + V f^2) m - alpha (f(a)^2 + f(b)^2)`` and a
    positive ``h`` given at the grid nodes:

    (i)   ``-(m h')'/m + V h >= -tol`` at interior nodes,
    (ii)  ``-m(a) (log h)'(a) - alpha > 0``,
    (iii) ``m(b) (log h)'(b) - alpha > 0``.

    All derivatives use 7-point stencils (shifted at the ends). The reported
    margins are the left-hand sides of (ii) and (iii).
    """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0.0):
        raise NonpositiveHError("ground-state candidate must be positive at every node")
    mp = mode_problem(n, grid.chart, BoundaryCondition.ROBIN, p)
    x, dx = grid.nodes, grid.spacing
    m = mp.leading_coeff(x)
    flux = m * derivative(h, dx)
    div = derivative(flux, dx) / m
    vh = mp.potential(x) * h
    residual = (-div + vh)[1:-1]
    scale = float(np.max(np.abs(div[1:-1])) + np.max(np.abs(vh[1:-1])))
    tol = rel_tol_interior * scale

    dlog = derivative(np.log(h), dx)
    dlog_left, dlog_right = dlog[0], dlog[-1]
    alpha = boundary_alpha(mp, p)
    left = float(-m[0] * dlog_left - alpha)
    right = float(m[-1] * dlog_right - alpha)
    interior_min = float(np.min(residual))
    passed = interior_min >= -tol and left > 0.0 and right > 0.0
    return CertificateResult(passed, interior_min, left, right, tol)


@dataclass(frozen=True)
class LegendreResidual:
    absolute: float
    relative: float
    n_nodes: int


def legendre_substitution_check(n_nodes: int, p: CriticalParams) -> LegendreResidual:
    """Residual of ``a(x) = (1 - x^2)^{-1}`` in the mode-2 equation written in ``x = cos(phi)``.

    The operator ``-((1 - x^2) a')' + (4/(1 - x^2) - 2) a`` is discretized in
    flux form with central differences on ``[-1/T, 1/T]``. ``relative`` divides
    the sup residual by the larger sup of the two operator terms.
    """
    if n_nodes < 3:
        raise ValueError("need at least 3 nodes")
    x = np.linspace(-1.0 / p.T, 1.0 / p.T, n_nodes)
    dx = x[1] - x[0]
    a = 1.0 / (1.0 - x**2)
    mid = 0.5 * (x[:-1] + x[1:])
    flux = (1.0 - mid**2) * np.diff(a) / dx
    div = -np.diff(flux) / dx
    pot = (4.0 / (1.0 - x[1:-1] ** 2) - 2.0) * a[1:-1]
    res = float(np.max(np.abs(div + pot)))
    scale = max(float(np.max(np.abs(div))), float(np.max(np.abs(pot))))
    return LegendreResidual(res, res / scale, n_nodes)
