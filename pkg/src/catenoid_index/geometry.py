"""Geometry of the critical catenoid in the unit ball.

The surface is parametrized by ``(s, theta)`` with ``s`` in ``[-T, T]``::

    X(s, theta) = a * (cosh s cos theta, cosh s sin theta, s)

where ``T tanh T = 1`` and ``a = 1 / (T cosh T)``. The induced metric is
``a^2 cosh^2 s (ds^2 + dtheta^2)``. The Gauss-map chart uses the colatitude
``phi = 2 arctan(exp(-s))`` in which the conformally rescaled metric is the
round one, ``dphi^2 + sin^2 phi dtheta^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class CriticalParams:
    """Solved constants of the critical catenoid."""

    T: float
    a: float
    phi_star: float
    sinhT: float
    coshT: float

    @property
    def boundary_radius(self) -> float:
        """Radius of each boundary circle, ``a cosh T = 1/T``."""
        return self.a * self.coshT

    @property
    def robin_coeff_s(self) -> float:
        """Coefficient of the boundary term in the ``s`` chart (``1/T``)."""
        return 1.0 / self.T

    @property
    def steklov_vz(self) -> float:
        return 1.0 / self.sinhT**2


def _residual(t: float) -> float:
    return t * math.tanh(t) - 1.0


def solve_critical_T(tol: float = 1e-14) -> CriticalParams:
    """Solve ``T tanh T = 1`` by bisection on ``[1, 2]`` followed by Newton.

    The bracket is valid because the residual is ``tanh(1) - 1 < 0`` at 1 and
    ``2 tanh(2) - 1 > 0`` at 2, and ``T tanh T`` is increasing for ``T > 0``.
    """
    if not (0.0 < tol <= 1e-6):
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol}")
    lo, hi = 1.0, 2.0
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if _residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(50):
        th = math.tanh(t)
        step = (t * th - 1.0) / (th + t * (1.0 - th * th))
        t -= step
        if abs(step) <= tol * 1e-2 and abs(_residual(t)) <= tol:
            break
    cosh_t = math.cosh(t)
    return CriticalParams(
        T=t,
        a=1.0 / (t * cosh_t),
        phi_star=2.0 * math.atan(math.exp(-t)),
        sinhT=math.sinh(t),
        coshT=cosh_t,
    )


_DEFAULT: CriticalParams | None = None


def critical_params() -> CriticalParams:
    """Cached parameters solved at the default tolerance."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = solve_critical_T()
    return _DEFAULT


def second_fundamental_norm_sq(s, p: CriticalParams):
    """``|A|^2 = 2 / (a^2 cosh^4 s)``."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) > p.T + _DOMAIN_SLACK):
        raise DomainError(f"s outside [-T, T] with T={p.T}")
    out = 2.0 / (p.a**2 * np.cosh(s) ** 4)
    return float(out) if out.ndim == 0 else out


class Chart(enum.Enum):
    S = "s"
    PHI = "phi"


def chart_interval(chart: Chart, p: CriticalParams) -> tuple[float, float]:
    if chart is Chart.S:
        return (-p.T, p.T)
    return (p.phi_star, math.pi - p.phi_star)


def s_to_phi(s):
    return 2.0 * np.arctan(np.exp(-np.asarray(s, dtype=float)))


def phi_to_s(phi):
    return -np.log(np.tan(0.5 * np.asarray(phi, dtype=float)))


def chart_convert(x, source: Chart, target: Chart, p: CriticalParams):
    """Map a coordinate (scalar or array) from one chart to another.

    Raises DomainError when ``x`` leaves the source interval by more than
    ``1e-12``.
    """
    lo, hi = chart_interval(source, p)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < lo - _DOMAIN_SLACK) or np.any(arr > hi + _DOMAIN_SLACK):
        raise DomainError(f"{x!r} outside {source.value}-chart interval [{lo}, {hi}]")
    if source is target:
        out = arr.copy()
    elif source is Chart.S:
        out = s_to_phi(arr)
    else:
        out = phi_to_s(arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid over the full profile interval of a chart."""

    chart: Chart
    n_nodes: int
    nodes: np.ndarray
    spacing: float

    @classmethod
    def uniform(cls, chart: Chart, n_nodes: int, p: CriticalParams) -> "Grid1D":
        if n_nodes < 3:
            raise ValueError("a grid needs at least 3 nodes")
        lo, hi = chart_interval(chart, p)
        nodes = np.linspace(lo, hi, n_nodes)
        nodes[0], nodes[-1] = lo, hi
        return cls(chart, n_nodes, nodes, (hi - lo) / (n_nodes - 1))

    def converted(self, target: Chart, p: CriticalParams) -> np.ndarray:
        """Node coordinates expressed in another chart (no longer uniform)."""
        return np.asarray(chart_convert(self.nodes, self.chart, target, p))

    def refined(self, p: CriticalParams, factor: int = 2) -> "Grid1D":
        """Nested grid with the spacing divided by ``factor``."""
        return Grid1D.uniform(self.chart, factor * (self.n_nodes - 1) + 1, p)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_nodes, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w


@dataclass(frozen=True)
class SurfacePoint:
    s: float
    theta: float
    position: np.ndarray
    normal: np.ndarray


def embedding(s, theta, p: CriticalParams) -> np.ndarray:
    """Position vectors; the trailing axis holds (x, y, z)."""
    s, theta = np.broadcast_arrays(np.asarray(s, float), np.asarray(theta, float))
    r = p.a * np.cosh(s)
    return np.stack([r * np.cos(theta), r * np.sin(theta), p.a * s], axis=-1)


def unit_normal(s, theta) -> np.ndarray:
    s, theta = np.broadcast_arrays(np.asarray(s, float), np.asarray(theta, float))
    sech = 1.0 / np.cosh(s)
    return np.stack([-np.cos(theta) * sech, -np.sin(theta) * sech, np.tanh(s)], axis=-1)


def tangent_vectors(s, theta, p: CriticalParams) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate tangents ``dX/ds`` and ``dX/dtheta``."""
    s, theta = np.broadcast_arrays(np.asarray(s, float), np.asarray(theta, float))
    x_s = p.a * np.stack([np.sinh(s) * np.cos(theta), np.sinh(s) * np.sin(theta), np.ones_like(s)], axis=-1)
    x_t = p.a * np.stack([-np.cosh(s) * np.sin(theta), np.cosh(s) * np.cos(theta), np.zeros_like(s)], axis=-1)
    return x_s, x_t


def surface_point(s: float, theta: float, p: CriticalParams) -> SurfacePoint:
    if abs(s) > p.T + _DOMAIN_SLACK:
        raise DomainError(f"s={s} outside [-T, T]")
    theta = float(theta) % (2.0 * math.pi)
    return SurfacePoint(float(s), theta, embedding(s, theta, p), unit_normal(s, theta))


def outward_conormal(side: int, theta, p: CriticalParams) -> np.ndarray:
    """Exterior unit conormal on the boundary circle ``s = side * T``."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    x_s, _ = tangent_vectors(side * p.T, theta, p)
    return side * x_s / np.linalg.norm(x_s, axis=-1, keepdims=True)


def periodic_nodes(n_theta: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_theta) / n_theta


def surface_integral(f, n_s: int, n_theta: int, p: CriticalParams) -> float:
    """Integrate ``f(s, theta)`` against the area element ``a^2 cosh^2 s ds dtheta``.

    Trapezoid in ``s`` (second order), periodic trapezoid in ``theta``.
    ``f`` must accept broadcast arrays.
    """
    if n_s < 8 or n_theta < 8:
        raise ValueError("n_s and n_theta must be at least 8")
    s = np.linspace(-p.T, p.T, n_s)
    theta = periodic_nodes(n_theta)
    S, TH = np.meshgrid(s, theta, indexing="ij")
    vals = np.broadcast_to(np.asarray(f(S, TH), dtype=float), S.shape)
    density = vals * (p.a * np.cosh(S)) ** 2
    return float(np.trapezoid(density.mean(axis=1), s) * 2.0 * np.pi)


def boundary_integral(f, n_theta: int, p: CriticalParams) -> float:
    """Integrate ``f`` over both boundary circles (length element ``dtheta / T``)."""
    if n_theta < 8:
        raise ValueError("n_theta must be at least 8")
    theta = periodic_nodes(n_theta)
    total = 0.0
    for side in (1.0, -1.0):
        vals = np.broadcast_to(np.asarray(f(np.full_like(theta, side * p.T), theta), float), theta.shape)
        total += vals.mean() * 2.0 * np.pi * p.boundary_radius
    return float(total)
