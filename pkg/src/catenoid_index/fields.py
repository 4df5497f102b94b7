"""Closed-form Jacobi fields and coordinate functions on the critical catenoid.

Every field separates as ``profile(s) * angular(theta)`` with a single
Fourier mode. Sign convention for the translation fields: ``VX`` and ``VY``
use ``+sech(s)`` profiles, so that their boundary values are
``+cos(theta)/cosh(T)`` and ``+sin(theta)/cosh(T)``. This is ``-(N, e_x)`` for
the normal ``N`` of :mod:`catenoid_index.geometry`; spectra and quadratic
form values do not depend on the global sign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularBoundaryError
from .geometry import CriticalParams, Grid1D, Chart, periodic_nodes, second_fundamental_norm_sq

_DOMAIN_SLACK = 1e-12


class FieldKind(enum.Enum):
    VX = "vx"
    VY = "vy"
    VZ = "vz"
    ROT_XZ = "rot_xz"
    ROT_YZ = "rot_yz"
    XI = "xi"
    COORD_X = "coord_x"
    COORD_Y = "coord_y"
    COORD_Z = "coord_z"
    CONST_ONE = "one"


class Parity(enum.Enum):
    EVEN = 1
    ODD = -1


# kind -> (mode, angular factor, parity)
_LAYOUT = {
    FieldKind.VX: (1, "cos", Parity.EVEN),
    FieldKind.VY: (1, "sin", Parity.EVEN),
    FieldKind.VZ: (0, "one", Parity.ODD),
    FieldKind.ROT_XZ: (1, "cos", Parity.ODD),
    FieldKind.ROT_YZ: (1, "sin", Parity.ODD),
    FieldKind.XI: (0, "one", Parity.EVEN),
    FieldKind.COORD_X: (1, "cos", Parity.EVEN),
    FieldKind.COORD_Y: (1, "sin", Parity.EVEN),
    FieldKind.COORD_Z: (0, "one", Parity.ODD),
    FieldKind.CONST_ONE: (0, "one", Parity.EVEN),
}

JACOBI_FIELDS = (FieldKind.VX, FieldKind.VY, FieldKind.VZ, FieldKind.ROT_XZ, FieldKind.ROT_YZ, FieldKind.XI)


@dataclass(frozen=True)
class ClosedFormField:
    kind: FieldKind
    mode: int
    parity: Parity
    angular: str
    steklov_eigenvalue: float | None
    # which operator the Steklov eigenvalue refers to: "jacobi" or "laplacian"
    operator: str

    @property
    def label(self) -> str:
        return self.kind.value


def closed_form_field(kind: FieldKind | str, p: CriticalParams) -> ClosedFormField:
    kind = FieldKind(kind) if not isinstance(kind, FieldKind) else kind
    mode, angular, parity = _LAYOUT[kind]
    if kind in (FieldKind.VX, FieldKind.VY):
        eig, op = -1.0, "jacobi"
    elif kind is FieldKind.VZ:
        eig, op = 1.0 / p.sinhT**2, "jacobi"
    elif kind in (FieldKind.ROT_XZ, FieldKind.ROT_YZ):
        eig, op = 1.0, "jacobi"
    elif kind in (FieldKind.COORD_X, FieldKind.COORD_Y, FieldKind.COORD_Z):
        eig, op = 1.0, "laplacian"
    elif kind is FieldKind.XI:
        eig, op = None, "jacobi"
    else:
        eig, op = None, "laplacian"
    return ClosedFormField(kind, mode, parity, angular, eig, op)


def rotation_profile(s, p: CriticalParams):
    """``Lambda(s) = a (s sech s + tanh s cosh s)``, the profile of the x-z rotation field."""
    s = np.asarray(s, dtype=float)
    return p.a * (s / np.cosh(s) + np.sinh(s))


def profile(field: ClosedFormField, s, p: CriticalParams):
    """The ``s``-dependent factor of ``field``."""
    s = np.asarray(s, dtype=float)
    k = field.kind
    if k in (FieldKind.VX, FieldKind.VY):
        return 1.0 / np.cosh(s)
    if k is FieldKind.VZ:
        return np.tanh(s)
    if k in (FieldKind.ROT_XZ, FieldKind.ROT_YZ):
        return rotation_profile(s, p)
    if k is FieldKind.XI:
        return 1.0 - s * np.tanh(s)
    if k in (FieldKind.COORD_X, FieldKind.COORD_Y):
        return p.a * np.cosh(s)
    if k is FieldKind.COORD_Z:
        return p.a * s
    return np.ones_like(s)


def profile_derivative(field: ClosedFormField, s, p: CriticalParams):
    s = np.asarray(s, dtype=float)
    k = field.kind
    sech = 1.0 / np.cosh(s)
    if k in (FieldKind.VX, FieldKind.VY):
        return -sech * np.tanh(s)
    if k is FieldKind.VZ:
        return sech**2
    if k in (FieldKind.ROT_XZ, FieldKind.ROT_YZ):
        return p.a * (sech - s * sech * np.tanh(s) + np.cosh(s))
    if k is FieldKind.XI:
        return -np.tanh(s) - s * sech**2
    if k in (FieldKind.COORD_X, FieldKind.COORD_Y):
        return p.a * np.sinh(s)
    if k is FieldKind.COORD_Z:
        return np.full_like(s, p.a)
    return np.zeros_like(s)


def angular(field: ClosedFormField, theta):
    theta = np.asarray(theta, dtype=float)
    if field.angular == "cos":
        return np.cos(field.mode * theta)
    if field.angular == "sin":
        return np.sin(field.mode * theta)
    return np.ones_like(theta)


def evaluate(field: ClosedFormField, s, theta, p: CriticalParams):
    """Value of ``field`` at ``(s, theta)``; arrays broadcast."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) > p.T + _DOMAIN_SLACK):
        raise DomainError(f"s outside [-T, T] with T={p.T}")
    out = profile(field, s_arr, p) * angular(field, theta)
    return float(out) if np.ndim(out) == 0 else out


def as_function(field: ClosedFormField, p: CriticalParams):
    """Bind ``p`` so the field can be handed to the quadrature routines."""

    def u(s, theta):
        return evaluate(field, s, theta, p)

    u.__name__ = field.label
    return u


def spectral_theta_derivative(values: np.ndarray, order: int = 1, axis: int = -1) -> np.ndarray:
    """Differentiate periodic samples in ``theta`` through the FFT.

    Exact for trigonometric polynomials of degree below ``n_theta / 2``.
    """
    n = values.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0 and order % 2 == 1:
        k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    mult = ((1j * k) ** order).reshape(shape)
    return np.real(np.fft.ifft(np.fft.fft(values, axis=axis) * mult, axis=axis))


def jacobi_residual(field: ClosedFormField, grid: Grid1D, n_theta: int, p: CriticalParams) -> float:
    """Sup norm of ``J u`` at interior grid nodes.

    ``u_ss`` uses the 3-point central difference, ``u_thetatheta`` is
    spectral, so the result is O(h^2) for a genuine Jacobi field.
    """
    if grid.chart is not Chart.S:
        raise ValueError("jacobi_residual needs an s-chart grid")
    s = grid.nodes
    theta = periodic_nodes(n_theta)
    S, TH = np.meshgrid(s, theta, indexing="ij")
    u = evaluate(field, S, TH, p)
    h = grid.spacing
    u_ss = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    u_tt = spectral_theta_derivative(u, order=2, axis=1)[1:-1]
    s_in = S[1:-1]
    ju = -(u_ss + u_tt) / (p.a * np.cosh(s_in)) ** 2 - second_fundamental_norm_sq(s_in, p) * u[1:-1]
    return float(np.max(np.abs(ju)))


def steklov_ratio(field: ClosedFormField, p: CriticalParams) -> float:
    """``(du/dnu) / u`` on the circle ``s = T``, computed from the closed form.

    The exterior normal derivative there is ``(1 / (a cosh T)) d/ds``.
    """
    value = float(profile(field, p.T, p))
    if abs(value) < 1e-12:
        raise SingularBoundaryError(f"{field.label} vanishes on the boundary")
    return float(profile_derivative(field, p.T, p)) / (p.boundary_radius * value)
