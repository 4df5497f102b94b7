"""High-order finite-difference stencils and Gregory quadrature weights."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple[int, ...], order: int) -> np.ndarray:
    """Weights ``w`` with ``sum_j w_j f(x + o_j h) = h^order f^(order)(x) + O(h^k)``."""
    k = len(offsets)
    V = np.vander(np.asarray(offsets, dtype=float), k, increasing=True).T
    rhs = np.zeros(k)
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(V, rhs)
    w.setflags(write=False)
    return w


def derivative(values: np.ndarray, h: float, order: int = 1, axis: int = 0, width: int = 7) -> np.ndarray:
    """Derivative along ``axis`` with ``width``-point stencils.

    Centered in the interior, shifted (one-sided) within ``width // 2`` nodes
    of either end, so the accuracy is uniform up to the boundary.
    """
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = v.shape[0]
    if n < width:
        raise ValueError(f"need at least {width} nodes, got {n}")
    half = width // 2
    out = np.empty_like(v)
    center = fd_weights(tuple(range(-half, half + 1)), order)
    out[half : n - half] = sum(center[j] * v[j : n - 2 * half + j] for j in range(width))
    for i in list(range(half)) + list(range(n - half, n)):
        start = min(max(i - half, 0), n - width)
        w = fd_weights(tuple(range(start - i, start - i + width)), order)
        out[i] = np.tensordot(w, v[start : start + width], axes=(0, 0))
    return np.moveaxis(out / h**order, 0, axis)


_GREGORY_END = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


def gregory_weights(n: int, h: float) -> np.ndarray:
    """Fourth-order Gregory quadrature weights for ``n >= 6`` equispaced nodes."""
    if n < 6:
        raise ValueError("Gregory weights need at least 6 nodes")
    w = np.ones(n)
    w[:3] = _GREGORY_END
    w[-3:] = _GREGORY_END[::-1]
    return w * h
