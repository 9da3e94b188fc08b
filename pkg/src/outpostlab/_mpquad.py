"""Gauss-Legendre panel quadrature at mpmath working precision.

Nodes and weights are seeded from float64 (numpy) and polished by Newton
iteration on the Legendre polynomial at the current precision, then cached
per (order, precision).
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

_cache: dict[tuple[int, int], tuple[list, list]] = {}


def _legendre_and_deriv(k: int, x):
    # recurrence for P_k and P_k'
    p0, p1 = mp.mpf(1), x
    for j in range(2, k + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = k * (x * p1 - p0) / (x * x - 1)
    return p1, dp


def gauss_legendre(order: int):
    """Nodes and weights on [-1, 1] at the current mp precision."""
    key = (order, mp.mp.prec)
    if key in _cache:
        return _cache[key]
    seeds, _ = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for s in seeds:
        x = mp.mpf(float(s))
        for _ in range(mp.mp.prec // 40 + 4):
            p, dp = _legendre_and_deriv(order, x)
            dx = p / dp
            x -= dx
            if abs(dx) < mp.mpf(2) ** (-mp.mp.prec):
                break
        _, dp = _legendre_and_deriv(order, x)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    _cache[key] = (nodes, weights)
    return nodes, weights


def panel_nodes(a, b, order: int):
    """Scaled nodes/weights for one panel [a, b]."""
    xs, ws = gauss_legendre(order)
    a = mp.mpf(a)
    b = mp.mpf(b)
    mid = (a + b) / 2
    half = (b - a) / 2
    return [mid + half * x for x in xs], [half * w for w in ws]


def split_panels(breakpoints, max_width, min_panels_per_cell=1):
    """Panel edges covering [breakpoints[0], breakpoints[-1]] that contain
    every breakpoint and have width <= max_width."""
    edges = [mp.mpf(breakpoints[0])]
    for left, right in zip(breakpoints[:-1], breakpoints[1:]):
        left = mp.mpf(left)
        right = mp.mpf(right)
        width = right - left
        if width <= 0:
            continue
        k = max(min_panels_per_cell, int(mp.ceil(width / mp.mpf(max_width))))
        for i in range(1, k + 1):
            edges.append(left + width * i / k)
    return edges
