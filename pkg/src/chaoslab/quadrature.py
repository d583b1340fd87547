"""Panel quadrature helpers for weakly singular integrands.

Everything here works on explicit panel edge arrays so that meshes can be
graded toward known singular points, grown geometrically into long power-law
tails, or handed to Gauss-Jacobi rules that absorb an endpoint weight u^a
with a in (-1, 0).
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

__all__ = [
    "gauss_panels",
    "graded_edges",
    "graded_both_edges",
    "geometric_tail_edges",
    "jacobi_left_rule",
    "singular_interval_rule",
]

_LEG_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_JAC_CACHE: dict[tuple[int, float], tuple[np.ndarray, np.ndarray]] = {}


def _leg(q: int):
    if q not in _LEG_CACHE:
        _LEG_CACHE[q] = leggauss(q)
    return _LEG_CACHE[q]


def gauss_panels(edges, q: int = 16):
    """Composite Gauss-Legendre rule over the panels given by ``edges``.

    Returns (nodes, weights) flattened over all panels.
    """
    x, w = _leg(q)
    e = np.asarray(edges, dtype=float)
    mid = 0.5 * (e[1:] + e[:-1])
    half = 0.5 * (e[1:] - e[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return nodes, wts


def graded_edges(a: float, b: float, m: int, p: float, toward: str = "a"):
    """m+1 panel edges on [a, b], widths shrinking polynomially toward one end."""
    t = (np.arange(m + 1) / m) ** p
    if toward == "a":
        return a + (b - a) * t
    return b - (b - a) * t[::-1]


def graded_both_edges(a: float, b: float, m_half: int, p: float):
    """Panel edges on [a, b] graded toward both endpoints."""
    mid = 0.5 * (a + b)
    left = graded_edges(a, mid, max(m_half, 1), p, toward="a")
    right = graded_edges(mid, b, max(m_half, 1), p, toward="b")
    return np.unique(np.concatenate([left, right]))


def geometric_tail_edges(start: float, stop: float, first_width: float, ratio: float = 2.0):
    """Edges from ``start`` out to ``stop`` (above start) with geometrically growing widths."""
    if stop <= start:
        return np.array([start])
    edges = [start]
    w = first_width
    while edges[-1] < stop:
        edges.append(min(edges[-1] + w, stop))
        w *= ratio
    return np.asarray(edges)


def jacobi_left_rule(width: float, a: float, q: int = 32):
    """Rule for integrals of the form  int_0^width u^a f(u) du  with a > -1.

    The weight u^a is absorbed into the returned weights, so the caller
    evaluates only the smooth factor f at the returned nodes.
    """
    key = (q, a)
    if key not in _JAC_CACHE:
        _JAC_CACHE[key] = roots_jacobi(q, 0.0, a)
    x, w = _JAC_CACHE[key]
    u = width * (x + 1.0) / 2.0
    return u, w * (width / 2.0) ** (a + 1.0)


def singular_interval_rule(lo: float, hi: float, sing: float, a: float,
                           q_jac: int = 32, q_leg: int = 16, n_panels: int = 8,
                           grade: float = 3.0):
    """Rule for  int_lo^hi |u - sing|^a f(u) du  with the singular point at an endpoint.

    ``sing`` must equal ``lo`` or ``hi``.  The Jacobi rule absorbs |u-sing|^a on
    the nearest third of the interval; the remainder uses graded Gauss-Legendre
    panels with the weight evaluated explicitly.
    Returns (nodes, weights, weight_included) where weight_included indicates the
    |u-sing|^a factor is already inside the weights.
    """
    length = hi - lo
    cut = length / 3.0
    if sing == lo:
        uj, wj = jacobi_left_rule(cut, a, q_jac)
        nodes_j = lo + uj
        edges = graded_edges(lo + cut, hi, n_panels, grade, toward="a")
    elif sing == hi:
        uj, wj = jacobi_left_rule(cut, a, q_jac)
        nodes_j = hi - uj
        edges = graded_edges(lo, hi - cut, n_panels, grade, toward="b")
    else:
        raise ValueError("singular point must be an endpoint")
    nl, wl = gauss_panels(edges, q_leg)
    wl = wl * np.abs(nl - sing) ** a
    return np.concatenate([nodes_j, nl]), np.concatenate([wj, wl])
