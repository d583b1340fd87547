"""Correlated fractional Brownian pair driven by one Brownian motion.

Both processes are Wiener integrals of one-sided power kernels against the
same two-sided driver, normalized to unit variance at t = 1.  That makes
every increment covariance, auto and cross, a closed-form expression in
one-sided |u - v| power integrals over the increment windows.  Paths are
sampled exactly in law through the Cholesky factor of the joint increment
covariance, and the normalized quadratic covariation statistic

    Z_n = n^(1 - h1 - h2) * sum_k [ inc1_k inc2_k / E(inc1_k inc2_k) - 1 ]

is the path-route counterpart of the block-kernel chaos law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chaos import SamplePool, _stream_rng
from .kernels import (
    DomainError,
    HurstPair,
    directed_overlap_coefficient,
    directed_rect_power_integral,
    overlap_coefficient,
)

__all__ = [
    "IncrementCovariance",
    "auto_cov",
    "cross_cov",
    "build_joint_cov",
    "sample_zn",
    "unit_variance_scale",
]

_Z_CHUNK = 1 << 14


def auto_cov(h: float, i: int, j: int, n: int) -> float:
    """Covariance of unit-variance fBm increments over [i/n,(i+1)/n] and [j/n,(j+1)/n]."""
    k = abs(i - j)
    rho = 0.5 * ((k + 1) ** (2 * h) + abs(k - 1) ** (2 * h) - 2.0 * k ** (2 * h))
    return n ** (-2.0 * h) * rho


def unit_variance_scale(h: float) -> float:
    """Normalizing constant making the power-kernel representation unit variance at t=1."""
    if h <= 0.5:
        raise DomainError("representation constant defined for h > 1/2 only")
    return math.sqrt(h * (2.0 * h - 1.0) / overlap_coefficient(h - 1.5))


def cross_cov(hurst: HurstPair, i: int, j: int, n: int) -> float:
    """E[inc1_i inc2_j] for the shared-driver pair.

    Collapsing the driver coordinate turns the covariance into directional
    (u - v) power integrals over the two windows with direction-dependent
    beta constants.  Equal indices reduce exactly to the standard fBm
    increment covariance, which doubles as a validation identity.
    """
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("window indices out of range")
    if hurst.h1 == hurst.h2:
        return auto_cov(hurst.h1, i, j, n)
    g = hurst.h1 + hurst.h2 - 2.0
    bi = (i / n, (i + 1) / n)
    bj = (j / n, (j + 1) / n)
    forward = directed_rect_power_integral(bi, bj, g)   # t in bj above s in bi
    backward = directed_rect_power_integral(bj, bi, g)
    val = (directed_overlap_coefficient(hurst.a1, hurst.a2) * forward
           + directed_overlap_coefficient(hurst.a2, hurst.a1) * backward)
    return unit_variance_scale(hurst.h1) * unit_variance_scale(hurst.h2) * val


@dataclass(frozen=True)
class IncrementCovariance:
    """Joint covariance of the 2n increments, ordered (inc1_0..inc1_{n-1}, inc2_0..)."""

    hurst: HurstPair
    n: int
    matrix: np.ndarray
    cholesky: np.ndarray
    jitter: float


def build_joint_cov(hurst: HurstPair, n: int) -> IncrementCovariance:
    """Assemble the 2n x 2n covariance and its Cholesky factor.

    Positive semidefiniteness is validated by a jitter ladder
    (0, 1e-14, 1e-12 relative to the mean diagonal scale); failure after the
    last rung signals a covariance bug rather than roundoff.
    """
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(n)
    def auto_block(h):
        r = np.abs(k[:, None] - k[None, :])
        rho = 0.5 * ((r + 1.0) ** (2 * h) + np.abs(r - 1.0) ** (2 * h) - 2.0 * r ** (2 * h))
        return n ** (-2.0 * h) * rho

    C = np.empty((2 * n, 2 * n))
    C[:n, :n] = auto_block(hurst.h1)
    C[n:, n:] = auto_block(hurst.h2)
    cross = np.array([[cross_cov(hurst, i, j, n) for j in range(n)] for i in range(n)])
    C[:n, n:] = cross
    C[n:, :n] = cross.T

    scale = np.trace(C) / (2 * n)
    for jitter in (0.0, 1e-14, 1e-12):
        try:
            L = np.linalg.cholesky(C + jitter * scale * np.eye(2 * n))
        except np.linalg.LinAlgError:
            continue
        return IncrementCovariance(hurst=hurst, n=n, matrix=C, cholesky=L,
                                   jitter=jitter * scale)
    raise np.linalg.LinAlgError(
        "joint increment covariance failed Cholesky at maximum jitter")


def sample_zn(hurst: HurstPair, n: int, count: int, seed: int, *,
              cov: IncrementCovariance | None = None, threads: int = 1) -> SamplePool:
    """Draws of the normalized quadratic covariation statistic Z_n.

    Each draw materializes one exact-in-law path of 2n joint increments via
    the Cholesky factor applied to fresh standard Gaussians.  Chunked,
    substream-seeded, deterministic for any worker count.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if cov is None:
        cov = build_joint_cov(hurst, n)
    Lt = cov.cholesky.T.copy()
    denom = cross_cov(hurst, 0, 0, n)
    norm = n ** (1.0 - hurst.h1 - hurst.h2)
    n_chunks = (count + _Z_CHUNK - 1) // _Z_CHUNK

    def one(c: int) -> np.ndarray:
        rng = _stream_rng(seed, c)
        Z = rng.standard_normal((_Z_CHUNK, 2 * n))
        inc = Z @ Lt
        s = np.einsum("ij,ij->i", inc[:, :n], inc[:, n:])
        return norm * (s / denom - n)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(n_chunks)))
    else:
        parts = [one(c) for c in range(n_chunks)]
    values = np.concatenate(parts)[:count]
    meta = f"zn n={n} h=({hurst.h1},{hurst.h2}) jitter={cov.jitter!r}"
    return SamplePool(values=values, seed=seed, streams=tuple(range(n_chunks)),
                      meta=meta, chunk=_Z_CHUNK)
