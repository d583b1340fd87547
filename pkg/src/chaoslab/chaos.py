"""Sampling of second-chaos variables and their Malliavin gradient norms.

A decomposition with eigenvalues (lam_k) induces the law

    F = sum_k lam_k (Z_k^2 - 1),        ||DF||^2 = 4 sum_k lam_k^2 Z_k^2,

with independent standard normals Z_k.  Draws are produced in fixed chunks of
2^16, each chunk from its own counter-derived substream, so results are
bit-identical for any worker count and chunked pools merge deterministically.

Within a chunk the normals are generated eigenvalue-major: the k-th
eigenvalue always consumes the k-th block of the substream.  Two pools drawn
with the same seed therefore share their Gaussians eigenvalue-by-eigenvalue
even when the retained spectrum lengths differ, which is what makes
matched-seed couplings (scaled kernels, block kernel vs limit kernel) tight.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ratefit import RateFit, fit_loglog
from .spectral import SpectralDecomposition

__all__ = [
    "CHUNK",
    "SamplePool",
    "InsufficientTailHits",
    "sample_second_chaos",
    "sample_malliavin_norm_sq",
    "small_ball_exponent",
    "five_mode_bound_constant",
]

CHUNK = 1 << 16


class InsufficientTailHits(RuntimeError):
    """Smallest requested u has fewer than the minimum tail hits; raise count or u."""


@dataclass(frozen=True)
class SamplePool:
    """Seeded, reproducible batch of i.i.d. draws of a scalar variable.

    values are concatenated chunk outputs in stream order; pools over disjoint
    stream ranges (all full chunks) merge associatively.
    """

    values: np.ndarray
    seed: int
    streams: tuple
    meta: str = ""
    chunk: int = CHUNK

    @property
    def stream_count(self) -> int:
        return len(self.streams)

    def merge(self, other: "SamplePool") -> "SamplePool":
        if self.seed != other.seed or self.meta != other.meta or self.chunk != other.chunk:
            raise ValueError("pools from different generators cannot merge")
        if set(self.streams) & set(other.streams):
            raise ValueError("stream ranges overlap")
        if len(self.values) != self.chunk * self.stream_count or \
           len(other.values) != self.chunk * other.stream_count:
            raise ValueError("only full-chunk pools merge")
        streams = list(self.streams) + list(other.streams)
        order = np.argsort(streams, kind="stable")
        blocks = np.concatenate([self.values, other.values]).reshape(-1, self.chunk)
        return SamplePool(values=blocks[order].ravel(), seed=self.seed,
                          streams=tuple(sorted(streams)), meta=self.meta, chunk=self.chunk)


def _stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def _retained_eigenvalues(d, noise_floor: float) -> np.ndarray:
    if isinstance(d, SpectralDecomposition):
        lam = d.retained(noise_floor)
    else:
        lam = np.asarray(d, dtype=float)
        if lam.size:
            lam = lam[np.abs(lam) > noise_floor * np.abs(lam).max()]
    if lam.size == 0 or not np.any(lam != 0.0):
        raise ValueError("decomposition has no usable eigenvalues")
    return lam


def _chunked_sample(kernel_fn, count: int, seed: int, threads: int, meta: str) -> SamplePool:
    n_chunks = (count + CHUNK - 1) // CHUNK

    def one(c: int) -> np.ndarray:
        return kernel_fn(_stream_rng(seed, c))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(n_chunks)))
    else:
        parts = [one(c) for c in range(n_chunks)]
    values = np.concatenate(parts)[:count]
    return SamplePool(values=values, seed=seed, streams=tuple(range(n_chunks)), meta=meta)


def sample_second_chaos(d, count: int, seed: int, *, tail_sd: float = 0.0,
                        noise_floor: float = 1e-6, threads: int = 1) -> SamplePool:
    """Draws of sum_k lam_k (Z_k^2 - 1) for the decomposition's retained spectrum.

    tail_sd, when positive, adds an independent centered Gaussian with that
    standard deviation per draw: the aggregate of the unresolved spectral
    tail, whose many small chi-square summands are near-Gaussian.  Callers
    supply sqrt(2 * (analytic_norm_sq - hs_norm_sq)); the default 0 samples
    the truncated law exactly as recorded.
    """
    if count < 1:
        raise ValueError("count must be positive")
    lam = _retained_eigenvalues(d, noise_floor)

    def kernel(rng: np.random.Generator) -> np.ndarray:
        acc = np.zeros(CHUNK)
        for lk in lam:
            z = rng.standard_normal(CHUNK)
            acc += lk * (z * z - 1.0)
        if tail_sd > 0.0:
            acc += tail_sd * rng.standard_normal(CHUNK)
        return acc

    meta = f"second-chaos k={len(lam)} tail_sd={tail_sd!r}"
    return _chunked_sample(kernel, count, seed, threads, meta)


def sample_malliavin_norm_sq(d, count: int, seed: int, *, noise_floor: float = 1e-6,
                             threads: int = 1) -> SamplePool:
    """Draws of ||DF||^2 = 4 sum_k lam_k^2 Z_k^2; nonnegative, mean 4 sum lam^2."""
    if count < 1:
        raise ValueError("count must be positive")
    lam = _retained_eigenvalues(d, noise_floor)
    lam2 = 4.0 * lam ** 2

    def kernel(rng: np.random.Generator) -> np.ndarray:
        acc = np.zeros(CHUNK)
        for lk in lam2:
            z = rng.standard_normal(CHUNK)
            acc += lk * (z * z)
        return acc

    meta = f"malliavin-norm-sq k={len(lam)}"
    return _chunked_sample(kernel, count, seed, threads, meta)


def small_ball_exponent(d, u_grid, count: int, seed: int, *, min_hits: int = 50,
                        noise_floor: float = 1e-6, threads: int = 1,
                        values: np.ndarray | None = None) -> RateFit:
    """Fit of log P(||DF||^2 <= u) against log u over the given u grid.

    Preconditions follow the experiment contract: the grid must span at least
    a decade and sit below the sample median.  Grid points keep at least
    min_hits empirical hits (the smallest point failing that raises
    InsufficientTailHits so the caller can raise count or u).
    """
    u = np.sort(np.asarray(list(u_grid), dtype=float))
    if len(u) < 3:
        raise ValueError("u grid needs at least 3 points")
    if np.any(u <= 0):
        raise ValueError("u grid must be positive")
    if u[-1] / u[0] < 10.0:
        raise ValueError("u grid must span at least one decade")
    if values is None:
        values = sample_malliavin_norm_sq(d, count, seed, noise_floor=noise_floor,
                                          threads=threads).values
    med = float(np.median(values))
    if u[-1] >= med:
        raise ValueError(f"u grid must stay below the sample median {med:.6g}")
    hits = np.array([int(np.sum(values <= ui)) for ui in u])
    if hits[0] < min_hits:
        raise InsufficientTailHits(
            f"only {hits[0]} hits at u = {u[0]:.6g}; raise count or the grid floor")
    keep = hits >= min_hits
    probs = hits[keep] / len(values)
    return fit_loglog(list(zip(u[keep], probs)))


def five_mode_bound_constant(d, noise_floor: float = 1e-6) -> float:
    """Constant C with P(||DF||^2 <= u) <= C u^{5/2}, from the top 5 eigenvalues.

    This is the quantitative content of the small-ball lemma: the product of
    the five largest |eigenvalues| controls the lower tail.
    """
    lam = np.abs(_retained_eigenvalues(d, noise_floor))
    if len(lam) < 5:
        raise ValueError("bound needs at least 5 nonzero eigenvalues")
    top = np.sort(lam)[::-1][:5]
    return float(1.0 / ((2.0 * math.pi) ** 2.5 * np.prod(top)))
