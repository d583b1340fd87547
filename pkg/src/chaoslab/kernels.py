"""Fractional product kernels, their inner products and L2 distances.

The lab studies two-variable kernels built from one-sided powers
(s - x)_+^(h - 3/2).  The limiting kernel integrates the product of two such
factors over s in [0, 1]; the n-block kernel replaces that coupling by a sum
of per-block products, which is the kernel of the normalized quadratic
covariation statistic.  Every inner product reduces, through the overlap
identity

    int_R (t - x)_+^a (s - x)_+^a dx = overlap_coefficient(a) * |t - s|^(2a+1),

to one- and two-dimensional integrals of |s - t| powers over blocks, which
have closed forms.  The only pairing that needs quadrature is block kernel
against limit kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from .quadrature import (
    gauss_panels,
    graded_edges,
    jacobi_left_rule,
    singular_interval_rule,
)

__all__ = [
    "DomainError",
    "ToleranceError",
    "HurstPair",
    "KernelSpec",
    "QuadratureConfig",
    "overlap_coefficient",
    "directed_overlap_coefficient",
    "rect_power_integral",
    "directed_rect_power_integral",
    "eval_kernel",
    "inner_product",
    "inner_product_transposed",
    "inner_product_sym",
    "l2_distance",
    "l2_distance_sym",
    "limit_norm_sq",
    "limit_sym_norm_sq",
    "truncated_sym_norm_sq",
    "tail_norm_bound",
    "truncation_for_tail",
]


class DomainError(ValueError):
    """Parameter outside the domain where the requested integral converges."""


class ToleranceError(RuntimeError):
    """Adaptive refinement stalled before reaching the requested tolerance."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HurstPair:
    """Pair of Hurst indices (h1, h2) in [1/2, 1).

    Kernel operations need both indices strictly above 1/2 (so the derived
    exponents a = h - 3/2 lie in (-1, -1/2)); square-integrability of the
    limit kernel additionally needs h1 + h2 > 3/2.  The constructor accepts
    the closed lower endpoint so that Brownian sanity cases (h = 1/2) remain
    expressible for the path simulator; mixed pairs with exactly one Brownian
    index are rejected because the shared-driver representation degenerates.
    """

    h1: float
    h2: float

    def __post_init__(self):
        for h in (self.h1, self.h2):
            if not (0.5 <= h < 1.0) or math.isnan(h):
                raise DomainError(f"Hurst index {h} outside [1/2, 1)")
        if (self.h1 == 0.5) != (self.h2 == 0.5):
            raise DomainError("mixed pair with a single Brownian index is not supported")

    @property
    def a1(self) -> float:
        return self.h1 - 1.5

    @property
    def a2(self) -> float:
        return self.h2 - 1.5

    @property
    def square_integrable(self) -> bool:
        """True when the limit kernel lies in L2(R^2), i.e. h1 + h2 > 3/2."""
        return self.h1 + self.h2 > 1.5

    @property
    def strict(self) -> bool:
        """True when both indices exceed 1/2 strictly."""
        return self.h1 > 0.5 and self.h2 > 0.5

    def require_strict(self):
        if not self.strict:
            raise DomainError("operation needs h1, h2 > 1/2 strictly")

    def require_square_integrable(self):
        self.require_strict()
        if not self.square_integrable:
            raise DomainError(
                f"limit kernel not square integrable at h1 + h2 = {self.h1 + self.h2}"
            )

    @property
    def distance_exponent(self) -> float:
        """Decay exponent of ||f_n - f_limit||: 3/2 - h1 - h2."""
        return 1.5 - self.h1 - self.h2


@dataclass(frozen=True)
class KernelSpec:
    """Symbolic kernel: the limit kernel, an n-block kernel, or a scalar multiple."""

    kind: str                      # "limit" | "blocks" | "scaled"
    hurst: HurstPair
    n: int = 0
    factor: float = 1.0
    base: "KernelSpec | None" = field(default=None, repr=False)

    @staticmethod
    def limit(hurst: HurstPair) -> "KernelSpec":
        hurst.require_strict()
        return KernelSpec("limit", hurst)

    @staticmethod
    def blocks(hurst: HurstPair, n: int) -> "KernelSpec":
        hurst.require_strict()
        if n < 1:
            raise DomainError("block kernel needs n >= 1")
        return KernelSpec("blocks", hurst, n=int(n))

    @staticmethod
    def scaled(base: "KernelSpec", factor: float) -> "KernelSpec":
        if not math.isfinite(factor):
            raise DomainError("scale factor must be finite")
        return KernelSpec("scaled", base.hurst, factor=float(factor), base=base)

    def flatten(self) -> tuple[float, "KernelSpec"]:
        """Collapse nested scalings to (total_factor, unscaled_spec)."""
        if self.kind != "scaled":
            return 1.0, self
        f, b = self.base.flatten()
        return self.factor * f, b


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs for every quadrature-backed operation.

    truncation_left bounds the spectral grid domain [truncation_left, 1];
    kernels decay like |x|^(h-3/2) to the left, so brute-force norm checks
    must push the cut far enough that the tail stays below abs_tol (see
    truncation_for_tail).  Closed-form inner products bypass truncation.
    """

    truncation_left: float = -50.0
    panels_per_unit: int = 64
    grading_exponent: float = 3.0
    nodes_per_panel: int = 16
    abs_tol: float = 1e-6
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.truncation_left >= 0:
            raise DomainError("truncation_left must be negative")
        if self.panels_per_unit < 1 or self.nodes_per_panel < 1:
            raise DomainError("panel counts must be positive")
        if self.grading_exponent < 1.0:
            raise DomainError("grading_exponent must be >= 1")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("tolerances must be positive")


DEFAULT_CONFIG = QuadratureConfig()


# ---------------------------------------------------------------------------
# overlap coefficients and rectangle power integrals
# ---------------------------------------------------------------------------

def overlap_coefficient(alpha: float) -> float:
    """Constant c with  int_R (t-x)_+^alpha (s-x)_+^alpha dx = c |t-s|^(2 alpha + 1).

    Equals B(alpha+1, -2 alpha - 1).  The integral converges only for
    alpha in (-1, -1/2): the near endpoint needs alpha > -1, the far tail
    decays like u^(2 alpha) and needs alpha < -1/2.
    """
    if not (-1.0 < alpha < -0.5):
        raise DomainError(f"overlap integral diverges for alpha = {alpha}")
    return sp.beta(alpha + 1.0, -2.0 * alpha - 1.0)


def directed_overlap_coefficient(alpha: float, beta: float) -> float:
    """Constant for the two-exponent overlap with t > s:

        int_R (s-x)_+^alpha (t-x)_+^beta dx = B(alpha+1, -alpha-beta-1) (t-s)^(alpha+beta+1).

    Swap the arguments for the t < s direction.
    """
    if alpha <= -1.0 or beta <= -1.0 or alpha + beta >= -1.0:
        raise DomainError(f"directed overlap diverges for ({alpha}, {beta})")
    return sp.beta(alpha + 1.0, -alpha - beta - 1.0)


def _abs_power_2antideriv(u, gamma):
    # F with d^2/du^2 F(u) = |u|^gamma, valid across u = 0 for gamma > -1
    return np.abs(u) ** (gamma + 2.0) / ((gamma + 1.0) * (gamma + 2.0))


def _pos_power_2antideriv(u, gamma):
    return np.maximum(u, 0.0) ** (gamma + 2.0) / ((gamma + 1.0) * (gamma + 2.0))


def rect_power_integral(s_interval, t_interval, gamma: float) -> float:
    """Exact  int_{s_interval} int_{t_interval} |s - t|^gamma dt ds  for gamma > -1."""
    if gamma <= -1.0:
        raise DomainError(f"|s-t|^gamma not integrable across the diagonal for gamma = {gamma}")
    a0, a1 = map(float, s_interval)
    b0, b1 = map(float, t_interval)
    F = _abs_power_2antideriv
    return float(F(a1 - b0, gamma) - F(a1 - b1, gamma) - F(a0 - b0, gamma) + F(a0 - b1, gamma))


def directed_rect_power_integral(s_interval, t_interval, gamma: float) -> float:
    """Exact  int int_{t > s} (t - s)^gamma  over the rectangle, gamma > -1."""
    if gamma <= -1.0:
        raise DomainError(f"(t-s)^gamma not integrable for gamma = {gamma}")
    a0, a1 = map(float, s_interval)
    b0, b1 = map(float, t_interval)
    G = _pos_power_2antideriv
    return float(G(b1 - a0, gamma) - G(b1 - a1, gamma) - G(b0 - a0, gamma) + G(b0 - a1, gamma))


def _rect_grid(edges_a: np.ndarray, edges_b: np.ndarray, gamma: float) -> np.ndarray:
    """Matrix of |s-t|^gamma rectangle integrals over all panel pairs."""
    A0 = edges_a[:-1][:, None]
    A1 = edges_a[1:][:, None]
    B0 = edges_b[None, :-1]
    B1 = edges_b[None, 1:]
    F = _abs_power_2antideriv
    return F(A1 - B0, gamma) - F(A1 - B1, gamma) - F(A0 - B0, gamma) + F(A0 - B1, gamma)


def _rect_plus_grid(edges_a: np.ndarray, edges_b: np.ndarray, gamma: float) -> np.ndarray:
    """Matrix of (t-s)_+^gamma rectangle integrals (t from edges_b) over panel pairs."""
    A0 = edges_a[:-1][:, None]
    A1 = edges_a[1:][:, None]
    B0 = edges_b[None, :-1]
    B1 = edges_b[None, 1:]
    G = _pos_power_2antideriv
    return G(B1 - A0, gamma) - G(B1 - A1, gamma) - G(B0 - A0, gamma) + G(B0 - A1, gamma)


# ---------------------------------------------------------------------------
# pointwise kernel evaluation
# ---------------------------------------------------------------------------

def _block_power_integral(x, lo, hi, a):
    # int_lo^hi (s - x)_+^a ds, exact
    P = lambda u: np.maximum(u, 0.0) ** (a + 1.0) / (a + 1.0)
    return P(hi - x) - P(lo - x)


def eval_kernel(spec: KernelSpec, x: float, y: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Pointwise kernel value; +inf sentinel on the limit kernel's diagonal.

    The limit kernel at x = y in [0, 1) integrates (s-x)^(a1+a2) with
    a1 + a2 < -1, which diverges; callers must treat the sentinel, never a
    0 * inf product.
    """
    if math.isnan(x) or math.isnan(y):
        raise DomainError("NaN coordinates rejected")
    factor, base = spec.flatten()
    if factor == 0.0:
        return 0.0
    hp = base.hurst
    a1, a2 = hp.a1, hp.a2
    if base.kind == "blocks":
        n = base.n
        i = np.arange(n)
        I = _block_power_integral(x, i / n, (i + 1) / n, a1)
        J = _block_power_integral(y, i / n, (i + 1) / n, a2)
        return factor * n * float(np.sum(I * J))
    # limit kernel
    m = max(x, y, 0.0)
    if m >= 1.0:
        return 0.0
    if x == y:
        return math.inf
    if x > y:
        sing_a, other, other_a = a1, y, a2
    else:
        sing_a, other, other_a = a2, x, a1
    if m <= 0.0:
        # both arguments nonpositive: integrand smooth on [0, 1]
        nodes, wts = gauss_panels(np.linspace(0.0, 1.0, 8), cfg.nodes_per_panel)
        vals = (nodes - x) ** a1 * (nodes - y) ** a2
        return factor * float(np.sum(wts * vals))
    nodes, wts = singular_interval_rule(
        m, 1.0, m, sing_a,
        q_leg=cfg.nodes_per_panel,
        grade=cfg.grading_exponent,
    )
    smooth = (nodes - other) ** other_a
    return factor * float(np.sum(wts * smooth))


# ---------------------------------------------------------------------------
# inner products
# ---------------------------------------------------------------------------

def _limit_limit(hp: HurstPair, transposed: bool) -> float:
    hp.require_square_integrable()
    gamma = 2.0 * (hp.h1 + hp.h2) - 4.0
    R = rect_power_integral((0.0, 1.0), (0.0, 1.0), gamma)
    if transposed:
        c = directed_overlap_coefficient(hp.a1, hp.a2) * directed_overlap_coefficient(hp.a2, hp.a1)
    else:
        c = overlap_coefficient(hp.a1) * overlap_coefficient(hp.a2)
    return c * R


def _blocks_blocks(hp: HurstPair, n: int, m: int, transposed: bool) -> float:
    en = np.linspace(0.0, 1.0, n + 1)
    em = np.linspace(0.0, 1.0, m + 1)
    if not transposed:
        R1 = _rect_grid(en, em, 2.0 * hp.h1 - 2.0)
        R2 = _rect_grid(en, em, 2.0 * hp.h2 - 2.0)
        c = overlap_coefficient(hp.a1) * overlap_coefficient(hp.a2)
        return float(n * m * c * np.sum(R1 * R2))
    g = hp.h1 + hp.h2 - 2.0
    B12 = directed_overlap_coefficient(hp.a1, hp.a2)
    B21 = directed_overlap_coefficient(hp.a2, hp.a1)
    Rp = _rect_plus_grid(en, em, g)
    Rm = _rect_plus_grid(em, en, g).T
    F12 = B12 * Rp + B21 * Rm   # <I_i, J'_j>
    F21 = B21 * Rp + B12 * Rm   # <J_i, I'_j>
    return float(n * m * np.sum(F12 * F21))


def _block_abs_power(t, lo, hi, gamma):
    # int_lo^hi |s - t|^gamma ds, exact, valid for t inside or outside [lo, hi]
    Q = lambda u: np.sign(u) * np.abs(u) ** (gamma + 1.0) / (gamma + 1.0)
    return Q(hi - t) - Q(lo - t)


def _block_pos_power(t, lo, hi, gamma, direction):
    # direction +1: int (t - s)_+^gamma ; -1: int (s - t)_+^gamma  over s in [lo, hi]
    P = lambda u: np.maximum(u, 0.0) ** (gamma + 1.0) / (gamma + 1.0)
    if direction > 0:
        return P(t - lo) - P(t - hi)
    return P(hi - t) - P(lo - t)


def _block_piece_rule(lo, hi, cfg: QuadratureConfig):
    """t-quadrature on [0,1] with panels graded toward the block edges lo, hi."""
    m_sub = max(6, cfg.panels_per_unit // 8)
    g = cfg.grading_exponent
    segs = []
    if lo > 0.0:
        segs.append(graded_edges(0.0, lo, m_sub, g, toward="b"))
    mid = 0.5 * (lo + hi)
    segs.append(graded_edges(lo, mid, m_sub, g, toward="a"))
    segs.append(graded_edges(mid, hi, m_sub, g, toward="b"))
    if hi < 1.0:
        segs.append(graded_edges(hi, 1.0, m_sub, g, toward="a"))
    nodes, wts = zip(*(gauss_panels(e, cfg.nodes_per_panel) for e in segs))
    return np.concatenate(nodes), np.concatenate(wts)


def _blocks_limit(hp: HurstPair, n: int, transposed: bool, cfg: QuadratureConfig) -> float:
    hp.require_square_integrable()

    def compute(config: QuadratureConfig) -> float:
        tot = 0.0
        for i in range(n):
            lo, hi = i / n, (i + 1) / n
            t, w = _block_piece_rule(lo, hi, config)
            if not transposed:
                u = _block_abs_power(t, lo, hi, 2.0 * hp.h1 - 2.0)
                v = _block_abs_power(t, lo, hi, 2.0 * hp.h2 - 2.0)
                tot += float(np.sum(w * u * v))
            else:
                g = hp.h1 + hp.h2 - 2.0
                B12 = directed_overlap_coefficient(hp.a1, hp.a2)
                B21 = directed_overlap_coefficient(hp.a2, hp.a1)
                gp = _block_pos_power(t, lo, hi, g, +1)
                gm = _block_pos_power(t, lo, hi, g, -1)
                tot += float(np.sum(w * (B12 * gp + B21 * gm) * (B21 * gp + B12 * gm)))
        if not transposed:
            tot *= overlap_coefficient(hp.a1) * overlap_coefficient(hp.a2)
        return n * tot

    value = compute(cfg)
    finer = QuadratureConfig(
        truncation_left=cfg.truncation_left,
        panels_per_unit=2 * cfg.panels_per_unit,
        grading_exponent=cfg.grading_exponent,
        nodes_per_panel=cfg.nodes_per_panel,
        abs_tol=cfg.abs_tol,
        rel_tol=cfg.rel_tol,
    )
    refined = compute(finer)
    if abs(refined - value) > cfg.rel_tol * max(abs(refined), 1e-300) + cfg.abs_tol * 1e-6:
        finest = QuadratureConfig(
            truncation_left=cfg.truncation_left,
            panels_per_unit=4 * cfg.panels_per_unit,
            grading_exponent=cfg.grading_exponent,
            nodes_per_panel=cfg.nodes_per_panel + 8,
            abs_tol=cfg.abs_tol,
            rel_tol=cfg.rel_tol,
        )
        final = compute(finest)
        if abs(final - refined) > cfg.rel_tol * max(abs(final), 1e-300) + cfg.abs_tol * 1e-6:
            raise ToleranceError("block-limit inner product did not converge")
        return final
    return refined


def _pair_inner(a: KernelSpec, b: KernelSpec, transposed: bool, cfg: QuadratureConfig) -> float:
    fa, ba = a.flatten()
    fb, bb = b.flatten()
    if fa == 0.0 or fb == 0.0:
        return 0.0
    if ba.hurst != bb.hurst:
        raise DomainError("inner product requires a shared Hurst pair")
    hp = ba.hurst
    kinds = (ba.kind, bb.kind)
    if kinds == ("limit", "limit"):
        core = _limit_limit(hp, transposed)
    elif kinds == ("blocks", "blocks"):
        core = _blocks_blocks(hp, ba.n, bb.n, transposed)
    elif kinds == ("blocks", "limit"):
        core = _blocks_limit(hp, ba.n, transposed, cfg)
    elif kinds == ("limit", "blocks"):
        # <f_limit, f_n> = <f_n, f_limit>; <f_limit, T f_n> = <f_n, T f_limit>
        core = _blocks_limit(hp, bb.n, transposed, cfg)
    else:
        raise DomainError(f"unsupported kernel pairing {kinds}")
    return fa * fb * core


def inner_product(a: KernelSpec, b: KernelSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """L2(R^2) inner product of the raw (unsymmetrized) kernels."""
    return _pair_inner(a, b, transposed=False, cfg=cfg)


def inner_product_transposed(a: KernelSpec, b: KernelSpec,
                             cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Inner product of a with the argument-swapped b: <a(x,y), b(y,x)>."""
    return _pair_inner(a, b, transposed=True, cfg=cfg)


def inner_product_sym(a: KernelSpec, b: KernelSpec,
                      cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Inner product of the symmetrized kernels.

    sym g = (g(x,y) + g(y,x))/2, and <sym a, sym b> = (<a,b> + <a, b swapped>)/2.
    For h1 = h2 the kernels are already symmetric and this equals inner_product.
    """
    return 0.5 * (_pair_inner(a, b, False, cfg) + _pair_inner(a, b, True, cfg))


def l2_distance(a: KernelSpec, b: KernelSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """||a - b|| in L2(R^2), clamped at zero against roundoff."""
    d2 = (inner_product(a, a, cfg) - 2.0 * inner_product(a, b, cfg)
          + inner_product(b, b, cfg))
    return math.sqrt(max(d2, 0.0))


def l2_distance_sym(a: KernelSpec, b: KernelSpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """||sym a - sym b||; proportional to l2_distance with an h-only constant."""
    d2 = (inner_product_sym(a, a, cfg) - 2.0 * inner_product_sym(a, b, cfg)
          + inner_product_sym(b, b, cfg))
    return math.sqrt(max(d2, 0.0))


# ---------------------------------------------------------------------------
# analytic norms of the limit kernel, full and domain truncated
# ---------------------------------------------------------------------------

def limit_norm_sq(hurst: HurstPair) -> float:
    """||f_limit||^2 over the full plane, closed form."""
    return _limit_limit(hurst, transposed=False)


def limit_sym_norm_sq(hurst: HurstPair) -> float:
    """||sym f_limit||^2 over the full plane, closed form."""
    return 0.5 * (_limit_limit(hurst, False) + _limit_limit(hurst, True))


def _restricted_pair_factor(smin, d, alo, ahi, p_lo, p_hi):
    """int over x in [p_lo, p_hi] of (smin - x)_+^alo ((smin + d) - x)_+^ahi.

    Vectorized over smin (and d broadcastable).  Uses the regularized
    incomplete beta in its complement form, stable as d -> 0.
    """
    nu = -alo - ahi - 1.0
    hi_eff = np.minimum(p_hi, smin)
    live = hi_eff > p_lo
    with np.errstate(divide="ignore", invalid="ignore"):
        xlo = np.where(live, d / np.maximum(smin - p_lo + d, 1e-300), 0.0)
        xhi = np.where(live, d / np.maximum(smin - hi_eff + d, 1e-300), 0.0)
    B = sp.beta(alo + 1.0, nu)
    Ic = lambda z: sp.betainc(nu, alo + 1.0, np.clip(z, 0.0, 1.0))
    val = B * d ** (alo + ahi + 1.0) * (Ic(xhi) - Ic(xlo))
    return np.where(live, val, 0.0)


def _dm_pair_integral(hurst: HurstPair, p_lo: float, p_hi: float,
                      n_d: int = 36, q_d: int = 14, n_m: int = 24, q_m: int = 8):
    """(squared, mixed) masses of the limit kernel with both coordinates in [p_lo, p_hi]:

        squared = int int_{[p_lo,p_hi]^2} f(x,y)^2 dx dy
        mixed   = int int_{[p_lo,p_hi]^2} f(x,y) f(y,x) dx dy

    computed in difference coordinates (d = |s - t|, m = min(s, t)) with a
    Gauss-Jacobi rule absorbing the d^gamma diagonal weight.
    """
    a1, a2 = hurst.a1, hurst.a2
    gamma = 2.0 * (hurst.h1 + hurst.h2) - 4.0
    if gamma <= -1.0:
        raise DomainError("kernel norm diverges at h1 + h2 <= 3/2")

    def accumulate(d_nodes, d_weights, weight_has_power):
        tot_sq = 0.0
        tot_mx = 0.0
        for d, wd in zip(d_nodes, d_weights):
            mn, mw = gauss_panels(np.linspace(0.0, 1.0 - d, n_m), q_m)
            k11 = _restricted_pair_factor(mn, d, a1, a1, p_lo, p_hi)
            k22 = _restricted_pair_factor(mn, d, a2, a2, p_lo, p_hi)
            k12 = _restricted_pair_factor(mn, d, a1, a2, p_lo, p_hi)
            k21 = _restricted_pair_factor(mn, d, a2, a1, p_lo, p_hi)
            scale = d ** (-gamma) if weight_has_power else 1.0
            tot_sq += wd * scale * 2.0 * float(np.sum(mw * k11 * k22))
            tot_mx += wd * scale * 2.0 * float(np.sum(mw * k12 * k21))
        return tot_sq, tot_mx

    # d in [0, 1/2]: Jacobi rule with weight d^gamma; factors carry d^-gamma net
    dj, wj = jacobi_left_rule(0.5, gamma, q_d * 3)
    sq1, mx1 = accumulate(dj, wj, weight_has_power=True)
    # d in [1/2, 1]: plain panels
    dn, dw = gauss_panels(np.linspace(0.5, 1.0, n_d // 4 + 2), q_d)
    sq2, mx2 = accumulate(dn, dw, weight_has_power=False)
    return sq1 + sq2, mx1 + mx2


def truncated_sym_norm_sq(hurst: HurstPair, truncation_left: float) -> float:
    """||sym f_limit||^2 with both coordinates restricted to [truncation_left, 1]."""
    sq, mx = _dm_pair_integral(hurst, truncation_left, 1.0)
    return 0.5 * (sq + mx)


def tail_norm_bound(hurst: HurstPair, truncation_left: float) -> float:
    """Upper estimate of the norm-squared mass lost by cutting x (or y) below the left edge.

    One-coordinate tails dominate: for x < L the squared kernel integrates like
    |L|^(2 h1 - 2), weighted by the closed-form y-mass, plus the symmetric term.
    """
    hurst.require_square_integrable()
    L = abs(truncation_left)
    out = 0.0
    for (ha, hb) in ((hurst.h1, hurst.h2), (hurst.h2, hurst.h1)):
        aa, ab = ha - 1.5, hb - 1.5
        x_tail = L ** (2.0 * ha - 2.0) / (2.0 - 2.0 * ha)
        y_mass = overlap_coefficient(ab) * rect_power_integral((0, 1), (0, 1), 2.0 * ab + 1.0)
        out += x_tail * y_mass
    return out


def truncation_for_tail(hurst: HurstPair, abs_tol: float) -> float:
    """Left cut L < 0 such that tail_norm_bound(hurst, L) <= abs_tol."""
    hurst.require_square_integrable()
    lo, hi = 1.0, 1e18
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if tail_norm_bound(hurst, -mid) > abs_tol:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0001:
            break
    return -hi
