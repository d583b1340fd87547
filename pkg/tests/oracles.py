"""Independent numerical oracles for the test suite.

Nothing here uses the package's closed forms: overlap constants come from
adaptive quadrature with algebraic endpoint weights, inner products from a
deep-truncation difference-coordinate quadrature built only on Gauss-Legendre
and Gauss-Jacobi panels, covariances from driver-coordinate quadrature of the
defining representation.  These oracles validate the closed-form paths and
stay independent of them.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, stats
from scipy.special import roots_jacobi


def _panels(edges, q):
    x, w = leggauss(q)
    e = np.asarray(edges, float)
    mid = 0.5 * (e[1:] + e[:-1])
    half = 0.5 * (e[1:] - e[:-1])
    return (mid[:, None] + half[:, None] * x[None, :]).ravel(), (half[:, None] * w[None, :]).ravel()


def _jacobi_left(width, a, q=32):
    x, w = roots_jacobi(q, 0.0, a)
    return width * (x + 1.0) / 2.0, w * (width / 2.0) ** (a + 1.0)


def overlap_constant_oracle(alpha: float) -> float:
    """int_R (1-x)_+^alpha (-x)_+^alpha dx by adaptive quadrature.

    Substituting u = -x gives int_0^inf u^alpha (1+u)^alpha du, split at 1;
    the far half maps onto [0, 1] by u -> 1/w.  Both halves carry an
    algebraic endpoint weight handled by QUADPACK's QAWS.
    """
    near, _ = integrate.quad(lambda u: (1.0 + u) ** alpha, 0.0, 1.0,
                             weight="alg", wvar=(alpha, 0.0),
                             epsabs=0.0, epsrel=1e-12)
    far, _ = integrate.quad(lambda w: (1.0 + w) ** alpha, 0.0, 1.0,
                            weight="alg", wvar=(-2.0 * alpha - 2.0, 0.0),
                            epsabs=0.0, epsrel=1e-12)
    return near + far


def eval_limit_kernel_oracle(h1: float, h2: float, x: float, y: float) -> float:
    """int_max(x,y,0)^1 (s-x)^(h1-3/2) (s-y)^(h2-3/2) ds by adaptive quadrature."""
    a1, a2 = h1 - 1.5, h2 - 1.5
    m = max(x, y, 0.0)
    if m >= 1.0:
        return 0.0
    if x >= y:
        sing_pow, smooth = a1, lambda s: (s - y) ** a2
    else:
        sing_pow, smooth = a2, lambda s: (s - x) ** a1
    if m <= 0.0:
        val, _ = integrate.quad(lambda s: (s - x) ** a1 * (s - y) ** a2, 0.0, 1.0,
                                epsabs=0.0, epsrel=1e-12)
        return val
    val, _ = integrate.quad(smooth, m, 1.0, weight="alg", wvar=(sing_pow, 0.0),
                            epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def rect_power_mc_oracle(s_interval, t_interval, gamma, count=400_000, seed=7):
    """Monte Carlo estimate (mean, stderr) of the rectangle |s-t|^gamma integral."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(*s_interval, count)
    t = rng.uniform(*t_interval, count)
    vals = np.abs(s - t) ** gamma
    area = (s_interval[1] - s_interval[0]) * (t_interval[1] - t_interval[0])
    return area * vals.mean(), area * vals.std() / np.sqrt(count)


def limit_inner_product_oracle(h1: float, h2: float, left_cut: float = -1e12) -> float:
    """<f_limit, f_limit> with no beta identities anywhere.

    Collapses x and y by direct quadrature (Gauss-Jacobi near the overlap
    endpoint, geometric Gauss-Legendre panels into the power tail down to
    left_cut), then integrates over the (s, t) square in difference
    coordinates with the diagonal weight absorbed by a Jacobi rule.
    Accuracy ~1e-5 relative at the default cut.
    """
    a1, a2 = h1 - 1.5, h2 - 1.5
    top = 1.0 - left_cut

    def collapsed(d: float, a: float) -> float:
        # int_0^{top} u^a (u+d)^a du  (x-collapse for |s-t| = d, up to the cut)
        uj, wj = _jacobi_left(d, a, 32)
        val = float(np.sum(wj * (uj + d) ** a))
        edges = [d]
        w = 0.5 * d
        while edges[-1] < top:
            edges.append(min(edges[-1] + w, top))
            w *= 2.0
        un, uw = _panels(np.array(edges), 20)
        return val + float(np.sum(uw * un ** a * (un + d) ** a))

    def m_length(d: float) -> float:
        return 1.0 - d

    # d in [0, 1/2] with Jacobi weight d^gamma, gamma the combined diagonal power
    gamma = 2.0 * (h1 + h2) - 4.0
    dj, wdj = _jacobi_left(0.5, gamma, 48)
    total = 0.0
    for d, wd in zip(dj, wdj):
        k1 = collapsed(d, a1) / d ** (2.0 * a1 + 1.0)
        k2 = collapsed(d, a2) / d ** (2.0 * a2 + 1.0)
        total += wd * 2.0 * m_length(d) * k1 * k2
    dn, dw = _panels(np.linspace(0.5, 1.0, 8), 16)
    for d, wd in zip(dn, dw):
        total += wd * 2.0 * m_length(d) * collapsed(d, a1) * collapsed(d, a2)
    return total


def _block_antideriv(y, lo, hi, a):
    P = lambda u: np.maximum(u, 0.0) ** (a + 1.0) / (a + 1.0)
    return P(hi - y) - P(lo - y)


def increment_cov_oracle(h1: float, h2: float, i: int, j: int, n: int,
                         c1: float, c2: float) -> float:
    """E[inc1_i inc2_j] by quadrature over the shared driver coordinate.

    The representation gives c1 c2 int_R I_i(y) J_j(y) dy with per-window
    one-sided power integrals I, J (closed antiderivatives).  The y mesh is
    refined toward all four window edges and grown geometrically into the
    left tail; accuracy ~1e-7 relative.
    """
    a1, a2 = h1 - 1.5, h2 - 1.5
    bi = (i / n, (i + 1) / n)
    bj = (j / n, (j + 1) / n)
    pts = sorted({bi[0], bi[1], bj[0], bj[1]})
    knots = set()
    for k in range(len(pts) - 1):
        knots.update(np.linspace(pts[k], pts[k + 1], 33))
    for p in pts:
        for e in range(3, 13):
            knots.add(p - 10.0 ** (-e))
            knots.add(p + 10.0 ** (-e))
    lo = min(pts)
    w = 1.0
    tail = lo
    while tail > lo - 2.0 ** 50:
        tail -= w
        knots.add(tail)
        w *= 2.0
    edges = np.unique(np.clip(sorted(knots), tail, max(pts)))
    ys, ws = _panels(edges, 10)
    vals = _block_antideriv(ys, bi[0], bi[1], a1) * _block_antideriv(ys, bj[0], bj[1], a2)
    return c1 * c2 * float(np.sum(ws * vals))


def gaussian_tv_oracle(mu: float) -> float:
    """TV distance between N(0,1) and N(mu,1): 2 Phi(|mu|/2) - 1."""
    return 2.0 * stats.norm.cdf(abs(mu) / 2.0) - 1.0


def chi2_small_ball_slope_oracle(k: int, u_grid) -> float:
    """Slope of log P(chi2_k <= u) vs log u from the exact CDF."""
    u = np.asarray(u_grid, dtype=float)
    p = stats.chi2.cdf(u, df=k)
    A = np.vstack([np.log(u), np.ones_like(u)]).T
    slope, _ = np.linalg.lstsq(A, np.log(p), rcond=None)[0]
    return float(slope)
