"""Log-log least squares used by every rate experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["RateFit", "fit_loglog", "compare_exponent"]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    stderr_slope: float
    r_squared: float
    points: tuple


def fit_loglog(points) -> RateFit:
    """OLS of log y on log x.  Needs >= 3 strictly positive points.

    The slope standard error comes from the usual residual estimate with
    n - 2 degrees of freedom; exact fits report stderr 0.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("rate fit needs at least 3 points")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("rate fit needs strictly positive coordinates")
    lx, ly = np.log(xs), np.log(ys)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    if sxx == 0.0:
        raise ValueError("all x coincide; slope undefined")
    slope = float(np.sum((lx - lx.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    rss = float(np.sum(resid ** 2))
    tss = float(np.sum((ly - ly.mean()) ** 2))
    dof = len(pts) - 2
    stderr = math.sqrt(rss / dof / sxx) if dof > 0 and rss > 0 else 0.0
    r2 = 1.0 if tss == 0.0 else 1.0 - rss / tss
    return RateFit(slope=slope, intercept=intercept, stderr_slope=stderr,
                   r_squared=r2, points=tuple(pts))


def compare_exponent(fit: RateFit, target: float, tol: float) -> bool:
    """|slope - target| <= tol + 2 * stderr, absorbing Monte Carlo noise."""
    return abs(fit.slope - target) <= tol + 2.0 * fit.stderr_slope
