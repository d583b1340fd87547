"""chaoslab: a numerical laboratory for second Wiener chaos laws.

Builds the fractional product kernels behind the quadratic covariation
statistic and its Rosenblatt-type limit, discretizes the associated
Hilbert-Schmidt operators, samples the resulting second-chaos laws by two
independent routes, and estimates total variation distances to verify the
advertised convergence rates.
"""

from .kernels import (
    DomainError,
    HurstPair,
    KernelSpec,
    QuadratureConfig,
    ToleranceError,
    eval_kernel,
    inner_product,
    inner_product_sym,
    inner_product_transposed,
    l2_distance,
    l2_distance_sym,
    limit_norm_sq,
    limit_sym_norm_sq,
    overlap_coefficient,
    directed_overlap_coefficient,
    rect_power_integral,
    truncated_sym_norm_sq,
)

__version__ = "0.1.0"
