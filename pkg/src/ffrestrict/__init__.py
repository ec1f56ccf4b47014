"""Restriction and extension estimates for measures on F_p^n."""

__version__ = "0.1.0"

from .field import Field, balanced_abs, dot_mod, index_to_point, is_prime, point_to_index
from .fourier import GridFn, convolve, dft, idft, lp_mu_norm, lq_norm
from .measures import (
    Measure, PointSet, SpectralReport, bohr_set, combined_measure, cube_set, paraboloid_set,
    random_set, spectral_report, support_decay_check, uniform_measure,
)
from .restriction import (
    RStarEstimate, corollary_q_bound, critical_q, extension, necessary_q, restriction_ratio,
    rstar_2_2_exact, rstar_lower_iterate, rstar_witness_cube, sharpness_tau,
)
from .stein_tomas import convolution_inequality_probe, kernel_K, kernel_bounds
