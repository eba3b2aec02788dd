"""Minkowski valuations represented by spherical convolution, ``h_{Phi_i K} = s_i(K, .) * g``."""
from .body import (Body, GridBody, ZonalBody, ball, grid_body_from_expansion,
                   grid_body_from_profile, harmonic_perturbation, hausdorff_distance,
                   intrinsic_volume, lp_distance, make_grid_body, make_zonal_body,
                   mean_width, minkowski_sum, random_body, rotate, translate, tv_distance)
from .discriminant import AreaDensity, area_density, box_n, mixed_discriminant
from .errors import (AliasingError, DomainError, HypothesisError, ImageNotConvex, NotConvex,
                     NotPositive, NumericalValidityError, RepresentationMismatch, ZeroBody,
                     ZeroMass)
from .harmonics import (HarmonicExpansion, SphereGrid, dimension_N, gegenbauer_rule,
                        legendre_eval, project, smooth_Mj, ualpha_norm_estimate,
                        zonal_multiplier)
from .iterate import IterationTrace, fixed_point_residual, iterate, normalize, psi_ratio
from .valuation import (Kernel, apply_valuation, convolve, decay_profile,
                        derivative_multiplier_check, lambda_degree1, lambda_degree_i,
                        make_kernel, projection_kernel, spectral_gap_check)

__version__ = "0.1.0"
