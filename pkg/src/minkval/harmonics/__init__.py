"""Legendre machinery, quadrature, and spherical-harmonic transforms."""
from .expansion import (GRID, ZONAL, HarmonicExpansion, analyze, evaluate, project,
                        project_direct, smooth_Mj, spectral_tails, sup_norm, synthesize,
                        theta_cutoff, ualpha_norm_estimate, zonal_analyze, zonal_multiplier,
                        zonal_multipliers, zonal_values)
from .legendre import ball_volume, dimension_N, legendre_eval, legendre_table, sphere_area
from .quadrature import (IntervalRule, SphereGrid, gauss_legendre, gegenbauer_rule, tangent_frame,
                         to_spherical)

__all__ = [
    "GRID", "ZONAL", "HarmonicExpansion", "IntervalRule", "SphereGrid", "analyze",
    "ball_volume", "dimension_N", "evaluate", "gauss_legendre", "gegenbauer_rule", "legendre_eval",
    "legendre_table", "project", "project_direct", "smooth_Mj", "spectral_tails",
    "sphere_area", "sup_norm", "synthesize", "tangent_frame", "theta_cutoff",
    "to_spherical", "ualpha_norm_estimate", "zonal_analyze", "zonal_multiplier",
    "zonal_multipliers", "zonal_values",
]
