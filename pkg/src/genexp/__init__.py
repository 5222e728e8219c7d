"""Generalised exponential maps ``f(z) = g(Re z) h(Im z) - a``: constants, hairs, endpoints and basin pictures."""

from .core import GenExpMap, build_map, compute_constants, find_fixed_point
from .curve import CurveSpec, build_curve
from .growth import GrowthSpec, build_growth
from .pullback import accumulate, endpoint, inverse_branch, pullback_n, speed_compare, trace_hair
from .render import GridJob, classify_point, render_grid, write_csv, write_image
from .symbolic import ExternalAddress, build_shadow_params, is_g_bounded, partial_address, verify_shadowing

__all__ = [
    "CurveSpec",
    "ExternalAddress",
    "GenExpMap",
    "GridJob",
    "GrowthSpec",
    "accumulate",
    "build_curve",
    "build_growth",
    "build_map",
    "build_shadow_params",
    "classify_point",
    "compute_constants",
    "endpoint",
    "find_fixed_point",
    "inverse_branch",
    "is_g_bounded",
    "partial_address",
    "pullback_n",
    "render_grid",
    "speed_compare",
    "trace_hair",
    "verify_shadowing",
    "write_csv",
    "write_image",
]
