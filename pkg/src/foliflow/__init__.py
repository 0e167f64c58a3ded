"""Geometric-flow numerics for foliations of the plane.

Solves the degenerate tangent-angle evolution equation on a grid,
reconstructs the corresponding family of curves moving by curve shortening
flow, and cross-validates both directions against an independent curve-flow
integrator and a catalog of exact solutions.
"""

__version__ = "0.1.0"

from .angles import line_diff, wrap_angle, wrapped_diff
from .curve import Curve, curve_curvature, curve_tangent_angle, resample_uniform
from .field import AngleField, Frame, central_gradient, central_hessian, frame_at, interp_angle
from .grid import Grid2D

__all__ = [
    "__version__",
    "AngleField",
    "Curve",
    "Frame",
    "Grid2D",
    "central_gradient",
    "central_hessian",
    "curve_curvature",
    "curve_tangent_angle",
    "frame_at",
    "interp_angle",
    "line_diff",
    "resample_uniform",
    "wrap_angle",
    "wrapped_diff",
]
