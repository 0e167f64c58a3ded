"""Wrapped arithmetic for circle-valued data.

Angles are stored as arbitrary real representatives of classes in R/2piZ;
every difference of two angles must go through :func:`wrapped_diff` so that
results never depend on the representative chosen.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(theta):
    """Reduce an angle (scalar or array) to its representative in (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta), TWO_PI)


def wrapped_diff(a, b):
    """Shortest signed difference a - b, as the representative in (-pi, pi].

    Invariant under adding any multiple of 2*pi to either argument.
    Works elementwise on arrays.
    """
    return np.pi - np.mod(np.pi - (np.asarray(a) - np.asarray(b)), TWO_PI)


def line_diff(a, b):
    """Difference of two line (mod-pi) angles, in (-pi/2, pi/2].

    Used when comparing unoriented tangent directions: theta and theta + pi
    label the same line, so the distance is measured mod pi.
    """
    half = 0.5 * np.pi
    return half - np.mod(half - (np.asarray(a) - np.asarray(b)), np.pi)
