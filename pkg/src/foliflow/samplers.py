"""Uniform access to angle fields for the ODE tracers.

A sampler provides angle(x, y, t) and gradient(x, y, t), either from the
closed-form catalog (optionally with a boundary-vanishing perturbation) or
from grid snapshots via bilinear interpolation with a local lift. Grid
samplers interpolate node-wise central gradients rather than differentiating
the bilinear interpolant.
"""

import bisect

import numpy as np

from . import catalog as cat
from .angles import wrapped_diff
from .errors import ConfigError, OutOfDomainError
from .field import AngleField, interp_angle, interp_gradient
from .grid import Grid2D


class FieldSampler:
    """Interface: point evaluation of an angle field and its gradient."""

    def angle(self, x, y, t):
        raise NotImplementedError

    def gradient(self, x, y, t):
        raise NotImplementedError

    def trace_box(self):
        """Safe box (xmin, xmax, ymin, ymax) for ODE tracing, or None if unbounded."""
        return None

    def is_valid(self, x, y):
        return True


class CatalogField(FieldSampler):
    """Exact evaluation of a catalog solution."""

    def __init__(self, sol: cat.CatalogSolution):
        self.sol = sol
        self._singular = sol.kind == "polar"

    def angle(self, x, y, t):
        return cat.angle_array(self.sol, x, y, t)

    def gradient(self, x, y, t):
        return cat.gradient_array(self.sol, x, y, t)

    def is_valid(self, x, y):
        if not self._singular:
            return True
        return bool(np.all(cat.valid_mask(self.sol, x, y)))


class PerturbedField(FieldSampler):
    """Catalog base plus amplitude * bump(x, y); the bump vanishes on the
    window boundary so Dirichlet data stays compatible with the base field."""

    def __init__(self, sol: cat.CatalogSolution, amplitude: float, bump_value, bump_grad):
        if amplitude < 0:
            raise ConfigError("perturbation amplitude must be >= 0")
        self.sol = sol
        self.amplitude = float(amplitude)
        self._bump_value = bump_value
        self._bump_grad = bump_grad

    def angle(self, x, y, t):
        return cat.angle_array(self.sol, x, y, t) + self.amplitude * self._bump_value(x, y)

    def gradient(self, x, y, t):
        gx, gy = cat.gradient_array(self.sol, x, y, t)
        bx, by = self._bump_grad(x, y)
        return gx + self.amplitude * bx, gy + self.amplitude * by

    def is_valid(self, x, y):
        return bool(np.all(cat.valid_mask(self.sol, x, y)))


def sine_bump(window, cells=(2, 2)):
    """Product-of-sines bump vanishing on every edge of the window.

    Returns (value, gradient) callables. cells = (kx, ky) half-wave counts;
    (2, 2) on [-1, 1]^2 reproduces sin(pi x) sin(pi y).
    """
    xmin, xmax, ymin, ymax = window
    kx, ky = cells
    wx = kx * np.pi / (xmax - xmin)
    wy = ky * np.pi / (ymax - ymin)

    def value(x, y):
        return np.sin(wx * (np.asarray(x) - xmin)) * np.sin(wy * (np.asarray(y) - ymin))

    def gradient(x, y):
        sx = np.sin(wx * (np.asarray(x) - xmin))
        sy = np.sin(wy * (np.asarray(y) - ymin))
        cx = np.cos(wx * (np.asarray(x) - xmin))
        cy = np.cos(wy * (np.asarray(y) - ymin))
        return wx * cx * sy, wy * sx * cy

    return value, gradient


BUMPS = {"sine": sine_bump}


class GridField(FieldSampler):
    """Single AngleField snapshot; time argument is ignored."""

    def __init__(self, field: AngleField, margin_cells: int = 2):
        self.field = field
        self._box = field.grid.trace_box(margin_cells)

    def angle(self, x, y, t):
        return interp_angle(self.field, (x, y))

    def gradient(self, x, y, t):
        return interp_gradient(self.field, (x, y))

    def trace_box(self):
        return self._box


class GridSeries(FieldSampler):
    """Snapshots of AngleFields on a common grid, blended linearly in time.

    Angle blending happens in a local lift (wrapped difference between the
    bracketing snapshots); gradients blend componentwise. Query times are
    clamped to the sampled range within a small tolerance.
    """

    def __init__(self, times, fields, margin_cells: int = 2):
        times = [float(t) for t in times]
        if len(times) != len(fields) or not fields:
            raise ConfigError("times and fields must be nonempty and match")
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigError("snapshot times must be strictly increasing")
        grid = fields[0].grid
        if any(f.grid is not grid and f.grid != grid for f in fields):
            raise ConfigError("all snapshots must share one grid")
        self.times = times
        self.fields = list(fields)
        self._box = grid.trace_box(margin_cells)
        self.grid = grid
        self._constant = all(f is fields[0] for f in fields)

    @classmethod
    def stationary(cls, field: AngleField, times):
        return cls(list(times), [field] * len(times))

    def _bracket(self, t):
        t0, t1 = self.times[0], self.times[-1]
        span = max(t1 - t0, 1.0)
        if t < t0 - 1e-9 * span or t > t1 + 1e-9 * span:
            raise OutOfDomainError(f"time {t} outside sampled range [{t0}, {t1}]")
        t = min(max(t, t0), t1)
        k = bisect.bisect_right(self.times, t) - 1
        k = min(max(k, 0), len(self.times) - 2) if len(self.times) > 1 else 0
        return k, t

    def angle(self, x, y, t):
        if self._constant:
            return interp_angle(self.fields[0], (x, y))
        k, t = self._bracket(t)
        fa = self.fields[k]
        if len(self.fields) == 1 or self.fields[k + 1] is fa:
            return interp_angle(fa, (x, y))
        fb = self.fields[k + 1]
        w = (t - self.times[k]) / (self.times[k + 1] - self.times[k])
        a = interp_angle(fa, (x, y))
        b = interp_angle(fb, (x, y))
        return a + w * float(wrapped_diff(b, a))

    def gradient(self, x, y, t):
        if self._constant:
            return interp_gradient(self.fields[0], (x, y))
        k, t = self._bracket(t)
        fa = self.fields[k]
        if len(self.fields) == 1 or self.fields[k + 1] is fa:
            return interp_gradient(fa, (x, y))
        fb = self.fields[k + 1]
        w = (t - self.times[k]) / (self.times[k + 1] - self.times[k])
        gax, gay = interp_gradient(fa, (x, y))
        gbx, gby = interp_gradient(fb, (x, y))
        return (1 - w) * gax + w * gbx, (1 - w) * gay + w * gby

    def trace_box(self):
        return self._box


def sample_to_grid(sampler: FieldSampler, grid: Grid2D, t: float = 0.0, fill: float = 0.0):
    """Sample an exact field onto grid nodes.

    Returns (AngleField, valid_mask). Nodes where the field is undefined
    (e.g. the polar origin) get `fill` and mask False; callers must mask.
    """
    xx, yy = grid.node_arrays()
    sol = getattr(sampler, "sol", None)
    if sol is not None:
        mask = cat.valid_mask(sol, xx, yy)
    else:
        mask = np.ones_like(xx, dtype=bool)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.asarray(sampler.angle(xx, yy, t), dtype=float)
    values = np.where(mask, values, fill)
    return AngleField(grid, values, time=t), mask


def catalog_on_grid(sol: cat.CatalogSolution, grid: Grid2D, t: float = 0.0):
    """Convenience: sample a catalog solution onto a grid."""
    return sample_to_grid(CatalogField(sol), grid, t)


__all__ = [
    "FieldSampler",
    "CatalogField",
    "PerturbedField",
    "GridField",
    "GridSeries",
    "sine_bump",
    "BUMPS",
    "sample_to_grid",
    "catalog_on_grid",
]
