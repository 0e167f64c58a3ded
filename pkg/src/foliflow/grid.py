"""Uniform rectangular grids with equal spacing in x and y."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfDomainError


@dataclass(frozen=True)
class Grid2D:
    """Uniform node lattice: node(i, j) = (x0 + i*h, y0 + j*h).

    Spacing is the same in both directions; stencil code relies on it.
    """

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.h > 0):
            raise ConfigError(f"grid spacing must be positive, got {self.h}")
        if self.nx < 3 or self.ny < 3:
            raise ConfigError(f"grid needs nx, ny >= 3, got {self.nx}x{self.ny}")

    @classmethod
    def from_window(cls, xmin, xmax, ymin, ymax, nx, ny):
        """Build a grid spanning the window; x and y spacings must agree."""
        hx = (xmax - xmin) / (nx - 1)
        hy = (ymax - ymin) / (ny - 1)
        if abs(hx - hy) > 1e-12 * max(abs(hx), abs(hy)):
            raise ConfigError(
                f"window/resolution give unequal spacings hx={hx!r}, hy={hy!r}; "
                "equal spacing in x and y is required"
            )
        return cls(xmin, ymin, hx, nx, ny)

    @property
    def xmax(self):
        return self.x0 + (self.nx - 1) * self.h

    @property
    def ymax(self):
        return self.y0 + (self.ny - 1) * self.h

    def node(self, i, j):
        return (self.x0 + i * self.h, self.y0 + j * self.h)

    def xs(self):
        return self.x0 + self.h * np.arange(self.nx)

    def ys(self):
        return self.y0 + self.h * np.arange(self.ny)

    def node_arrays(self):
        """Meshgrid of node coordinates, shape (nx, ny) each, indexed [i, j]."""
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def contains(self, x, y, margin: float = 0.0):
        return (
            self.x0 + margin <= x <= self.xmax - margin
            and self.y0 + margin <= y <= self.ymax - margin
        )

    def trace_box(self, margin_cells: int = 2):
        """Safe interior box for ODE tracing, `margin_cells` nodes in from the edge."""
        m = margin_cells * self.h
        return (self.x0 + m, self.xmax - m, self.y0 + m, self.ymax - m)

    def locate(self, x, y):
        """Cell containing (x, y): lower-left node index and in-cell fractions.

        Raises OutOfDomainError outside the closed bounding box.
        """
        if not self.contains(x, y):
            raise OutOfDomainError(
                f"point ({x!r}, {y!r}) outside grid "
                f"[{self.x0}, {self.xmax}] x [{self.y0}, {self.ymax}]"
            )
        fi = (x - self.x0) / self.h
        fj = (y - self.y0) / self.h
        i = min(int(fi), self.nx - 2)
        j = min(int(fj), self.ny - 2)
        return i, j, fi - i, fj - j
