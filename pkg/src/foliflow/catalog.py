"""Closed-form angle fields and their exactly-evolving leaves.

Four families: constant(c), linear(a, b, c), polar(c) on the punctured plane,
and grim-reaper(a, C). All four angle fields are independent of time; the
polar family solves the stationary equation only for c in {0, pi/2, pi, 3pi/2}.
"""

from dataclasses import dataclass

import numpy as np

from .angles import wrap_angle
from .curve import Curve
from .errors import ExtinctionError, FoliflowError, OutOfDomainError

POLAR_SINGULAR_RADIUS = 1e-9
_STATIONARY_POLAR_OFFSETS = (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi)


@dataclass(frozen=True)
class CatalogSolution:
    """One catalog entry; the meaning of a, b, c depends on `kind`.

    constant:    theta = c
    linear:      theta = a*x + b*y + c
    polar:       theta = atan2(y, x) + c        (defined for r > 0)
    grim-reaper: theta = a*x, leaves offset by C = c
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "polar", "grim-reaper"):
            raise FoliflowError(f"unknown catalog kind {self.kind!r}")
        if self.kind == "grim-reaper" and not self.a > 0:
            raise FoliflowError("grim-reaper slope parameter must be positive")

    @property
    def is_stationary(self) -> bool:
        """True when the field solves the stationary angle equation."""
        if self.kind != "polar":
            return True
        cw = float(wrap_angle(self.c))
        return any(
            abs(float(wrap_angle(cw - off))) < 1e-12 for off in _STATIONARY_POLAR_OFFSETS
        )

    @property
    def singular_locus(self) -> str:
        if self.kind == "polar":
            return "origin"
        if self.kind == "grim-reaper":
            return f"leaf graphs undefined on the vertical lines x = (pi/2 + m*pi)/{self.a}"
        return "none"


def constant(c: float) -> CatalogSolution:
    return CatalogSolution("constant", c=c)


def linear(a: float, b: float, c: float) -> CatalogSolution:
    return CatalogSolution("linear", a=a, b=b, c=c)


def polar(c: float) -> CatalogSolution:
    return CatalogSolution("polar", c=c)


def grim_reaper(a: float, offset: float = 0.0) -> CatalogSolution:
    return CatalogSolution("grim-reaper", a=a, c=offset)


def angle_array(sol: CatalogSolution, x, y, t: float = 0.0):
    """Vectorized angle values; no validity checks (see valid_mask)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if sol.kind == "constant":
        return np.broadcast_to(np.float64(sol.c), np.broadcast_shapes(x.shape, y.shape)).copy()
    if sol.kind == "linear":
        return sol.a * x + sol.b * y + sol.c
    if sol.kind == "polar":
        return np.arctan2(y, x) + sol.c
    return sol.a * x  # grim-reaper


def gradient_array(sol: CatalogSolution, x, y, t: float = 0.0):
    """Analytic gradient (gx, gy) of the angle field."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    if sol.kind == "constant":
        return np.zeros(shape), np.zeros(shape)
    if sol.kind == "linear":
        return np.full(shape, sol.a), np.full(shape, sol.b)
    if sol.kind == "polar":
        r2 = x * x + y * y
        return -y / r2, x / r2
    return np.full(shape, sol.a), np.zeros(shape)  # grim-reaper


def valid_mask(sol: CatalogSolution, x, y):
    """Vectorized validity of the angle field at the given points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if sol.kind == "polar":
        return np.hypot(x, y) >= POLAR_SINGULAR_RADIUS
    return np.ones(np.broadcast_shapes(x.shape, y.shape), dtype=bool)


def eval_angle(sol: CatalogSolution, p, t: float = 0.0) -> float:
    """Angle at a single point; raises OutOfDomainError at/near a singular locus."""
    x, y = float(p[0]), float(p[1])
    if sol.kind == "polar" and np.hypot(x, y) < POLAR_SINGULAR_RADIUS:
        raise OutOfDomainError(f"polar field undefined at ({x!r}, {y!r})")
    return float(angle_array(sol, x, y, t))


def eval_gradient(sol: CatalogSolution, p, t: float = 0.0):
    x, y = float(p[0]), float(p[1])
    if sol.kind == "polar" and np.hypot(x, y) < POLAR_SINGULAR_RADIUS:
        raise OutOfDomainError(f"polar field undefined at ({x!r}, {y!r})")
    gx, gy = gradient_array(sol, x, y, t)
    return np.array([float(gx), float(gy)])


# ---------------------------------------------------------------------------
# exact leaves


def grim_reaper_height(a: float, offset: float, x, t: float = 0.0):
    """Graph height of the translating leaf: a*t - ln(cos(a*x))/a + offset."""
    return a * t - np.log(np.cos(a * np.asarray(x, dtype=float))) / a + offset


def _reaper_leaf(a: float, seed, t: float, s_extent: float, spacing: float) -> Curve:
    """Translating-leaf arc through `seed`, sampled at exactly uniform arclength.

    Uses the arclength parametrization x = x_c + asin(tanh(a s))/a,
    y = y_apex + log(cosh(a s))/a, which never leaves the seed's strip.
    """
    x_s, y_s = float(seed[0]), float(seed[1])
    m = round(a * x_s / np.pi)
    x_c = m * np.pi / a
    xi = x_s - x_c
    if abs(np.cos(a * x_s)) < 1e-12:
        # on a singular vertical line the leaf is the straight line itself
        n = max(int(round(2 * s_extent / spacing)) + 1, 5)
        s = np.linspace(-s_extent, s_extent, n)
        pts = np.column_stack([np.full_like(s, x_s), y_s + s])
        return Curve(pts)
    s_seed = np.arcsinh(np.tan(a * xi)) / a
    y_apex0 = y_s - np.log(np.cosh(a * s_seed)) / a
    k = int(round(s_extent / spacing))
    s = s_seed + spacing * np.arange(-k, k + 1)
    xs = x_c + np.arcsin(np.tanh(a * s)) / a
    ys = (y_apex0 + a * t) + np.log(np.cosh(a * s)) / a
    return Curve(np.column_stack([xs, ys]))


def _rigid_motion_to_reaper(a: float, b: float, c: float):
    """Rotation + translation taking the linear(a,b,c) field to slope*x form.

    Returns (rho, tau, slope): T(p) = R(rho) p + tau maps original points to
    the standard frame where the field reads slope * x.
    """
    slope = float(np.hypot(a, b))
    rho = -np.arctan2(b, a)
    tau = np.array([(c + rho) / slope, 0.0])
    return rho, tau, slope


def _rot(rho):
    cr, sr = np.cos(rho), np.sin(rho)
    return np.array([[cr, -sr], [sr, cr]])


def eval_leaf(
    sol: CatalogSolution, seed, t: float = 0.0, *, s_extent: float = 1.0, spacing: float = 0.01
) -> Curve:
    """Exact leaf through `seed` at time t.

    grim-reaper / linear: translating graph (linear is reduced to reaper form
    by a rigid motion); polar(0 or pi): stationary ray; polar(pi/2 or 3pi/2):
    circle of radius sqrt(|seed|^2 - 2t); constant: straight line.
    """
    seed = np.asarray(seed, dtype=float)
    if sol.kind == "constant" or (sol.kind == "linear" and sol.a == 0.0 and sol.b == 0.0):
        ang = sol.c
        n = max(int(round(2 * s_extent / spacing)) + 1, 5)
        s = np.linspace(-s_extent, s_extent, n)[:, None]
        d = np.array([np.cos(ang), np.sin(ang)])
        return Curve(seed[None, :] + s * d)

    if sol.kind == "grim-reaper":
        return _reaper_leaf(sol.a, seed, t, s_extent, spacing)

    if sol.kind == "linear":
        rho, tau, slope = _rigid_motion_to_reaper(sol.a, sol.b, sol.c)
        R = _rot(rho)
        seed_std = R @ seed + tau
        leaf_std = _reaper_leaf(slope, seed_std, t, s_extent, spacing)
        pts = (leaf_std.points - tau) @ R  # right-multiply by R == apply R^T
        return Curve(pts, closed=False)

    # polar
    r0 = float(np.hypot(seed[0], seed[1]))
    if r0 < POLAR_SINGULAR_RADIUS:
        raise OutOfDomainError("polar leaf seed at the origin")
    cw = float(wrap_angle(sol.c))
    phi0 = float(np.arctan2(seed[1], seed[0]))
    if abs(float(wrap_angle(cw))) < 1e-12 or abs(float(wrap_angle(cw - np.pi))) < 1e-12:
        # stationary ray through the origin; oriented along V1
        sign = 1.0 if abs(float(wrap_angle(cw))) < 1e-12 else -1.0
        r_lo = max(r0 - s_extent, 10 * POLAR_SINGULAR_RADIUS)
        r_hi = r0 + s_extent
        n = max(int(round((r_hi - r_lo) / spacing)) + 1, 5)
        rr = np.linspace(r_lo, r_hi, n)
        if sign < 0:
            rr = rr[::-1]
        d = seed / r0
        return Curve(rr[:, None] * d[None, :])
    if abs(float(wrap_angle(cw - 0.5 * np.pi))) < 1e-12 or abs(
        float(wrap_angle(cw - 1.5 * np.pi))
    ) < 1e-12:
        rsq = r0 * r0 - 2.0 * t
        if rsq <= 0.0:
            raise ExtinctionError(
                f"circle leaf extinct: t={t} >= |seed|^2/2 = {r0 * r0 / 2}"
            )
        r = float(np.sqrt(rsq))
        orient = 1.0 if abs(float(wrap_angle(cw - 0.5 * np.pi))) < 1e-12 else -1.0
        n = max(int(round(2 * np.pi * r / spacing)), 8)
        ang = phi0 + orient * 2 * np.pi * np.arange(n) / n
        return Curve(np.column_stack([r * np.cos(ang), r * np.sin(ang)]), closed=True)
    raise FoliflowError(
        f"polar(c={sol.c}) is not stationary; its leaves have no closed-form evolution"
    )


# ---------------------------------------------------------------------------
# exact polar Hessian


def exact_hessian_polar(p):
    """Hessian of the polar angle field in the polar basis {d/dr, d/dtheta}:
    zero diagonal, off-diagonal -1/r.
    """
    x, y = float(p[0]), float(p[1])
    r = np.hypot(x, y)
    if r < POLAR_SINGULAR_RADIUS:
        raise OutOfDomainError("polar Hessian undefined at the origin")
    return np.array([[0.0, -1.0 / r], [-1.0 / r, 0.0]])


def polar_hessian_to_cartesian(h_polar, p):
    """Convert polar-basis Hessian components to Cartesian components.

    The polar basis {d/dr, d/dtheta} is not orthonormal (d/dtheta has length
    r), so the conversion is H_cart = B^(-T) H_polar B^(-1) with B the
    basis-change matrix whose columns are d/dr and d/dtheta in Cartesian
    components.
    """
    x, y = float(p[0]), float(p[1])
    r = np.hypot(x, y)
    if r < POLAR_SINGULAR_RADIUS:
        raise OutOfDomainError("conversion undefined at the origin")
    cphi, sphi = x / r, y / r
    b = np.array([[cphi, -r * sphi], [sphi, r * cphi]])
    b_inv = np.linalg.inv(b)
    return b_inv.T @ np.asarray(h_polar, dtype=float) @ b_inv


def polar_hessian_cartesian(p):
    """Exact Cartesian Hessian of atan2(y, x) at p."""
    return polar_hessian_to_cartesian(exact_hessian_polar(p), p)
