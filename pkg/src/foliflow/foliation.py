"""Reconstruction of the moving leaf family from an angle field.

Given theta(x, t), the base point follows alpha' = (grad theta . V1) V2 and
each leaf is the integral curve of V1 = (cos theta, sin theta) through
alpha(t). The proof-level identity <X_t, V2> = theta_s is monitored as the
normal-velocity defect D; it vanishes in the continuum, so its discrete size
measures reconstruction fidelity.
"""

import math
from dataclasses import dataclass

import numpy as np

from .angles import wrapped_diff
from .curve import Curve, chord_deviation
from .errors import ConfigError, OutOfDomainError
from .parallel import parallel_map
from .samplers import FieldSampler


def _in_box(x, y, box):
    if box is None:
        return True
    xmin, xmax, ymin, ymax = box
    return xmin <= x <= xmax and ymin <= y <= ymax


@dataclass(frozen=True)
class BaseCurve:
    times: np.ndarray
    points: np.ndarray  # (nt, 2)
    truncated: bool


def _base_rhs(sampler, t, x, y):
    """(grad theta . V1) V2 as a float pair."""
    theta = float(sampler.angle(x, y, t))
    gx, gy = sampler.gradient(x, y, t)
    c = math.cos(theta)
    s = math.sin(theta)
    speed = float(gx) * c + float(gy) * s
    return -speed * s, speed * c


def integrate_base_curve(
    sampler: FieldSampler, y, t_max: float, dt: float, box=None, t_start: float = 0.0
) -> BaseCurve:
    """RK4 trajectory of the base-point ODE from y, sampled every dt.

    Stops early (truncated=True) when the point leaves the safe box or the
    field can no longer be evaluated; the last step is shortened to land
    exactly on t_max.
    """
    if box is None:
        box = sampler.trace_box()
    px, py = float(y[0]), float(y[1])
    if not _in_box(px, py, box) or not sampler.is_valid(px, py):
        raise OutOfDomainError(f"seed ({px}, {py}) outside the tracing domain")
    times = [t_start]
    points = [(px, py)]
    truncated = False
    t = t_start
    eps = 1e-12 * max(1.0, abs(t_max))
    while t < t_max - eps:
        step = min(dt, t_max - t)
        try:
            k1x, k1y = _base_rhs(sampler, t, px, py)
            k2x, k2y = _base_rhs(sampler, t + 0.5 * step, px + 0.5 * step * k1x, py + 0.5 * step * k1y)
            k3x, k3y = _base_rhs(sampler, t + 0.5 * step, px + 0.5 * step * k2x, py + 0.5 * step * k2y)
            k4x, k4y = _base_rhs(sampler, t + step, px + step * k3x, py + step * k3y)
        except OutOfDomainError:
            truncated = True
            break
        nx = px + (step / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        ny = py + (step / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y)
        if not (math.isfinite(nx) and math.isfinite(ny)) or not _in_box(nx, ny, box) or not sampler.is_valid(nx, ny):
            truncated = True
            break
        t += step
        px, py = nx, ny
        times.append(t)
        points.append((px, py))
    return BaseCurve(np.array(times), np.array(points), truncated)


@dataclass(frozen=True)
class Leaf:
    """Integral curve of V1 through a base point, sampled at uniform s.

    points[s0_index] is the base point (s = 0); samples run from
    -left_count*ds to +right_count*ds.
    """

    curve: Curve
    s0_index: int
    ds: float
    truncated_neg: bool
    truncated_pos: bool

    @property
    def s_values(self):
        return self.ds * (np.arange(self.curve.n) - self.s0_index)


def _trace_direction(sampler, start, t, n_steps, ds, box):
    ang = sampler.angle
    pts = []
    x, y = float(start[0]), float(start[1])
    truncated = False
    for _ in range(n_steps):
        try:
            a1 = ang(x, y, t)
            c1, s1 = math.cos(a1), math.sin(a1)
            a2 = ang(x + 0.5 * ds * c1, y + 0.5 * ds * s1, t)
            c2, s2 = math.cos(a2), math.sin(a2)
            a3 = ang(x + 0.5 * ds * c2, y + 0.5 * ds * s2, t)
            c3, s3 = math.cos(a3), math.sin(a3)
            a4 = ang(x + ds * c3, y + ds * s3, t)
            c4, s4 = math.cos(a4), math.sin(a4)
        except OutOfDomainError:
            truncated = True
            break
        nx = x + (ds / 6.0) * (c1 + 2 * c2 + 2 * c3 + c4)
        ny = y + (ds / 6.0) * (s1 + 2 * s2 + 2 * s3 + s4)
        if not (math.isfinite(nx) and math.isfinite(ny)) or not _in_box(nx, ny, box) or not sampler.is_valid(nx, ny):
            truncated = True
            break
        x, y = nx, ny
        pts.append((x, y))
    return pts, truncated


def integrate_leaf(
    sampler: FieldSampler, start, t: float, s_extent: float, ds: float, box=None
) -> Leaf:
    """Trace the integral curve of (cos theta, sin theta) through `start`
    over s in [-s_extent, s_extent], RK4 with fixed step ds.

    Exiting the safe box truncates the affected side (not a failure).
    """
    if box is None:
        box = sampler.trace_box()
    p0 = np.asarray(start, dtype=float)
    if not _in_box(p0[0], p0[1], box) or not sampler.is_valid(p0[0], p0[1]):
        raise OutOfDomainError(f"leaf start {tuple(p0)} outside the tracing domain")
    n_steps = int(round(s_extent / ds))
    fwd, trunc_pos = _trace_direction(sampler, p0, t, n_steps, ds, box)
    bwd, trunc_neg = _trace_direction(sampler, p0, t, n_steps, -ds, box)
    pts = bwd[::-1] + [p0] + fwd
    if len(pts) < 3:
        raise OutOfDomainError(
            f"leaf through {tuple(p0)} has fewer than 3 samples inside the domain"
        )
    return Leaf(
        curve=Curve(np.array(pts)),
        s0_index=len(bwd),
        ds=ds,
        truncated_neg=trunc_neg,
        truncated_pos=trunc_pos,
    )


def leaf_richardson_tol(sampler, start, t, s_extent, ds, box=None) -> float:
    """Step-halving Richardson estimate of the leaf integration error."""
    coarse = integrate_leaf(sampler, start, t, s_extent, ds, box)
    fine = integrate_leaf(sampler, start, t, s_extent, ds / 2, box)
    n = min(coarse.s0_index, fine.s0_index // 2)
    m = min(
        coarse.curve.n - 1 - coarse.s0_index, (fine.curve.n - 1 - fine.s0_index) // 2
    )
    pc = coarse.curve.points[coarse.s0_index - n : coarse.s0_index + m + 1]
    pf = fine.curve.points[fine.s0_index - 2 * n : fine.s0_index + 2 * m + 1 : 2]
    err = np.max(np.hypot(*(pc - pf).T))
    return float(err * 16.0 / 15.0)


def leaf_tangency_defect(leaf: Leaf, sampler: FieldSampler, t: float) -> float:
    """Max wrapped gap between the traced tangent direction and the field.

    The tangent is estimated by fourth-order central differences so its
    discretization error is commensurate with the integrator's.
    """
    pts = leaf.curve.points
    n = leaf.curve.n
    if n < 5:
        raise ConfigError("tangency check needs at least 5 samples")
    i = np.arange(2, n - 2)
    d = (-pts[i + 2] + 8 * pts[i + 1] - 8 * pts[i - 1] + pts[i - 2]) / (12 * leaf.ds)
    ang = np.arctan2(d[:, 1], d[:, 0])
    theta = np.array([float(sampler.angle(p[0], p[1], t)) for p in pts[i]])
    return float(np.max(np.abs(wrapped_diff(ang, theta))))


@dataclass(frozen=True)
class FoliationSheet:
    """Leaves X(., t_k) through a common base curve; X(0, t_k) = alpha(t_k)."""

    seed: tuple
    base: BaseCurve
    leaves: list
    s_extent: float
    ds: float

    @property
    def times(self):
        return self.base.times


def build_sheet(
    sampler: FieldSampler,
    y,
    t_max: float,
    dt_snap: float,
    s_extent: float,
    ds: float,
    box=None,
    workers: int | None = None,
) -> FoliationSheet:
    """Base-curve ODE followed by one leaf trace per time sample.

    Leaves at distinct times are independent and integrate concurrently;
    results are ordered by time index, so output does not depend on the
    worker count.
    """
    if box is None:
        box = sampler.trace_box()
    base = integrate_base_curve(sampler, y, t_max, dt_snap, box)

    def trace(k):
        return integrate_leaf(sampler, base.points[k], float(base.times[k]), s_extent, ds, box)

    leaves = parallel_map(trace, range(len(base.times)), workers)
    return FoliationSheet(
        seed=(float(y[0]), float(y[1])), base=base, leaves=leaves, s_extent=s_extent, ds=ds
    )


@dataclass(frozen=True)
class SheetDiagnostics:
    """Normal-velocity defect D = <X_t, V2> - theta_s and the intrinsic-form
    residual theta_t - theta_ss + (grad theta . V2) theta_s on the sheet.

    V2 comes from the leaf geometry; theta_s uses the identity
    theta_s = grad theta . V1 evaluated at the leaf samples (differencing the
    traced tangent angles instead would re-amplify the non-smooth part of the
    bilinear interpolation error and stall convergence at first order).
    Tables cover time samples 1..nt-2 and s-samples two stencils in from the
    common leaf ends, where all estimates are central.
    """

    times: np.ndarray  # interior time samples
    s_values: np.ndarray
    d_table: np.ndarray  # (ns, nt_interior)
    eq_residual: np.ndarray  # same shape
    base_defect: np.ndarray  # per (all) time samples, from the ODE right side
    max_abs_d: float
    max_abs_residual: float
    max_abs_base_defect: float


def sheet_diagnostics(sheet: FoliationSheet, sampler: FieldSampler) -> SheetDiagnostics:
    nt = len(sheet.times)
    if nt < 3:
        raise ConfigError("sheet diagnostics need at least 3 time samples")
    left = min(leaf.s0_index for leaf in sheet.leaves)
    right = min(leaf.curve.n - 1 - leaf.s0_index for leaf in sheet.leaves)
    trim = 2  # drop one-sided end estimates
    if left + right + 1 - 2 * trim < 5:
        raise ConfigError("sheet diagnostics need at least 5 common s-samples")
    lo, hi = trim, left + right + 1 - trim  # slice of the common range
    s_vals = sheet.ds * (np.arange(left + right + 1) - left)[lo:hi]

    aligned_pts = []  # extended by one sample each side for the theta_ss stencil
    aligned_phi = []
    for leaf in sheet.leaves:
        a = leaf.s0_index - left
        b = leaf.s0_index + right + 1
        aligned_pts.append(leaf.curve.points[a:b])
        aligned_phi.append(leaf.curve.tangent_angles()[a:b])

    times = sheet.times
    d_cols = []
    eq_cols = []
    for k in range(1, nt - 1):
        dt2 = float(times[k + 1] - times[k - 1])
        xt = (aligned_pts[k + 1][lo:hi] - aligned_pts[k - 1][lo:hi]) / dt2
        phi = aligned_phi[k]
        phi_mid = phi[lo:hi]
        v2 = np.column_stack([-np.sin(phi_mid), np.cos(phi_mid)])

        pts = aligned_pts[k]
        t_k = float(times[k])
        # theta_s = grad theta . V1 along the leaf (extended range for theta_ss)
        ext = slice(lo - 1, hi + 1)
        pts_ext = pts[ext]
        phi_ext = phi[ext]
        grads_ext = np.array(
            [sampler.gradient(p[0], p[1], t_k) for p in pts_ext], dtype=float
        )
        u_ext = grads_ext[:, 0] * np.cos(phi_ext) + grads_ext[:, 1] * np.sin(phi_ext)
        theta_s = u_ext[1:-1]
        d_cols.append(np.sum(xt * v2, axis=1) - theta_s)

        pts_mid = pts[lo:hi]
        th_p = np.array([float(sampler.angle(p[0], p[1], times[k + 1])) for p in pts_mid])
        th_m = np.array([float(sampler.angle(p[0], p[1], times[k - 1])) for p in pts_mid])
        theta_t = wrapped_diff(th_p, th_m) / dt2
        theta_ss = (u_ext[2:] - u_ext[:-2]) / (2 * sheet.ds)
        gdotv2 = np.sum(grads_ext[1:-1] * v2, axis=1)
        eq_cols.append(theta_t - theta_ss + gdotv2 * theta_s)

    base_defect = np.empty(nt)
    for k in range(nt):
        p = sheet.base.points[k]
        t_k = float(times[k])
        theta = float(sampler.angle(p[0], p[1], t_k))
        gx, gy = sampler.gradient(p[0], p[1], t_k)
        c, s = np.cos(theta), np.sin(theta)
        speed = float(gx) * c + float(gy) * s
        rhs = speed * np.array([-s, c])
        base_defect[k] = rhs @ np.array([-s, c]) - speed

    d_table = np.column_stack(d_cols)
    eq_table = np.column_stack(eq_cols)
    return SheetDiagnostics(
        times=times[1:-1],
        s_values=s_vals,
        d_table=d_table,
        eq_residual=eq_table,
        base_defect=base_defect,
        max_abs_d=float(np.max(np.abs(d_table))),
        max_abs_residual=float(np.max(np.abs(eq_table))),
        max_abs_base_defect=float(np.max(np.abs(base_defect))),
    )


@dataclass(frozen=True)
class StraightnessReport:
    verdict: str  # "pass" | "fail" | "inapplicable"
    reason: str
    curvature_at_seed: float
    deviation: float | None
    s_extent: float


def straightness_check(
    sampler: FieldSampler,
    y,
    *,
    s_extent: float = 0.4,
    ds: float = 1e-3,
    curvature_tol: float = 1e-8,
    deviation_tol: float = 1e-6,
    stationary: bool | None = None,
    box=None,
) -> StraightnessReport:
    """On a stationary field, a leaf through a zero-curvature point must be
    straight; reports the max point-to-chord deviation of the traced leaf.

    Precondition violations (field not stationary, or grad theta . V1 not
    small at y) yield verdict "inapplicable" rather than an error.
    """
    if stationary is None:
        sol = getattr(sampler, "sol", None)
        stationary = bool(sol.is_stationary) if sol is not None else True
    theta = float(sampler.angle(y[0], y[1], 0.0))
    gx, gy = sampler.gradient(y[0], y[1], 0.0)
    kappa0 = float(gx) * np.cos(theta) + float(gy) * np.sin(theta)
    if not stationary:
        return StraightnessReport(
            "inapplicable", "field is not stationary", kappa0, None, s_extent
        )
    if abs(kappa0) > curvature_tol:
        return StraightnessReport(
            "inapplicable",
            f"|grad theta . V1| = {abs(kappa0):.3e} exceeds {curvature_tol:.1e} at the seed",
            kappa0,
            None,
            s_extent,
        )
    leaf = integrate_leaf(sampler, y, 0.0, s_extent, ds, box)
    dev = chord_deviation(leaf.curve)
    verdict = "pass" if dev <= deviation_tol else "fail"
    return StraightnessReport(verdict, "", kappa0, dev, s_extent)
