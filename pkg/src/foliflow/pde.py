"""Time evolution of the tangent-angle field.

The update direction at a node is the second-difference Hessian contracted
twice with the unit vector (cos theta, sin theta): diffusion acts only along
that direction, so the operator is degenerate parabolic. Stepping uses the
Cartesian form with a radius-1 stencil; the frame form (nested first
differences along the moving frame) is a verification-only evaluator.
"""

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .angles import wrap_angle, wrapped_diff
from .errors import CflError, ConfigError, NumericalAbort, OutOfDomainError
from .field import AngleField, gradient_arrays, hessian_arrays, _check_interior
from .samplers import FieldSampler

# explicit Euler stability for the frozen-coefficient operator needs
# dt <= h^2/4 on the 2D stencil; the default leaves margin for the
# nonlinearity
CFL_LIMIT = 0.25
DEFAULT_CFL_FRACTION = 0.2


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary treatment: 'dirichlet-exact' pins the ring to an exact
    sampler re-evaluated at the current time; 'periodic' wraps stencils."""

    kind: str
    sampler: FieldSampler | None = None

    def __post_init__(self):
        if self.kind not in ("dirichlet-exact", "periodic"):
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet-exact" and self.sampler is None:
            raise ConfigError("dirichlet-exact boundary needs a reference sampler")


@dataclass(frozen=True)
class PdeState:
    field: AngleField
    dt: float
    boundary: BoundaryCondition
    step_count: int = 0
    _ring: tuple = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        h = self.field.grid.h
        if not self.dt > 0:
            raise CflError(f"dt must be positive, got {self.dt}")
        if self.dt > CFL_LIMIT * h * h * (1 + 1e-12):
            raise CflError(
                f"dt={self.dt!r} violates the stability bound {CFL_LIMIT}*h^2={CFL_LIMIT * h * h!r}"
            )


def make_state(field: AngleField, boundary: BoundaryCondition, dt: float | None = None) -> PdeState:
    if dt is None:
        dt = DEFAULT_CFL_FRACTION * field.grid.h ** 2
    return PdeState(field=field, dt=dt, boundary=boundary)


def rhs_cartesian_array(field: AngleField):
    """Update values at all interior nodes (NaN on the boundary ring)."""
    hxx, hxy, hyy = hessian_arrays(field)
    c = np.cos(field.values)
    s = np.sin(field.values)
    return hxx * c * c + 2.0 * hxy * s * c + hyy * s * s


def rhs_cartesian(field: AngleField, i: int, j: int) -> float:
    """Update value at one interior node."""
    _check_interior(field, i, j)
    return float(rhs_cartesian_array(field)[i, j])


def _roll_diff(v, shift, axis):
    return wrapped_diff(np.roll(v, -shift, axis=axis), v)


def rhs_periodic_array(field: AngleField):
    """Update values at every node with periodic wraparound stencils."""
    v = field.values
    h2 = field.grid.h ** 2
    hxx = (_roll_diff(v, 1, 0) + _roll_diff(v, -1, 0)) / h2
    hyy = (_roll_diff(v, 1, 1) + _roll_diff(v, -1, 1)) / h2
    dpp = wrapped_diff(np.roll(np.roll(v, -1, 0), -1, 1), v)
    dpm = wrapped_diff(np.roll(np.roll(v, -1, 0), 1, 1), v)
    dmp = wrapped_diff(np.roll(np.roll(v, 1, 0), -1, 1), v)
    dmm = wrapped_diff(np.roll(np.roll(v, 1, 0), 1, 1), v)
    hxy = (dpp - dpm - dmp + dmm) / (4 * h2)
    c = np.cos(v)
    s = np.sin(v)
    return hxx * c * c + 2.0 * hxy * s * c + hyy * s * s


def rhs_frame_array(field: AngleField):
    """Frame-form update values, valid two nodes in from the boundary.

    Evaluates the directional derivative along v1 of the scalar field
    u = grad(theta) . v1 by nested central differences, then subtracts
    (grad . v1)(grad . v2). Agrees with the Cartesian form to stencil order;
    nested differencing can lose one order in the worst case.
    """
    gx, gy = gradient_arrays(field)
    v = field.values
    h = field.grid.h
    c = np.cos(v)
    s = np.sin(v)
    u = gx * c + gy * s
    dux = np.full_like(u, np.nan)
    duy = np.full_like(u, np.nan)
    dux[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2 * h)
    duy[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2 * h)
    term1 = dux * c + duy * s
    term2 = u * (-gx * s + gy * c)
    return term1 - term2


def rhs_frame(field: AngleField, i: int, j: int) -> float:
    """Frame-form update at one node; needs a radius-2 stencil."""
    _check_interior(field, i, j, margin=2)
    return float(rhs_frame_array(field)[i, j])


def _boundary_ring(state: PdeState):
    """Node coordinates of the boundary ring, cached on the state."""
    if state._ring is not None:
        return state._ring
    g = state.field.grid
    xs, ys = g.xs(), g.ys()
    coords = []
    idx = []
    for i in (0, g.nx - 1):
        for j in range(g.ny):
            idx.append((i, j))
            coords.append((xs[i], ys[j]))
    for j in (0, g.ny - 1):
        for i in range(1, g.nx - 1):
            idx.append((i, j))
            coords.append((xs[i], ys[j]))
    arr = np.array(coords)
    ii = np.array([k[0] for k in idx])
    jj = np.array([k[1] for k in idx])
    ring = (ii, jj, arr[:, 0], arr[:, 1])
    object.__setattr__(state, "_ring", ring)
    return ring


def step_euler(state: PdeState) -> PdeState:
    """One explicit Euler step; refuses to run outside the stability bound."""
    fld = state.field
    dt = state.dt
    t_new = fld.time + dt
    if state.boundary.kind == "periodic":
        new_vals = fld.values + dt * rhs_periodic_array(fld)
    else:
        rhs = rhs_cartesian_array(fld)
        new_vals = fld.values.copy()
        new_vals[1:-1, 1:-1] += dt * rhs[1:-1, 1:-1]
        ii, jj, bx, by = _boundary_ring(state)
        new_vals[ii, jj] = state.boundary.sampler.angle(bx, by, t_new)
    new_vals = wrap_angle(new_vals)
    if not np.all(np.isfinite(new_vals)):
        raise NumericalAbort(
            f"non-finite values after step {state.step_count + 1} (t={t_new:.6g})",
            field=fld,
            step=state.step_count + 1,
        )
    new_field = AngleField(fld.grid, new_vals, time=t_new)
    new_state = replace(state, field=new_field, step_count=state.step_count + 1)
    object.__setattr__(new_state, "_ring", state._ring)
    return new_state


def evolve(state: PdeState, t_final: float, snapshot_every: int | None = None):
    """Step to t_final (last step truncated to land exactly); returns
    (final state, snapshots). Snapshots include the initial and final fields.
    """
    t0 = state.field.time
    if t_final < t0 - 1e-15:
        raise ConfigError(f"t_final={t_final} is before the field time {t0}")
    span = t_final - t0
    if snapshot_every is None:
        snapshot_every = max(int(math.ceil(span / (10 * state.dt))), 1) if span > 0 else 1
    snapshots = [state.field]
    steps_since = 0
    while state.field.time < t_final - 1e-12 * max(1.0, abs(t_final)):
        dt_left = t_final - state.field.time
        if dt_left < state.dt * (1 - 1e-9):
            state = replace(state, dt=dt_left)
        state = step_euler(state)
        steps_since += 1
        if steps_since >= snapshot_every:
            snapshots.append(state.field)
            steps_since = 0
    if snapshots[-1] is not state.field:
        snapshots.append(state.field)
    return state, snapshots


@dataclass(frozen=True)
class ResidualReport:
    values: np.ndarray  # |rhs| where evaluated, NaN elsewhere
    evaluated: np.ndarray  # bool mask of evaluated nodes
    max_abs: float
    l2_rms: float
    count: int


def stationary_residual(field: AngleField, mask=None) -> ResidualReport:
    """|update value| at interior nodes, optionally restricted by a mask.

    mask: boolean node array (True = include); combined with the interior.
    """
    rhs = rhs_cartesian_array(field)
    sel = np.isfinite(rhs)
    if mask is not None:
        sel &= np.asarray(mask, dtype=bool)
    vals = np.where(sel, np.abs(rhs), np.nan)
    if not sel.any():
        raise OutOfDomainError("residual mask excludes every interior node")
    picked = np.abs(rhs[sel])
    return ResidualReport(
        values=vals,
        evaluated=sel,
        max_abs=float(picked.max()),
        l2_rms=float(np.sqrt(np.mean(picked**2))),
        count=int(sel.sum()),
    )
