"""Time stepping of the free-boundary graph flow of a lens.

The upper arc is the graph of ``u(., t)`` over ``[a(t), b(t)]`` with ``u = 0``
and ``u_x = +-sqrt(3)`` at the contacts.  It moves by ``u_t = u_xx / (1 + u_x^2)``
and the contacts move with ``a' = -u_xx(a) / (4 sqrt 3)``,
``b' = u_xx(b) / (4 sqrt 3)``.  We work on the fixed domain
``xi = (x - a) / (b - a)`` with ``U(xi, t) = u(x, t)``; there

    U_t = U_xixi / (L^2 + U_xi^2) + ((1 - xi) a' + xi b') U_xi / L,   L = b - a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    CompatibilityError,
    ContactSlopeError,
    DomainError,
    ExtinctionReached,
    InstabilityError,
    InvalidGridError,
)
from .geometry import SQRT3, Diagnostics, GridProfile, diagnostics, fd_weights

SCHEMES = ("explicit", "semi_implicit")
EXTINCTION_FRACTION = 1e-3
# explicit: dt = cfl dxi^2 min(L^2 + U_xi^2); semi-implicit takes this many times more
SEMI_IMPLICIT_GAIN = 8.0


@dataclass(frozen=True)
class FlowConfig:
    """Run parameters.

    ``n`` is the number of grid intervals on ``[0, 1]``.  A run stops at
    ``t_end``, when the area falls below ``area_floor`` times the initial area,
    or when ``b - a`` drops below ``1e-3 (b0 - a0)``.  ``ratio_stride`` selects
    every k-th snapshot for the O(n^2) distance-ratio diagnostic (0 disables it).
    """

    n: int = 256
    cfl: float = 0.4
    scheme: str = "explicit"
    t_end: float | None = None
    area_floor: float = 0.0
    snapshot_stride: int = 100
    ratio_stride: int = 1
    max_steps: int = 5_000_000

    def __post_init__(self) -> None:
        if self.n < 32:
            raise DomainError("n must be at least 32")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}")
        if not 0.0 < self.cfl <= 0.5:
            raise DomainError("cfl must lie in (0, 0.5]")
        if self.t_end is not None and not self.t_end > 0.0:
            raise DomainError("t_end must be positive")
        if not 0.0 <= self.area_floor < 1.0:
            raise DomainError("area_floor is a fraction of the initial area in [0, 1)")
        if self.snapshot_stride < 1 or self.ratio_stride < 0 or self.max_steps < 1:
            raise DomainError("strides and max_steps must be positive")


@dataclass(frozen=True)
class ExtinctionEstimate:
    T: float
    x0: tuple[float, float]
    area_slope: float
    area_residual: float
    midpoint_residual: float


@dataclass(eq=False)
class FlowTrajectory:
    snapshots: list[GridProfile]
    diagnostics: list[Diagnostics]
    extinction_estimate: ExtinctionEstimate | None = None
    stop_reason: str = ""
    steps: int = 0
    meta: dict = field(default_factory=dict)

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    def areas(self) -> np.ndarray:
        return np.array([d.area for d in self.diagnostics])

    def to_dict(self) -> dict:
        est = self.extinction_estimate
        return {
            "snapshots": [s.to_dict() for s in self.snapshots],
            "extinction_estimate": None if est is None else {
                "T": est.T, "x0": list(est.x0), "area_slope": est.area_slope,
                "area_residual": est.area_residual, "midpoint_residual": est.midpoint_residual,
            },
            "stop_reason": self.stop_reason,
            "steps": self.steps,
        }


# ---------------------------------------------------------------------------
# discrete operators on the fixed domain

def _contact_second_derivatives(U: np.ndarray, L: float) -> tuple[float, float]:
    """``U_xixi`` at both ends from the one-sided quadratic through (0, 0) with slope ``sqrt(3) L``.

    ``(8 U_1 - U_2 - 6 g h) / (2 h^2)`` with ``g = sqrt(3) L`` is second-order
    accurate given the exact contact slope.
    """
    n = U.size - 1
    h = 1.0 / n
    g6h = 6.0 * SQRT3 * L * h
    left = (8.0 * U[1] - U[2] - g6h) / (2.0 * h * h)
    right = (8.0 * U[n - 1] - U[n - 2] - g6h) / (2.0 * h * h)
    return left, right


def _speeds(U: np.ndarray, L: float) -> tuple[float, float]:
    left, right = _contact_second_derivatives(U, L)
    scale = 4.0 * SQRT3 * L * L
    return -left / scale, right / scale


def _interior_terms(U: np.ndarray, L: float, da: float, db: float):
    n = U.size - 1
    h = 1.0 / n
    xi = np.arange(1, n) * h
    ux = (U[2:] - U[:-2]) / (2.0 * h)
    coeff = 1.0 / (L * L + ux * ux)
    drift = ((1.0 - xi) * da + xi * db) / L
    return ux, coeff, drift


def _stable_dt(U: np.ndarray, L: float, cfl: float) -> float:
    n = U.size - 1
    h = 1.0 / n
    ux = (U[2:] - U[:-2]) / (2.0 * h)
    return cfl * h * h * float(np.min(L * L + ux * ux))


def _explicit_update(U: np.ndarray, a: float, b: float, dt: float):
    L = b - a
    da, db = _speeds(U, L)
    h = 1.0 / (U.size - 1)
    ux, coeff, drift = _interior_terms(U, L, da, db)
    uxx = (U[2:] - 2.0 * U[1:-1] + U[:-2]) / (h * h)
    new = np.empty_like(U)
    new[0] = new[-1] = 0.0
    new[1:-1] = U[1:-1] + dt * (coeff * uxx + drift * ux)
    return new, a + dt * da, b + dt * db


def _semi_implicit_update(U: np.ndarray, a: float, b: float, dt: float):
    L = b - a
    da, db = _speeds(U, L)
    h = 1.0 / (U.size - 1)
    ux, coeff, drift = _interior_terms(U, L, da, db)
    r = dt * coeff / (h * h)
    m = r.size
    banded = np.zeros((3, m))
    banded[0, 1:] = -r[:-1]
    banded[1, :] = 1.0 + 2.0 * r
    banded[2, :-1] = -r[1:]
    rhs = U[1:-1] + dt * drift * ux
    new = np.zeros_like(U)
    new[1:-1] = solve_banded((1, 1), banded, rhs)
    return new, a + dt * da, b + dt * db


_UPDATES = {"explicit": _explicit_update, "semi_implicit": _semi_implicit_update}


# ---------------------------------------------------------------------------
# public operations

def _one_sided_slopes(profile: GridProfile, m: int) -> tuple[float, float]:
    x, u = profile.x, profile.u
    left = float(fd_weights(x[:m], x[0], 1) @ u[:m])
    right = float(fd_weights(x[-m:], x[-1], 1) @ u[-m:])
    return left, right


def measured_contact_slopes(profile: GridProfile) -> tuple[tuple[float, float], float]:
    """Six-point one-sided contact slopes and an estimate of their truncation error.

    The error estimate is the change from the five-point stencil.
    """
    fine = _one_sided_slopes(profile, 6)
    coarse = _one_sided_slopes(profile, 5)
    err = max(abs(f - c) for f, c in zip(fine, coarse))
    return fine, err


def contact_slope_drift(profile: GridProfile) -> tuple[float, float]:
    (sl, sr), err = measured_contact_slopes(profile)
    return max(abs(sl - SQRT3), abs(sr + SQRT3)), err


def boundary_speed(profile: GridProfile, slope_tol: float = 1e-6) -> tuple[float, float]:
    """Contact velocities ``(a', b')`` of a profile on a uniform grid.

    Raises ContactSlopeError when the measured contact slopes are further than
    ``slope_tol`` (plus the slope estimator's own truncation estimate) from
    ``+-sqrt(3)``.
    """
    _require_uniform(profile)
    drift, err = contact_slope_drift(profile)
    if drift > slope_tol + err:
        raise ContactSlopeError(f"contact slopes off by {drift:.3g} (estimator error {err:.1g})")
    return _speeds(np.asarray(profile.u), profile.width)


def _require_uniform(profile: GridProfile) -> None:
    ref = np.linspace(profile.a, profile.b, profile.n + 1)
    if np.max(np.abs(profile.x - ref)) > 1e-9 * profile.width:
        raise InvalidGridError("time stepping needs a uniform grid in x")


def stable_dt(profile: GridProfile, cfl: float = 0.4, scheme: str = "explicit") -> float:
    dt = _stable_dt(np.asarray(profile.u), profile.width, cfl)
    return dt * SEMI_IMPLICIT_GAIN if scheme == "semi_implicit" else dt


def _check_state(U: np.ndarray, a: float, b: float, min_width: float) -> None:
    if not (np.all(np.isfinite(U)) and math.isfinite(a) and math.isfinite(b)):
        raise InstabilityError("non-finite values after a time step")
    if b - a <= min_width:
        raise ExtinctionReached(f"width {b - a:.3e} below {min_width:.3e}")


def step(profile: GridProfile, dt: float, scheme: str = "explicit", min_width: float = 0.0) -> GridProfile:
    """Advance a uniform-grid profile by one time step ``dt``."""
    if scheme not in _UPDATES:
        raise DomainError(f"scheme must be one of {SCHEMES}")
    if not dt > 0.0:
        raise DomainError("dt must be positive")
    _require_uniform(profile)
    U = np.array(profile.u)
    with np.errstate(all="ignore"):
        new, a, b = _UPDATES[scheme](U, profile.a, profile.b, dt)
    _check_state(new, a, b, min_width)
    # round-off can push nodes next to a contact a hair below zero
    new = np.maximum(new, 0.0)
    return GridProfile.from_fixed_domain(a, b, new, time=profile.time + dt, symmetric=profile.symmetric)


def _resample(profile: GridProfile, n: int) -> GridProfile:
    if profile.n == n:
        try:
            _require_uniform(profile)
            return profile
        except InvalidGridError:
            pass
    from scipy.interpolate import PchipInterpolator

    xi = np.linspace(0.0, 1.0, n + 1)
    values = PchipInterpolator(profile.xi, profile.u)(xi)
    values[0] = values[-1] = 0.0
    return GridProfile.from_fixed_domain(profile.a, profile.b, np.maximum(values, 0.0),
                                         time=profile.time, symmetric=profile.symmetric)


def check_compatibility(profile: GridProfile, tol: float = 1e-3) -> None:
    """Initial data must meet the axis at 60 degrees up to grid resolution."""
    drift, err = contact_slope_drift(profile)
    if drift > tol + err:
        raise CompatibilityError(f"contact slopes are off +-sqrt(3) by {drift:.3g}")
    if np.any(profile.u[1:-1] <= 0.0):
        raise CompatibilityError("profile must be positive inside (a, b)")


def evolve(initial: GridProfile, config: FlowConfig) -> FlowTrajectory:
    """Run the flow from ``initial`` and record snapshots with diagnostics."""
    check_compatibility(initial)
    prof = _resample(initial, config.n)
    update = _UPDATES[config.scheme]
    gain = SEMI_IMPLICIT_GAIN if config.scheme == "semi_implicit" else 1.0
    U = np.array(prof.u)
    a, b, t = prof.a, prof.b, prof.time
    min_width = EXTINCTION_FRACTION * (b - a)
    snaps = [prof]
    diags = [diagnostics(prof, with_ratio=config.ratio_stride > 0)]
    area_stop = config.area_floor * diags[0].area
    reason = "max_steps"
    steps = 0
    pending = False
    with np.errstate(all="ignore"):
        while steps < config.max_steps:
            dt = gain * _stable_dt(U, b - a, config.cfl)
            if config.t_end is not None and t + dt >= config.t_end:
                dt = config.t_end - t
            new, na, nb = update(U, a, b, dt)
            try:
                _check_state(new, na, nb, min_width)
            except ExtinctionReached:
                reason = "extinction"
                break
            U, a, b, t = np.maximum(new, 0.0), na, nb, t + dt
            steps += 1
            pending = True
            done = config.t_end is not None and t >= config.t_end
            if steps % config.snapshot_stride == 0 or done:
                snap = GridProfile.from_fixed_domain(a, b, U, time=t, symmetric=prof.symmetric)
                k = len(snaps)
                with_ratio = config.ratio_stride > 0 and k % config.ratio_stride == 0
                snaps.append(snap)
                diags.append(diagnostics(snap, with_ratio=with_ratio))
                pending = False
                if done:
                    reason = "t_end"
                    break
                if diags[-1].area < area_stop:
                    reason = "area_floor"
                    break
    if pending:
        snap = GridProfile.from_fixed_domain(a, b, U, time=t, symmetric=prof.symmetric)
        snaps.append(snap)
        diags.append(diagnostics(snap, with_ratio=False))
    traj = FlowTrajectory(snaps, diags, stop_reason=reason, steps=steps)
    if len(snaps) >= 10:
        traj.extinction_estimate = estimate_extinction(traj)
    return traj


def estimate_extinction(traj: FlowTrajectory, tail: int = 10) -> ExtinctionEstimate:
    """Extinction time from the area law and extinction point from the midpoint trend.

    Every snapshot predicts ``T = t + 3 |Omega| / (4 pi)``; the last one is
    used since it extrapolates over the shortest interval.  The midpoint
    ``(a + b) / 2`` is fitted linearly over the last ``tail`` snapshots and
    evaluated at ``T``.
    """
    if len(traj.snapshots) < 10:
        raise DomainError("need at least 10 snapshots")
    t = traj.times()
    area = traj.areas()
    if np.any(np.diff(area) >= 0.0):
        raise DomainError("area is not strictly decreasing")
    predicted = t + 3.0 * area / (4.0 * math.pi)
    T = float(predicted[-1])
    slope, intercept = np.polyfit(t, area, 1)
    fit_res = float(np.max(np.abs(area - (slope * t + intercept))))
    mids = np.array([0.5 * (s.a + s.b) for s in traj.snapshots])
    k = min(tail, t.size)
    coef = np.polyfit(t[-k:], mids[-k:], 1)
    mid_res = float(np.max(np.abs(mids[-k:] - np.polyval(coef, t[-k:]))))
    return ExtinctionEstimate(T=T, x0=(float(np.polyval(coef, T)), 0.0), area_slope=float(slope),
                              area_residual=fit_res, midpoint_residual=mid_res)


# ---------------------------------------------------------------------------
# translating solution used as an interior oracle

def grim_reaper_reference(x, t):
    """``log cos x - t``, the downward translating graph solution."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 0.5 * math.pi):
        raise DomainError("grim reaper needs |x| < pi/2")
    val = np.log(np.cos(x)) - t
    return float(val) if val.ndim == 0 else val


def step_fixed_boundary(x: np.ndarray, u: np.ndarray, dt: float, left: float, right: float) -> np.ndarray:
    """Explicit step of ``u_t = u_xx / (1 + u_x^2)`` on a fixed uniform grid with Dirichlet data."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    h = x[1] - x[0]
    ux = (u[2:] - u[:-2]) / (2.0 * h)
    uxx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    new = np.empty_like(u)
    new[1:-1] = u[1:-1] + dt * uxx / (1.0 + ux * ux)
    new[0], new[-1] = left, right
    return new


def grim_reaper_error(n: int, t_end: float = 0.05, half_width: float = 1.0, cfl: float = 0.25) -> float:
    """Max error of the fixed-boundary stepper against the translating solution.

    The step is ``cfl dx^2``, so halving ``dx`` quarters ``dt`` and the error
    ``C (dx^2 + dt)`` should fall by a factor four.
    """
    x = np.linspace(-half_width, half_width, n + 1)
    h = x[1] - x[0]
    steps = max(1, math.ceil(t_end / (cfl * h * h)))
    dt = t_end / steps
    u = grim_reaper_reference(x, 0.0)
    for k in range(steps):
        t1 = (k + 1) * dt
        u = step_fixed_boundary(x, u, dt, grim_reaper_reference(x[0], t1), grim_reaper_reference(x[-1], t1))
    return float(np.max(np.abs(u - grim_reaper_reference(x, t_end))))
