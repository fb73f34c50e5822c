"""Parabolic rescaling of a flow towards its extinction point.

``M^lambda_tau = lambda (M_{T + tau/lambda^2} - x0)``; with the normalisation
``lambda(t) = sqrt(-2t)`` a shrinker sits still at ``tau = -1/2``.  Gaussian
density ``int (4 pi s)^(-1/2) exp(-|x - x0|^2 / 4s) ds`` with ``s = T - t`` is
monotone along the flow and constant on shrinkers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .errors import DomainError
from .flow import FlowTrajectory, estimate_extinction
from .geometry import (
    GridProfile,
    NetworkSnapshot,
    Ray,
    curvature_samples,
    hausdorff_distance,
    network_from_profile,
)
from .parallel import pmap

TAIL = 1e-12


# ---------------------------------------------------------------------------
# time interpolation and rescaling

def profile_at(traj: FlowTrajectory, t: float) -> GridProfile:
    """Snapshot interpolated linearly in time on the fixed domain ``xi``."""
    times = traj.times()
    if not times[0] <= t <= times[-1]:
        raise DomainError(f"t = {t} outside the trajectory [{times[0]}, {times[-1]}]")
    k = int(np.searchsorted(times, t, side="right")) - 1
    k = min(max(k, 0), times.size - 2)
    p, q = traj.snapshots[k], traj.snapshots[k + 1]
    if p.n != q.n:
        raise DomainError("snapshots on different grids cannot be interpolated")
    w = (t - times[k]) / (times[k + 1] - times[k])
    if w == 0.0:
        return p
    if w == 1.0:
        return q
    a = (1 - w) * p.a + w * q.a
    b = (1 - w) * p.b + w * q.b
    u = (1 - w) * p.u + w * q.u
    return GridProfile.from_fixed_domain(a, b, u, time=t, symmetric=p.symmetric)


def rescale(traj: FlowTrajectory, lam: float, x0: Sequence[float] | None = None,
            T: float | None = None, tau: float = -0.5) -> NetworkSnapshot:
    """``lam (M_t - x0)`` at ``t = T + tau / lam^2`` (defaults from the extinction estimate)."""
    if not tau < 0.0:
        raise DomainError("tau must be negative")
    if not lam > 0.0:
        raise DomainError("lambda must be positive")
    if T is None or x0 is None:
        est = traj.extinction_estimate
        if est is None:
            raise DomainError("extinction time and point have not been estimated")
        T = est.T if T is None else T
        x0 = est.x0 if x0 is None else x0
    t = T + tau / (lam * lam)
    net = network_from_profile(profile_at(traj, t))
    out = net.transformed(x0, lam)
    out.meta.update({"lambda": lam, "tau": tau, "t": t})
    return out


# ---------------------------------------------------------------------------
# Gaussian density

def _heat_kernel(points: np.ndarray, x0: np.ndarray, s: float) -> np.ndarray:
    d2 = np.sum((points - x0) ** 2, axis=1)
    return np.exp(-d2 / (4.0 * s)) / math.sqrt(4.0 * math.pi * s)


def _polyline_integral(points: np.ndarray, x0: np.ndarray, s: float) -> float:
    vals = _heat_kernel(points, x0, s)
    seg = np.hypot(*np.diff(points, axis=0).T)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * seg))


def _ray_integral(ray: Ray, x0: np.ndarray, s: float) -> float:
    # exact: 1-d Gaussian along the ray times the perpendicular factor
    d = np.asarray(ray.direction)
    p = np.asarray(ray.base) - x0
    along = float(p @ d)
    perp2 = float(p @ p - along * along)
    return 0.5 * math.exp(-max(perp2, 0.0) / (4.0 * s)) * float(erfc(along / (2.0 * math.sqrt(s))))


def density_radius(s: float, tail: float = TAIL) -> float:
    """Radius beyond which the kernel weight of a line is below ``tail``."""
    return math.sqrt(4.0 * s * math.log(1.0 / tail))


def gaussian_density_parts(arcs: Sequence[np.ndarray], rays: Sequence[Ray], x0: Sequence[float],
                           s: float) -> tuple[float, float]:
    """Density of arcs plus rays at scale ``s = T - t``, and the truncation bound used on the arcs."""
    if not s > 0.0:
        raise DomainError("need t < T")
    c = np.asarray(x0, dtype=float)
    R = density_radius(s)
    total = 0.0
    for arc in arcs:
        pts = np.asarray(arc, dtype=float)
        # keep every segment with at least one end inside the truncation disc
        inside = np.sum((pts - c) ** 2, axis=1) <= R * R
        mask = inside | np.r_[inside[1:], False] | np.r_[False, inside[:-1]]
        if np.count_nonzero(mask) >= 2:
            total += _polyline_integral(pts[mask], c, s)
    total += sum(_ray_integral(r, c, s) for r in rays)
    return total, TAIL


def gaussian_density(snapshot: NetworkSnapshot, x0: Sequence[float], T: float, t: float) -> float:
    """Gaussian density ratio of a network at time ``t`` about the space-time point ``(x0, T)``."""
    if not t < T:
        raise DomainError("gaussian density needs t < T")
    value, _ = gaussian_density_parts([snapshot.upper_arc, snapshot.lower_arc], snapshot.rays, x0, T - t)
    return value


def density_series(traj: FlowTrajectory, x0=None, T=None) -> np.ndarray:
    est = traj.extinction_estimate
    T = est.T if T is None else T
    x0 = est.x0 if x0 is None else x0
    out = []
    for snap in traj.snapshots:
        if snap.time < T:
            out.append(gaussian_density(network_from_profile(snap), x0, T, snap.time))
    return np.array(out)


# ---------------------------------------------------------------------------
# extinction point

def extinction_point_estimate(traj: FlowTrajectory) -> tuple[float, tuple[float, float], dict[str, float]]:
    """``(T_hat, x0_hat, residuals)`` from the area law and the midpoint trend."""
    est = estimate_extinction(traj)
    return est.T, est.x0, {"area_slope": est.area_slope, "area_residual": est.area_residual,
                           "midpoint_residual": est.midpoint_residual}


# ---------------------------------------------------------------------------
# convergence to the shrinker

def density_gap_rms(profile: GridProfile, lam: float, x0: Sequence[float], tau: float) -> float:
    """RMS over the rescaled arc of ``kappa + <y, nu> / (2 tau)`` (outer normal), zero on the shrinker."""
    x = lam * (np.asarray(profile.x) - x0[0])
    u = lam * (np.asarray(profile.u) - x0[1])
    kappa = curvature_samples(x, u)
    ux = np.gradient(u, x, edge_order=2)
    norm = np.sqrt(1.0 + ux * ux)
    support = (u - x * ux) / norm
    gap = kappa + support / (2.0 * tau)
    ds = np.hypot(np.diff(x), np.diff(u))
    weights = np.r_[ds, 0.0] + np.r_[0.0, ds]
    return float(math.sqrt(np.sum(weights * gap * gap) / np.sum(weights)))


@dataclass
class RescaledSequence:
    lambdas: list[float]
    snapshots: list[NetworkSnapshot]
    hausdorff_to_limit: list[float]
    density_gap_rms: list[float]
    tau: float
    T: float
    x0: tuple[float, float]
    meta: dict = field(default_factory=dict)

    def rows(self) -> list[tuple[int, float, float, float]]:
        return [(i, lam, h, g) for i, (lam, h, g) in
                enumerate(zip(self.lambdas, self.hausdorff_to_limit, self.density_gap_rms))]

    def hausdorff_decreasing(self) -> bool:
        h = self.hausdorff_to_limit
        return all(b < a for a, b in zip(h, h[1:]))

    def gap_decreasing(self) -> bool:
        g = self.density_gap_rms
        return all(b < a for a, b in zip(g, g[1:]))


def limit_network() -> NetworkSnapshot:
    from .classify import construct_self_similar_network

    return construct_self_similar_network("lens")


def convergence_report(traj: FlowTrajectory, lambdas: Sequence[float], tau: float = -0.5,
                       limit: NetworkSnapshot | None = None, area_fraction: float = 0.05) -> RescaledSequence:
    """Rescale at ``tau`` for every ``lambda`` and measure the distance to the shrinking lens."""
    lambdas = [float(v) for v in lambdas]
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise DomainError("lambdas must be strictly increasing")
    est = traj.extinction_estimate
    if est is None:
        raise DomainError("extinction time and point have not been estimated")
    areas = traj.areas()
    if areas[-1] >= area_fraction * areas[0]:
        raise DomainError("trajectory has not come close enough to extinction")
    if any(lam * lam * est.T <= 1.0 for lam in lambdas):
        raise DomainError("every lambda needs lambda^2 T > 1")
    shrinker = limit_network() if limit is None else limit
    # the shrinker is normalised to tau = -1/2; other tau rescale it by sqrt(-2 tau)
    target = shrinker.loop() * math.sqrt(-2.0 * tau)

    def one(lam: float):
        snap = rescale(traj, lam, est.x0, est.T, tau)
        prof = profile_at(traj, est.T + tau / (lam * lam))
        return snap, hausdorff_distance(snap.loop(), target), density_gap_rms(prof, lam, est.x0, tau)

    results = pmap(one, lambdas)
    return RescaledSequence(
        lambdas=lambdas,
        snapshots=[r[0] for r in results],
        hausdorff_to_limit=[r[1] for r in results],
        density_gap_rms=[r[2] for r in results],
        tau=tau,
        T=est.T,
        x0=est.x0,
    )
