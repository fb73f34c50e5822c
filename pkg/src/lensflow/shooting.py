"""Self-similarly shrinking lens profiles by shooting from the apex.

The profile equation is ``u'' = (1 + u'^2)(x u' - u)`` with ``u(0) = h`` and
``u'(0) = 0``.  A symmetric shrinking lens is a solution that reaches the axis
with slope exactly ``-sqrt(3)``; its apex height is found by bisection on ``h``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError, ToleranceError
from .geometry import SQRT3, GridProfile

SLOPE_CAP = 50.0
SQRT2 = math.sqrt(2.0)

# constants used by the small-height exclusion argument
H_MAX = 0.5869
H1 = 0.5587
B1 = math.sqrt(-6.0 + 2.0 * math.sqrt(15.0))


def energy_u(x: float, u: float, u_prime: float) -> float:
    """First integral ``<F, nu> exp(-|F|^2 / 2)`` of the profile equation."""
    return (u - x * u_prime) / math.sqrt(1.0 + u_prime * u_prime) * math.exp(-0.5 * (x * x + u * u))


def _rhs(x: float, u: float, p: float) -> float:
    return (1.0 + p * p) * (x * p - u)


def _rk4(x: float, u: float, p: float, dx: float) -> tuple[float, float]:
    k1u, k1p = p, _rhs(x, u, p)
    half = 0.5 * dx
    k2u = p + half * k1p
    k2p = _rhs(x + half, u + half * k1u, k2u)
    k3u = p + half * k2p
    k3p = _rhs(x + half, u + half * k2u, k3u)
    k4u = p + dx * k3p
    k4p = _rhs(x + dx, u + dx * k3u, k4u)
    sixth = dx / 6.0
    return (u + sixth * (k1u + 2 * k2u + 2 * k3u + k4u),
            p + sixth * (k1p + 2 * k2p + 2 * k3p + k4p))


@dataclass(frozen=True, eq=False)
class SelfSimilarProfile:
    """RK4 samples ``(x, u, u')`` of one shot from apex height ``h``."""

    h: float
    x: np.ndarray
    u: np.ndarray
    up: np.ndarray
    contact_x: float | None
    contact_slope: float | None
    energy: float
    outcome: str

    @property
    def b(self) -> float | None:
        return self.contact_x

    def energy_samples(self) -> np.ndarray:
        return np.array([energy_u(x, u, p) for x, u, p in zip(self.x, self.u, self.up)])

    def second_derivative(self) -> np.ndarray:
        return (1.0 + self.up**2) * (self.x * self.up - self.u)

    def support(self) -> np.ndarray:
        """``<F, nu>`` along the samples, equal to the curvature for a shrinker."""
        return (self.u - self.x * self.up) / np.sqrt(1.0 + self.up**2)

    def total_turning(self) -> float:
        """Tangent turning from the apex to the last sample."""
        return float(abs(math.atan(self.up[-1]) - math.atan(self.up[0])))


def integrate_profile(h: float, dx: float = 1e-4, slope_cap: float = SLOPE_CAP,
                      hit_tol: float = 1e-9) -> SelfSimilarProfile:
    """Shoot from ``(0, h)`` with zero slope until the profile meets the axis.

    The step is ``dx`` while ``|u'| <= sqrt(3)`` and shrinks like
    ``(1 + u'^2)^(-3/2)`` beyond, so the slope increment per step stays bounded
    on the way to a vertical tangent.  Integration stops at the first zero of
    ``u`` (located by bisection inside the last step), when ``|u'|`` exceeds
    ``slope_cap`` or past ``x = sqrt(2)``.
    """
    if not 0.0 < h <= 1.0:
        raise DomainError(f"apex height must lie in (0, 1], got {h}")
    xs, us, ps = [0.0], [h], [0.0]
    x, u, p = 0.0, h, 0.0
    contact_x = contact_slope = None
    outcome = "undershoot"
    while True:
        factor = min(1.0, (4.0 / (1.0 + p * p)) ** 1.5)
        step = dx * factor
        if step < 1e-14:
            raise ToleranceError("step underflow near a vertical tangent")
        un, pn = _rk4(x, u, p, step)
        if un <= 0.0:
            lo, hi = 0.0, step
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                if _rk4(x, u, p, mid)[0] > 0.0:
                    lo = mid
                else:
                    hi = mid
            # endpoint with |u| smallest, clamped onto the axis
            ulo, plo = _rk4(x, u, p, lo)
            uhi, phi = _rk4(x, u, p, hi)
            if abs(ulo) <= abs(uhi):
                x, p = x + lo, plo
            else:
                x, p = x + hi, phi
            u = 0.0
            xs.append(x)
            us.append(u)
            ps.append(p)
            contact_x, contact_slope = x, p
            if abs(p + SQRT3) <= hit_tol:
                outcome = "hit"
            elif p > -SQRT3:
                outcome = "undershoot"
            else:
                outcome = "overshoot"
            break
        x, u, p = x + step, un, pn
        xs.append(x)
        us.append(u)
        ps.append(p)
        if p < -slope_cap:
            outcome = "blowup"
            break
        if x > SQRT2:
            raise ToleranceError(f"shot from h={h} left the barrier region x <= sqrt(2)")
    return SelfSimilarProfile(
        h=h,
        x=np.array(xs),
        u=np.array(us),
        up=np.array(ps),
        contact_x=contact_x,
        contact_slope=contact_slope,
        energy=h * math.exp(-0.5 * h * h),
        outcome=outcome,
    )


def _slope_residual(prof: SelfSimilarProfile) -> float:
    """Positive when the shot lands too flat, negative when it lands too steep."""
    if prof.contact_slope is None:
        return -math.inf
    return prof.contact_slope + SQRT3


@functools.lru_cache(maxsize=8)
def find_symmetric_lens(tol: float = 1e-10, dx: float = 1e-4) -> tuple[float, SelfSimilarProfile]:
    """Apex height ``H`` of the symmetric self-similar lens and its profile.

    Bisection on the shot outcome: shots below ``H`` land flatter than 60
    degrees, shots above land steeper (or turn vertical first).
    """
    if tol < 1e-12:
        raise DomainError("tolerance below 1e-12 is not attainable with this integrator")
    lo, hi = 0.55, 0.99
    for _ in range(20):
        if _slope_residual(integrate_profile(lo, dx)) > 0:
            break
        lo *= 0.5
    else:
        raise BracketError("no undershooting apex height found")
    for _ in range(20):
        if _slope_residual(integrate_profile(hi, dx)) < 0:
            break
        hi = 0.5 * (hi + 1.0)
    else:
        raise BracketError("no overshooting apex height found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        prof = integrate_profile(mid, dx, hit_tol=tol)
        res = _slope_residual(prof)
        if abs(res) < tol:
            return mid, prof
        if res > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps:
            break
    raise ToleranceError(f"contact slope residual did not reach {tol}")


@dataclass(frozen=True)
class BarrierBounds:
    """Upper barriers for the symmetric shot ``u^h`` (valid for ``x > 0``)."""

    h: float

    def quartic(self, x):
        """``h - h x^2/2 - h x^4/24``."""
        x = np.asarray(x, dtype=float)
        return self.h * (1.0 - 0.5 * x**2 - x**4 / 24.0)

    def refined(self, x):
        """Degree-10 barrier obtained by feeding the quartic slope bound back in."""
        x = np.asarray(x, dtype=float)
        h2 = self.h**2
        poly = (0.5 * x**2 + (0.5 + h2) * x**4 / 12.0 + h2 * x**6 / 36.0
                + h2 * x**8 / 288.0 + h2 * x**10 / 6480.0)
        return self.h * (1.0 - poly)

    @property
    def quartic_root(self) -> float:
        return B1

    @property
    def refined_root(self) -> float:
        from scipy.optimize import brentq

        return float(brentq(lambda t: float(self.refined(t)), 0.0, B1))


def barrier_bounds(h: float) -> BarrierBounds:
    if not 0.0 < h < 1.0:
        raise DomainError("barrier bounds need 0 < h < 1")
    return BarrierBounds(h)


def symmetric_lens_graph(n: int, scale: float = 1.0, time: float = 0.0,
                         tol: float = 1e-10) -> GridProfile:
    """The self-similar lens, scaled by ``scale``, on a uniform grid of ``n`` intervals."""
    from scipy.interpolate import CubicHermiteSpline

    _, prof = find_symmetric_lens(tol)
    spline = CubicHermiteSpline(prof.x, prof.u, prof.up)
    b = prof.contact_x
    xs = np.linspace(-b, b, n + 1)
    u = spline(np.abs(xs))
    u[0] = u[-1] = 0.0
    x = scale * xs
    x[0], x[-1] = -scale * b, scale * b
    return GridProfile(x, np.maximum(scale * u, 0.0), time=time, symmetric=True)
