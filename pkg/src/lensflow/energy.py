"""Energy levels of the support-function equation ``S'' + S = 1/S``.

Along a self-similar arc ``E = S_theta^2 + S^2 - 2 log S`` is constant.  Scaling
``x = S / S_min`` turns the turning-angle integrals into functions of a single
ratio: ``psi(eta)`` (minimum to a 60 degree point) and ``theta(rho)`` (minimum
to maximum of ``|F|``).  Both integrands have inverse square-root endpoint
singularities; they are removed with ``x = endpoint +- s^2`` before quadrature.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import BracketError, DomainError, ToleranceError

SQRT3 = math.sqrt(3.0)

# sign change of A(eta) established by hand
ETA0_LOWER = 1.3365
ETA0_UPPER = 1.33652
ETA_CAP = 1.9


def _log1p_ratio(z: float) -> float:
    """``log(1 + z) / z`` without cancellation for small ``z``."""
    if abs(z) < 1e-4:
        return 1.0 - z / 2.0 + z * z / 3.0 - z**3 / 4.0
    return math.log1p(z) / z


def coefficient_C(eta: float) -> float:
    """``(4 eta^2 - 3) / (3 log eta)``; equals ``2 / S_min^2`` on the level through ``eta``."""
    if eta <= 1.0:
        raise DomainError("coefficient_C needs eta > 1")
    return (4.0 * eta * eta - 3.0) / (3.0 * math.log(eta))


def A_of_eta(eta: float) -> float:
    """Half the derivative of :func:`coefficient_C`."""
    if eta <= 1.0:
        raise DomainError("A needs eta > 1")
    lg = math.log(eta)
    return (8.0 * eta * eta * lg - 4.0 * eta * eta + 3.0) / (6.0 * eta * lg * lg)


def B_of_eta(eta: float) -> float:
    """``6 eta^2 log^3(eta) A'(eta)``, positive for ``eta >= 1``."""
    if eta < 1.0:
        raise DomainError("B needs eta >= 1")
    lg = math.log(eta)
    e2 = eta * eta
    return 8.0 * e2 * lg * lg - 12.0 * e2 * lg - 3.0 * lg + 8.0 * e2 - 6.0


def bisect_bracket(f, lo: float, hi: float, tol: float, max_iter: int = 400) -> tuple[float, float]:
    """Shrink a sign-change bracket of ``f`` to width ``<= tol``; returns the bracket."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo, lo
    if fhi == 0.0:
        return hi, hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


@functools.lru_cache(maxsize=16)
def eta0(tol: float = 1e-13) -> tuple[float, float]:
    """Bracket of the unique zero of ``A`` (the minimiser of ``coefficient_C``)."""
    if tol < 1e-14:
        raise DomainError("eta0 tolerance below 1e-14")
    return bisect_bracket(A_of_eta, ETA0_LOWER, ETA0_UPPER, tol)


def eta0_value() -> float:
    lo, hi = eta0()
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# turning-angle integrals

def denominator(x: float, coeff: float) -> float:
    """``1 - x^2 + coeff * log(x)``, the radicand of the turning integrals."""
    return 1.0 - x * x + coeff * math.log(x)


def _left_radicand_over_s2(s: float, coeff: float) -> float:
    # d(1 + s^2) / s^2 with d(1) = 0 built in
    s2 = s * s
    return coeff * _log1p_ratio(s2) - (2.0 + s2)


def _right_radicand_over_s2(s: float, coeff: float, top: float) -> float:
    # d(top - s^2) / s^2 assuming d(top) = 0
    s2 = s * s
    return 2.0 * top - s2 + coeff * _log1p_ratio(-s2 / top) * (-1.0 / top)


def _quad(f, lo: float, hi: float, tol: float) -> float:
    val, err = quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=200)
    if not err <= max(10 * tol, 1e-14 * abs(val)):
        raise ToleranceError(f"quadrature error estimate {err} exceeds {tol}")
    return val


def psi(eta: float, tol: float = 1e-12) -> float:
    """Turning angle from the minimum of ``|F|`` to the 60 degree point at ratio ``eta``."""
    if eta <= 1.0:
        raise DomainError("psi needs eta > 1")
    coeff = coefficient_C(eta)

    def integrand(s: float) -> float:
        return 2.0 / math.sqrt(_left_radicand_over_s2(s, coeff))

    return _quad(integrand, 0.0, math.sqrt(eta - 1.0), tol)


def psi_log_moment(eta: float, tol: float = 1e-12) -> float:
    """``int_1^eta log x / d(x)^(3/2) dx``, the integral in the derivative of ``psi``."""
    if eta <= 1.0:
        raise DomainError("needs eta > 1")
    coeff = coefficient_C(eta)

    def integrand(s: float) -> float:
        q = _left_radicand_over_s2(s, coeff)
        return 2.0 * _log1p_ratio(s * s) / q**1.5

    return _quad(integrand, 0.0, math.sqrt(eta - 1.0), tol)


def psi_derivative(eta: float, tol: float = 1e-12) -> float:
    """Closed-form derivative ``sqrt(3)/eta - A(eta) * psi_log_moment(eta)``."""
    return SQRT3 / eta - A_of_eta(eta) * psi_log_moment(eta, tol)


def psi_upper_bound_riemann(eta: float, pieces: int = 3) -> float:
    """Upper bound for ``psi(eta)`` from ``(x-1)/d(x)`` increasing on ``[1, eta]``.

    On each of ``pieces`` equal subintervals the factor ``sqrt((x-1)/d(x))`` is
    replaced by its right-endpoint value and ``1/sqrt(x-1)`` is integrated exactly.
    """
    if eta <= 1.0 or pieces < 1:
        raise DomainError("need eta > 1 and pieces >= 1")
    coeff = coefficient_C(eta)
    dx = (eta - 1.0) / pieces
    total = 0.0
    for i in range(pieces):
        right = (i + 1) * dx
        xr = 1.0 + right
        # the last piece ends where d = eta^2 / 3 exactly
        d = eta * eta / 3.0 if i == pieces - 1 else denominator(xr, coeff)
        total += math.sqrt(right / d) * 2.0 * (math.sqrt(right) - math.sqrt(i * dx))
    return total


def psi_lower_bound_riemann(eta: float, pieces: int = 3) -> float:
    """Matching lower bound: left-endpoint values of ``sqrt((x-1)/d(x))``."""
    if eta <= 1.0 or pieces < 1:
        raise DomainError("need eta > 1 and pieces >= 1")
    coeff = coefficient_C(eta)
    dx = (eta - 1.0) / pieces
    total = 0.0
    for i in range(pieces):
        left = i * dx
        if i == 0:
            factor = 1.0 / math.sqrt(coeff - 2.0)
        else:
            factor = math.sqrt(left / denominator(1.0 + left, coeff))
        total += factor * 2.0 * (math.sqrt((i + 1) * dx) - math.sqrt(left))
    return total


def eta_bar(eta_tilde: float, tol: float = 1e-14) -> float:
    """Partner ratio in ``(1, eta0]`` on the same energy level as ``eta_tilde >= eta0``."""
    lo, hi = eta0()
    e0 = 0.5 * (lo + hi)
    if eta_tilde < lo:
        raise DomainError("eta_bar needs eta_tilde >= eta0")
    if eta_tilde <= hi:
        return eta_tilde
    target = coefficient_C(eta_tilde)
    # C -> infinity as eta -> 1, so a lower end close enough to 1 always brackets
    left = 1.0 + 1e-3
    while coefficient_C(left) <= target:
        left = 1.0 + (left - 1.0) * 1e-3
        if left - 1.0 < 1e-300:
            raise BracketError("eta_bar bracket not found")
    return float(brentq(lambda e: coefficient_C(e) - target, left, e0, xtol=tol, rtol=1e-15))


def sigma(eta_tilde: float, tol: float = 1e-12) -> float:
    """Total turning of an arc ending at the two different 60 degree points of one level."""
    return psi(eta_tilde, tol) + psi(eta_bar(eta_tilde), tol)


def eta_eta_bar_relation(eta: float) -> float:
    """``log(eta_bar) - (4 eta_bar^2 - 3)/(4 eta^2 - 3) log(eta)``, zero on the level."""
    eb = eta_bar(eta)
    return math.log(eb) - (4 * eb * eb - 3) / (4 * eta * eta - 3) * math.log(eta)


# ---------------------------------------------------------------------------
# minimum-to-maximum turning

def theta(rho: float, tol: float = 1e-12) -> float:
    """Turning angle between a minimum and the next maximum of ``|F|``, ``rho = r_max / r_min``."""
    if rho <= 1.0:
        raise DomainError("theta needs rho > 1")
    lr = math.log(rho)
    coeff = (rho * rho - 1.0) / lr
    # split at the maximiser of d, x = sqrt(coeff / 2)
    mid = math.sqrt(0.5 * coeff)
    if not 1.0 < mid < rho:
        mid = 0.5 * (1.0 + rho)

    def left(s: float) -> float:
        return 2.0 / math.sqrt(_left_radicand_over_s2(s, coeff))

    def right(s: float) -> float:
        return 2.0 / math.sqrt(_right_radicand_over_s2(s, coeff, rho))

    # scaled tolerance: near rho = 1 the integrands are large but smooth
    return (_quad(left, 0.0, math.sqrt(mid - 1.0), tol)
            + _quad(right, 0.0, math.sqrt(rho - mid), tol))


def theta_log(log_rho: float, tol: float = 1e-12) -> float:
    """``theta`` as a function of ``log(rho)``, usable far beyond float overflow of ``rho``.

    With ``x = rho * exp(-w)`` the integral becomes
    ``int_0^l exp(-w) / sqrt(1 - exp(-2w) - q w / l) dw`` with ``l = log(rho)`` and
    ``q = 1 - rho^-2``; both endpoint zeros are simple and removed by ``w = s^2``
    and ``w = l - s^2``.
    """
    ell = float(log_rho)
    if not ell > 0.0:
        raise DomainError("theta needs log(rho) > 0")
    q = -math.expm1(-2.0 * ell)
    mid = 0.5 * math.log(2.0 * ell / q)
    if not 0.0 < mid < ell:
        mid = 0.5 * ell
    tail = math.exp(-2.0 * ell)

    def left(s: float) -> float:
        ratio = 2.0 if s == 0.0 else -math.expm1(-2.0 * s * s) / (s * s)
        return 2.0 * math.exp(-s * s) / math.sqrt(ratio - q / ell)

    def right(s: float) -> float:
        if s == 0.0:
            grow = 2.0 * tail
        elif s * s < 0.5:
            grow = tail * math.expm1(2.0 * s * s) / (s * s)
        else:
            grow = (math.exp(2.0 * s * s - 2.0 * ell) - tail) / (s * s)
        return 2.0 * math.exp(s * s - ell) / math.sqrt(q / ell - grow)

    return (_quad(left, 0.0, math.sqrt(mid), tol)
            + _quad(right, 0.0, math.sqrt(ell - mid), tol))


def s_minus_from_rho(rho: float) -> float:
    return math.sqrt(2.0 * math.log(rho) / (rho * rho - 1.0))


def rho_from_s_minus(s_minus: float) -> float:
    """Ratio ``S_+ / S_-`` for the level through ``(S_-, 0)``, ``0 < S_- < 1``."""
    if not 0.0 < s_minus < 1.0:
        raise DomainError("S_- must lie in (0, 1)")
    energy = s_minus * s_minus - 2.0 * math.log(s_minus)

    def f(s: float) -> float:
        return s * s - 2.0 * math.log(s) - energy

    hi = 2.0
    while f(hi) < 0:
        hi *= 2.0
    s_plus = brentq(f, 1.0, hi, xtol=1e-15, rtol=1e-15)
    return s_plus / s_minus


# ---------------------------------------------------------------------------
# energy levels

def level_energy(s: float, s_theta: float) -> float:
    return s_theta * s_theta + s * s - 2.0 * math.log(s)


@dataclass(frozen=True)
class EnergyLevel:
    E: float
    S_minus: float
    S_plus: float
    S1: float | None
    S2: float | None

    @property
    def rho(self) -> float:
        return self.S_plus / self.S_minus

    @property
    def eta_bar(self) -> float | None:
        return None if self.S1 is None else self.S1 / self.S_minus

    @property
    def eta(self) -> float | None:
        return None if self.S2 is None else self.S2 / self.S_minus

    def reaches_sixty_degree_lines(self) -> bool:
        return self.S1 is not None


_LINE_MIN_S = SQRT3 / 2.0
_LINE_MIN_E = 1.0 - 2.0 * math.log(_LINE_MIN_S)


def energy_level(E: float) -> EnergyLevel:
    """Level set ``{S_theta^2 + S^2 - 2 log S = E}`` and its distinguished abscissae."""
    if E < 1.0:
        raise DomainError("energy levels start at E = 1")

    def axis(s: float) -> float:
        return s * s - 2.0 * math.log(s) - E

    if E == 1.0:
        s_minus = s_plus = 1.0
    else:
        lo = 0.5
        while axis(lo) < 0:
            lo *= 0.5
        s_minus = brentq(axis, lo, 1.0, xtol=1e-16, rtol=1e-15)
        hi = 2.0
        while axis(hi) < 0:
            hi *= 2.0
        s_plus = brentq(axis, 1.0, hi, xtol=1e-15, rtol=1e-15)

    def line(s: float) -> float:
        return 4.0 * s * s / 3.0 - 2.0 * math.log(s) - E

    s1 = s2 = None
    if E > _LINE_MIN_E:
        s1 = brentq(line, s_minus, _LINE_MIN_S, xtol=1e-16, rtol=1e-15)
        s2 = brentq(line, _LINE_MIN_S, s_plus, xtol=1e-15, rtol=1e-15)
    elif E == _LINE_MIN_E:
        s1 = s2 = _LINE_MIN_S
    return EnergyLevel(E, s_minus, s_plus, s1, s2)


def energy_level_from_s_minus(s_minus: float) -> EnergyLevel:
    if not 0.0 < s_minus <= 1.0:
        raise DomainError("S_- must lie in (0, 1]")
    return energy_level(s_minus * s_minus - 2.0 * math.log(s_minus))


def eta_from_h(h: float) -> dict[str, float]:
    """Ratios ``eta > 1`` with ``2 log eta = (4/3 eta^2 - 1) h^2``.

    Returns ``{"bar": ..., "tilde": ...}`` for the roots below and above
    ``eta0``; empty when the level through ``h`` misses the 60 degree lines.
    """
    if not 0.0 < h <= 1.0:
        raise DomainError("h must lie in (0, 1]")
    target = 2.0 / (h * h)
    e0 = eta0_value()
    cmin = coefficient_C(e0)
    if target < cmin:
        return {}
    if target == cmin:
        return {"bar": e0, "tilde": e0}
    left = 1.0 + 1e-3
    while coefficient_C(left) <= target:
        left = 1.0 + (left - 1.0) * 1e-3
    right = 2.0
    while coefficient_C(right) <= target:
        right *= 2.0

    def f(e: float) -> float:
        return coefficient_C(e) - target

    return {
        "bar": float(brentq(f, left, e0, xtol=1e-15, rtol=1e-15)),
        "tilde": float(brentq(f, e0, right, xtol=1e-15, rtol=1e-15)),
    }


@functools.lru_cache(maxsize=4)
def eta_star(tol: float = 1e-13) -> float:
    """Unique ``eta`` with ``psi(eta) = pi/3`` (the symmetric lens)."""
    lo, _ = eta0()
    return float(brentq(lambda e: psi(e) - math.pi / 3.0, lo, ETA_CAP, xtol=tol, rtol=1e-15))


def sample_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.linspace(lo, hi, count)
