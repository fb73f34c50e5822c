"""Discrete lens profiles, network snapshots and the geometric measurements on them.

A lens is stored as the graph of ``u >= 0`` over ``[a, b]``; the full network is
that graph, its mirror image below the axis and the two half-lines of the axis
outside ``[a, b]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, InvalidGridError

SQRT3 = math.sqrt(3.0)

# relative floor below which consecutive abscissae count as coincident
_SPACING_FLOOR = 64 * np.finfo(float).eps


def _as_points(values: Any) -> np.ndarray:
    pts = np.asarray(values, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidGridError(f"expected an (N, 2) array of points, got shape {pts.shape}")
    return pts


@dataclass(frozen=True, eq=False)
class GridProfile:
    """Sampled graph ``u(x)`` on ``[a, b]`` with ``u(a) = u(b) = 0``."""

    x: np.ndarray
    u: np.ndarray
    time: float = 0.0
    symmetric: bool = True

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        u = np.array(self.u, dtype=float)
        if x.ndim != 1 or x.shape != u.shape:
            raise InvalidGridError("x and u must be 1-d arrays of equal length")
        if x.size < 3:
            raise InvalidGridError("a profile needs at least three nodes")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            raise InvalidGridError("profile contains non-finite values")
        if np.any(np.diff(x) <= 0.0):
            raise InvalidGridError("abscissae must be strictly increasing")
        if u[0] != 0.0 or u[-1] != 0.0:
            raise InvalidGridError("u must vanish at both contact points")
        if np.any(u < 0.0):
            raise InvalidGridError("u must be non-negative")
        x.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "time", float(self.time))

    @property
    def a(self) -> float:
        return float(self.x[0])

    @property
    def b(self) -> float:
        return float(self.x[-1])

    @property
    def n(self) -> int:
        """Number of intervals (the node count is ``n + 1``)."""
        return self.x.size - 1

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def xi(self) -> np.ndarray:
        return (self.x - self.a) / self.width

    @classmethod
    def from_fixed_domain(
        cls, a: float, b: float, values: np.ndarray, time: float = 0.0, symmetric: bool = True
    ) -> "GridProfile":
        """Build a profile from values on the uniform grid ``xi = linspace(0, 1)``."""
        values = np.asarray(values, dtype=float)
        xi = np.linspace(0.0, 1.0, values.size)
        x = a + (b - a) * xi
        x[0], x[-1] = a, b
        return cls(x, values, time=time, symmetric=symmetric)

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.u])

    def to_dict(self) -> dict[str, Any]:
        return {
            "time": self.time,
            "a": self.a,
            "b": self.b,
            "nodes": [[float(xx), float(uu)] for xx, uu in zip(self.x, self.u)],
            "symmetric": bool(self.symmetric),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GridProfile":
        nodes = _as_points(data["nodes"])
        prof = cls(nodes[:, 0], nodes[:, 1], time=data.get("time", 0.0),
                   symmetric=data.get("symmetric", True))
        if prof.a != float(data.get("a", prof.a)) or prof.b != float(data.get("b", prof.b)):
            raise InvalidGridError("'a'/'b' disagree with the first/last node")
        return prof


@dataclass(frozen=True)
class Ray:
    """Half-line ``base + s * direction`` for ``s >= 0``."""

    base: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self) -> None:
        d = np.asarray(self.direction, dtype=float)
        norm = float(np.hypot(*d))
        if norm == 0.0:
            raise DomainError("ray direction must be non-zero")
        object.__setattr__(self, "base", (float(self.base[0]), float(self.base[1])))
        object.__setattr__(self, "direction", (float(d[0] / norm), float(d[1] / norm)))

    def segment(self, length: float) -> np.ndarray:
        b = np.asarray(self.base)
        return np.vstack([b, b + length * np.asarray(self.direction)])


@dataclass(frozen=True)
class Junction:
    point: tuple[float, float]
    tangents: tuple[tuple[float, float], ...]

    def tangent_sum(self) -> float:
        """Norm of the sum of the incident unit tangents; zero at a 120 degree junction."""
        return float(np.hypot(*np.sum(np.asarray(self.tangents), axis=0)))

    def angles(self) -> list[float]:
        """Pairwise angles between the incident tangents, in radians."""
        t = np.asarray(self.tangents)
        out = []
        for i in range(len(t)):
            for j in range(i + 1, len(t)):
                out.append(float(np.arccos(np.clip(t[i] @ t[j], -1.0, 1.0))))
        return out


@dataclass(frozen=True, eq=False)
class NetworkSnapshot:
    """Planar geometry of a lens-type network: two arcs, two rays, two junctions."""

    upper_arc: np.ndarray
    lower_arc: np.ndarray
    rays: tuple[Ray, Ray]
    junctions: tuple[Junction, Junction]
    symmetric: bool = True
    time: float = 0.0
    kind: str = "lens"
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("upper_arc", "lower_arc"):
            pts = _as_points(getattr(self, name)).copy()
            if pts.shape[0] < 2:
                raise InvalidGridError(f"{name} needs at least two points")
            pts.setflags(write=False)
            object.__setattr__(self, name, pts)

    @property
    def left_ray(self) -> Ray:
        return self.rays[0]

    @property
    def right_ray(self) -> Ray:
        return self.rays[1]

    def loop(self) -> np.ndarray:
        """Closed polyline of the bounded component: upper arc then lower arc reversed."""
        return np.vstack([self.upper_arc, self.lower_arc[::-1][1:]])

    def max_junction_defect(self) -> float:
        return max(j.tangent_sum() for j in self.junctions)

    def is_mirror_symmetric(self, tol: float = 1e-9) -> bool:
        mirrored = self.upper_arc * np.array([1.0, -1.0])
        return self.lower_arc.shape == mirrored.shape and bool(
            np.max(np.abs(self.lower_arc - mirrored)) <= tol
        )

    def transformed(self, shift: Sequence[float], scale: float) -> "NetworkSnapshot":
        """Return ``scale * (self - shift)``."""
        s = np.asarray(shift, dtype=float)
        rays = tuple(Ray(tuple(scale * (np.asarray(r.base) - s)), r.direction) for r in self.rays)
        junctions = tuple(
            Junction(tuple(scale * (np.asarray(j.point) - s)), j.tangents) for j in self.junctions
        )
        return NetworkSnapshot(
            scale * (self.upper_arc - s),
            scale * (self.lower_arc - s),
            rays,  # type: ignore[arg-type]
            junctions,  # type: ignore[arg-type]
            symmetric=self.symmetric,
            time=self.time,
            kind=self.kind,
            meta=dict(self.meta),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "time": self.time,
            "symmetric": bool(self.symmetric),
            "upper_arc": self.upper_arc.tolist(),
            "lower_arc": self.lower_arc.tolist(),
            "rays": [{"base": list(r.base), "direction": list(r.direction)} for r in self.rays],
            "junctions": [
                {"point": list(j.point), "tangents": [list(t) for t in j.tangents]}
                for j in self.junctions
            ],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NetworkSnapshot":
        rays = tuple(Ray(tuple(r["base"]), tuple(r["direction"])) for r in data["rays"])
        junctions = tuple(
            Junction(tuple(j["point"]), tuple(tuple(t) for t in j["tangents"]))
            for j in data["junctions"]
        )
        return cls(
            np.asarray(data["upper_arc"], dtype=float),
            np.asarray(data["lower_arc"], dtype=float),
            rays,  # type: ignore[arg-type]
            junctions,  # type: ignore[arg-type]
            symmetric=data.get("symmetric", True),
            time=data.get("time", 0.0),
            kind=data.get("kind", "lens"),
            meta=data.get("meta", {}),
        )


@dataclass(frozen=True)
class Diagnostics:
    time: float
    area: float
    length: float
    kappa_min: float
    kappa_max: float
    ratio_min: float
    a: float
    b: float
    max_slope: float

    CSV_HEADER = ("time", "area", "length", "kappa_min", "kappa_max", "ratio_min", "a", "b")

    def csv_row(self) -> list[float]:
        return [getattr(self, k) for k in self.CSV_HEADER]


# ---------------------------------------------------------------------------
# finite differences


def _check_spacing(x: np.ndarray) -> None:
    dx = np.diff(x)
    floor = _SPACING_FLOOR * max(1.0, float(np.max(np.abs(x))))
    if np.any(dx <= floor):
        raise InvalidGridError("degenerate node spacing")


def fd_weights(nodes: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0``."""
    nodes = np.asarray(nodes, dtype=float) - x0
    m = nodes.size
    vander = np.vander(nodes, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vander, rhs)


def contact_derivatives(x: np.ndarray, u: np.ndarray, side: str, points: int = 3) -> tuple[float, float]:
    """One-sided ``(u_x, u_xx)`` at a contact point.

    ``points`` nodes for the slope (order ``points - 1``) and four for the
    second derivative, which is second-order accurate on smooth grids.
    """
    m = max(points, 4)
    if side == "left":
        xs, us = x[:m], u[:m]
    elif side == "right":
        xs, us = x[-m:][::-1], u[-m:][::-1]
    else:
        raise ValueError("side must be 'left' or 'right'")
    ux = float(fd_weights(xs[:points], xs[0], 1) @ us[:points])
    xs, us = xs[:4], us[:4]
    uxx = float(fd_weights(xs, xs[0], 2) @ us)
    return ux, uxx


def curvature_samples(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Signed curvature at every node of the graph ``(x, u)``; positive where concave.

    Interior nodes use the circle through three consecutive points (exact on
    circles, second order on smoothly spaced grids); the end nodes use the
    one-sided graph formula.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.size < 5:
        raise InvalidGridError("curvature needs at least five nodes")
    _check_spacing(x)
    p = np.column_stack([x, u])
    d1 = p[1:-1] - p[:-2]
    d2 = p[2:] - p[1:-1]
    d3 = p[2:] - p[:-2]
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    lengths = np.hypot(*d1.T) * np.hypot(*d2.T) * np.hypot(*d3.T)
    kappa = np.empty_like(x)
    kappa[1:-1] = -2.0 * cross / lengths
    for idx, side in ((0, "left"), (-1, "right")):
        ux, uxx = contact_derivatives(x, u, side)
        kappa[idx] = -uxx / (1.0 + ux * ux) ** 1.5
    return kappa


def curvature(profile: GridProfile) -> np.ndarray:
    return curvature_samples(profile.x, profile.u)


def segment_slopes(profile: GridProfile) -> np.ndarray:
    return np.diff(profile.u) / np.diff(profile.x)


def enclosed_area(profile: GridProfile) -> float:
    """Area of the lens, twice the trapezoid integral of ``u``."""
    return float(2.0 * np.trapezoid(profile.u, profile.x))


def network_length(profile: GridProfile) -> float:
    """Length of both curved arcs, twice the integral of ``sqrt(1 + u_x^2)``."""
    return float(2.0 * np.sum(np.hypot(np.diff(profile.x), np.diff(profile.u))))


# ---------------------------------------------------------------------------
# extrinsic / intrinsic distance ratio

_RATIO_NODE_CAP = 512


def reduced_loop(profile: GridProfile, cap: int = _RATIO_NODE_CAP) -> np.ndarray:
    """Closed polygon of the reduced network, at most ``cap`` intervals per arc."""
    x, u = profile.x, profile.u
    if profile.n > cap:
        stride = math.ceil(profile.n / cap)
        keep = np.unique(np.r_[np.arange(0, profile.n, stride), profile.n])
        x, u = x[keep], u[keep]
    upper = np.column_stack([x, u])
    lower = np.column_stack([x[-2:0:-1], -u[-2:0:-1]])
    return np.vstack([upper, lower])


def _ratio_matrix(loop: np.ndarray) -> tuple[np.ndarray, float]:
    seg = np.hypot(*np.diff(np.vstack([loop, loop[:1]]), axis=0).T)
    total = float(seg.sum())
    s = np.r_[0.0, np.cumsum(seg[:-1])]
    d = np.abs(s[:, None] - s[None, :])
    d_in = np.minimum(d, total - d)
    psi = total / math.pi * np.sin(math.pi * d_in / total)
    d_ex = np.hypot(loop[:, None, 0] - loop[None, :, 0], loop[:, None, 1] - loop[None, :, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d_ex / psi
    np.fill_diagonal(ratio, np.inf)
    return ratio, total


def distance_ratio_min(profile: GridProfile) -> tuple[float, tuple[int, int]]:
    """Minimum over node pairs of extrinsic distance over modified intrinsic distance.

    Indices refer to :func:`reduced_loop` ordering (upper arc left to right, then
    the lower arc back from right to left).
    """
    if profile.n < 8:
        raise InvalidGridError("distance ratio needs at least 8 intervals per arc")
    ratio, _ = _ratio_matrix(reduced_loop(profile))
    flat = int(np.argmin(ratio))
    i, j = divmod(flat, ratio.shape[1])
    return float(ratio[i, j]), (min(i, j), max(i, j))


def distance_ratio(profile: GridProfile, i: int, j: int) -> float:
    ratio, _ = _ratio_matrix(reduced_loop(profile))
    return float(ratio[i, j])


# ---------------------------------------------------------------------------
# Hausdorff distance

def _point_polyline_distance(points: np.ndarray, line: np.ndarray, chunk: int = 2048) -> np.ndarray:
    a = line[:-1]
    ab = line[1:] - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ab2 = np.where(ab2 == 0.0, 1.0, ab2)
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], chunk):
        p = points[start:start + chunk]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("ijk,jk->ij", ap, ab) / ab2, 0.0, 1.0)
        diff = ap - t[..., None] * ab[None, :, :]
        out[start:start + chunk] = np.sqrt(np.min(np.einsum("ijk,ijk->ij", diff, diff), axis=1))
    return out


def hausdorff_distance(first: Any, second: Any) -> float:
    """Symmetric Hausdorff distance between two polylines, measured from their vertices."""
    p = _as_points(first)
    q = _as_points(second)
    if p.shape[0] == 0 or q.shape[0] == 0:
        raise DomainError("Hausdorff distance of an empty polyline")
    if p.shape[0] == 1:
        p = np.vstack([p, p])
    if q.shape[0] == 1:
        q = np.vstack([q, q])
    return float(max(_point_polyline_distance(p, q).max(), _point_polyline_distance(q, p).max()))


# ---------------------------------------------------------------------------
# initial data

def circular_arc(x: np.ndarray, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Height and slope of the circular arc through ``(a, 0)``, ``(b, 0)`` meeting the axis at 60 degrees."""
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    radius = 2.0 * half / SQRT3
    offset = half / SQRT3
    root = np.sqrt(np.maximum(radius**2 - (x - centre) ** 2, 0.0))
    u = root - offset
    with np.errstate(divide="ignore"):
        ux = (centre - x) / root
    return u, ux


def _bump(xi: np.ndarray) -> np.ndarray:
    # zero value and slope at both ends, asymmetric, max 1
    return xi**3 * (1.0 - xi) ** 2 / (0.6**3 * 0.4**2)


def build_initial_lens(kind: str, *, n: int = 256, a: float = -1.0, b: float = 1.0,
                       scale: float = 1.0, amplitude: float = 0.0, convex: bool = True,
                       time: float = 0.0) -> GridProfile:
    """Initial data with contact slopes ``+-sqrt(3)``.

    ``kind`` is ``"circular_arc"``, ``"perturbed"`` (circular arc plus an
    asymmetric bump of relative height ``amplitude``) or ``"scaled_selfsimilar"``
    (the self-similar lens scaled by ``scale``, centred at the origin).
    """
    if n < 16:
        raise DomainError("initial lens needs n >= 16")
    kind = kind.replace("-", "_")
    if kind == "scaled_selfsimilar":
        if scale <= 0:
            raise DomainError("scale must be positive")
        from .shooting import symmetric_lens_graph

        return symmetric_lens_graph(n, scale=scale, time=time)
    if not b > a:
        raise DomainError("need a < b")
    xi = np.linspace(0.0, 1.0, n + 1)
    x = a + (b - a) * xi
    x[0], x[-1] = a, b
    u, _ = circular_arc(x, a, b)
    symmetric = True
    if kind == "perturbed":
        u = u + amplitude * (b - a) * _bump(xi)
        symmetric = amplitude == 0.0
    elif kind != "circular_arc":
        raise DomainError(f"unknown initial lens kind {kind!r}")
    u[0] = u[-1] = 0.0
    if kind == "perturbed":
        slopes = np.diff(u) / np.diff(x)
        if np.max(np.abs(slopes)) > SQRT3 * (1 + 1e-12):
            raise DomainError("perturbation makes |u_x| exceed sqrt(3)")
        if convex and np.min(curvature_samples(x, u)[1:-1]) < 0.0:
            raise DomainError("perturbation destroys convexity")
        if np.any(u[1:-1] <= 0.0):
            raise DomainError("perturbation makes u non-positive")
    return GridProfile(x, u, time=time, symmetric=symmetric)


# ---------------------------------------------------------------------------
# networks

def network_from_profile(profile: GridProfile) -> NetworkSnapshot:
    """Lens network of a graph profile: arc, its mirror image and the two axis rays."""
    upper = profile.points()
    lower = upper * np.array([1.0, -1.0])
    left = (profile.a, 0.0)
    right = (profile.b, 0.0)
    sl, _ = contact_derivatives(profile.x, profile.u, "left", points=6)
    sr, _ = contact_derivatives(profile.x, profile.u, "right", points=6)
    tl = np.array([1.0, sl]) / math.hypot(1.0, sl)
    tr = np.array([-1.0, -sr]) / math.hypot(1.0, sr)
    junctions = (
        Junction(left, ((-1.0, 0.0), (tl[0], tl[1]), (tl[0], -tl[1]))),
        Junction(right, ((1.0, 0.0), (tr[0], tr[1]), (tr[0], -tr[1]))),
    )
    rays = (Ray(left, (-1.0, 0.0)), Ray(right, (1.0, 0.0)))
    return NetworkSnapshot(upper, lower, rays, junctions, symmetric=profile.symmetric,
                           time=profile.time, kind="lens")


def diagnostics(profile: GridProfile, with_ratio: bool = True) -> Diagnostics:
    kappa = curvature(profile)
    ratio = distance_ratio_min(profile)[0] if with_ratio else float("nan")
    slopes = segment_slopes(profile)
    return Diagnostics(
        time=profile.time,
        area=enclosed_area(profile),
        length=network_length(profile),
        kappa_min=float(kappa.min()),
        kappa_max=float(kappa.max()),
        ratio_min=ratio,
        a=profile.a,
        b=profile.b,
        max_slope=float(np.max(np.abs(slopes))),
    )
