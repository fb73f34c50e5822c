"""Plain SVG rendering of network snapshots (no plotting dependency)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import NetworkSnapshot


@dataclass(frozen=True)
class SvgStyle:
    width: int = 640
    stroke: str = "#1f3b73"
    ray_stroke: str = "#7a7a7a"
    stroke_width: float = 2.0
    ray_factor: float = 0.6  # drawn ray length relative to the arc bounding-box diagonal
    margin: float = 0.10


def _fmt(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _path(points: np.ndarray) -> str:
    # SVG y axis points down
    cmds = [f"{'M' if i == 0 else 'L'}{_fmt(x)} {_fmt(-y)}" for i, (x, y) in enumerate(points)]
    return " ".join(cmds)


def emit_svg(snapshot: NetworkSnapshot, style: SvgStyle | None = None) -> str:
    """Deterministic SVG: arcs first (one path each, or one loop path for a fish), then the rays."""
    style = style or SvgStyle()
    arcs = [snapshot.upper_arc, snapshot.lower_arc]
    pts = np.vstack(arcs)
    if pts.size == 0 or not np.all(np.isfinite(pts)):
        raise DomainError("cannot draw an empty or non-finite snapshot")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diag = float(np.hypot(*(hi - lo))) or 1.0
    rays = [r.segment(style.ray_factor * diag) for r in snapshot.rays]
    allpts = np.vstack([pts, *rays])
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    lo = lo - style.margin * span
    span = span * (1.0 + 2.0 * style.margin)
    height = max(1, int(round(style.width * span[1] / span[0])))
    # viewBox in flipped coordinates: top edge is -max(y)
    view = f"{_fmt(lo[0])} {_fmt(-(lo[1] + span[1]))} {_fmt(span[0])} {_fmt(span[1])}"
    sw = _fmt(style.stroke_width * span[0] / style.width)
    if snapshot.kind == "fish":
        curves = [snapshot.loop()]
    else:
        curves = arcs
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" height="{height}" viewBox="{view}">',
        f'<title>{snapshot.kind} network, t={_fmt(snapshot.time)}</title>',
    ]
    for c in curves:
        lines.append(f'<path d="{_path(c)}" fill="none" stroke="{style.stroke}" stroke-width="{sw}"/>')
    for seg in rays:
        lines.append(f'<path d="{_path(seg)}" fill="none" stroke="{style.ray_stroke}" stroke-width="{sw}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
