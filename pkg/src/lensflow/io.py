"""Atomic file output and JSON/CSV serialisation of runs."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .flow import ExtinctionEstimate, FlowTrajectory
from .geometry import Diagnostics, GridProfile, diagnostics


def _clean(obj: Any) -> Any:
    # JSON has no NaN/inf; numpy scalars become Python floats (shortest repr)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=1, allow_nan=False) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_json(path, obj: Any) -> Path:
    return atomic_write(path, dumps(obj))


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def diagnostics_csv(diags: Sequence[Diagnostics]) -> str:
    return csv_text(Diagnostics.CSV_HEADER, (d.csv_row() for d in diags))


def read_json(path) -> Any:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def trajectory_from_dict(data: dict) -> FlowTrajectory:
    snaps = [GridProfile.from_dict(s) for s in data["snapshots"]]
    diags = [diagnostics(s, with_ratio=False) for s in snaps]
    traj = FlowTrajectory(snaps, diags, stop_reason=data.get("stop_reason", ""), steps=data.get("steps", 0))
    est = data.get("extinction_estimate")
    if est:
        traj.extinction_estimate = ExtinctionEstimate(
            T=est["T"], x0=tuple(est["x0"]), area_slope=est["area_slope"],
            area_residual=est["area_residual"], midpoint_residual=est["midpoint_residual"])
    return traj
