from __future__ import annotations

import dataclasses
import json
import math
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lensflow.classify import construct_self_similar_network, find_fish
from lensflow.errors import DomainError
from lensflow.geometry import GridProfile, build_initial_lens, network_from_profile
from lensflow.io import atomic_write, csv_text, dumps, read_json, trajectory_from_dict, write_json
from lensflow.svg import emit_svg


@given(st.lists(st.floats(1e-300, 1e3, allow_subnormal=False), min_size=3, max_size=20),
       st.floats(-1e3, 1e3))
def test_profile_json_round_trip_is_lossless(heights, shift):
    n = len(heights) + 1
    x = np.linspace(0.0, 1.0, n + 1) * 7.3 + shift
    u = np.r_[0.0, heights, 0.0]
    prof = GridProfile(x, u, time=0.1 + shift)
    back = GridProfile.from_dict(json.loads(dumps(prof.to_dict())))
    assert np.array_equal(back.x, prof.x) and np.array_equal(back.u, prof.u)
    assert back.time == prof.time


def test_nan_becomes_null():
    assert json.loads(dumps({"a": float("nan"), "b": np.float64(1.5)})) == {"a": None, "b": 1.5}


def test_csv_keeps_full_precision():
    text = csv_text(("a", "b"), [(0.1 + 0.2, 3)])
    assert text.splitlines()[1] == "0.30000000000000004,3"


def test_atomic_write_and_errors(tmp_path):
    target = tmp_path / "sub" / "x.json"
    write_json(target, {"k": 1})
    assert read_json(target) == {"k": 1}
    assert [p.name for p in target.parent.iterdir()] == ["x.json"]
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        atomic_write(blocker / "y.txt", "data")
    with pytest.raises(OSError, match="missing"):
        read_json(tmp_path / "missing.json")


def test_trajectory_round_trip(small_arc_run):
    back = trajectory_from_dict(json.loads(dumps(small_arc_run.to_dict())))
    assert len(back.snapshots) == len(small_arc_run.snapshots)
    assert np.array_equal(back.snapshots[-1].u, small_arc_run.snapshots[-1].u)
    assert back.extinction_estimate == small_arc_run.extinction_estimate


def test_lens_svg_structure_and_determinism():
    net = network_from_profile(build_initial_lens("circular_arc", n=32))
    doc = emit_svg(net)
    assert doc == emit_svg(net)
    assert doc.count("<path") == 4
    m = re.search(r'viewBox="([^"]+)"', doc)
    x0, y0, w, h = map(float, m.group(1).split())
    assert w > 0 and h > 0


def test_fish_svg_has_loop_and_two_rays():
    net = construct_self_similar_network("fish", {"r_min": find_fish().r_min})
    doc = emit_svg(net)
    assert doc.count("<path") == 3
    # closed loop: first and last vertex coincide up to printing precision
    loop = re.findall(r'd="([^"]+)"', doc)[0].split(" L")
    assert loop[0][1:] == loop[-1]


def test_lens_shrinker_svg():
    doc = emit_svg(construct_self_similar_network("lens"))
    assert doc.startswith("<?xml") and doc.rstrip().endswith("</svg>")


def test_svg_rejects_bad_geometry():
    net = network_from_profile(build_initial_lens("circular_arc", n=32))
    arc = np.array(net.upper_arc)
    arc[3, 1] = math.nan
    bad = dataclasses.replace(net, upper_arc=arc)
    with pytest.raises(DomainError):
        emit_svg(bad)
