from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lensflow import blowup as bu
from lensflow.errors import DomainError
from lensflow.geometry import Ray, network_from_profile
from lensflow.shooting import symmetric_lens_graph


@pytest.fixture(scope="module")
def shrinker():
    return bu.limit_network()


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.01, 4.0))
def test_straight_line_density_is_one(px, py, s):
    rays = [Ray((0.3, -0.1), (1.0, 2.0)), Ray((0.3, -0.1), (-1.0, -2.0))]
    val, _ = bu.gaussian_density_parts([], rays, (px, py), s)
    line_dist = abs(2.0 * (px - 0.3) - (py + 0.1)) / math.sqrt(5.0)
    assert val == pytest.approx(math.exp(-line_dist**2 / (4 * s)), rel=1e-12)


def test_polyline_segment_of_a_line():
    x = np.linspace(-30.0, 30.0, 60001)
    arc = np.column_stack([x, np.zeros_like(x)])
    val, _ = bu.gaussian_density_parts([arc], [], (0.0, 0.0), 1.0)
    assert val == pytest.approx(1.0, abs=1e-8)


@given(t=st.floats(-3.0, -0.01))
def test_shrinker_density_is_constant(shrinker, t):
    ref = bu.gaussian_density(shrinker, (0.0, 0.0), 0.0, -0.5)
    moved = shrinker.transformed((0.0, 0.0), math.sqrt(-2.0 * t))
    assert bu.gaussian_density(moved, (0.0, 0.0), 0.0, t) == pytest.approx(ref, rel=1e-9)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-1, 1))
def test_transform_composition(s1, s2, c):
    net = network_from_profile(symmetric_lens_graph(32))
    one = net.transformed((c, 0.0), s1).transformed((0.0, 0.0), s2)
    two = net.transformed((c, 0.0), s1 * s2)
    assert np.allclose(one.upper_arc, two.upper_arc, rtol=1e-12, atol=1e-12)
    assert np.allclose(one.rays[0].base, two.rays[0].base, rtol=1e-12, atol=1e-12)


def test_density_gap_vanishes_on_shrinker():
    prof = symmetric_lens_graph(512)
    gap = bu.density_gap_rms(prof, 1.0, (0.0, 0.0), -0.5)
    assert gap < 1e-3


def test_profile_interpolation(small_arc_run):
    t = small_arc_run.times()
    mid = 0.5 * (t[3] + t[4])
    p = bu.profile_at(small_arc_run, mid)
    q0, q1 = small_arc_run.snapshots[3], small_arc_run.snapshots[4]
    assert p.a == pytest.approx(0.5 * (q0.a + q1.a))
    assert bu.profile_at(small_arc_run, t[3]) is q0
    with pytest.raises(DomainError):
        bu.profile_at(small_arc_run, t[-1] + 1.0)


def test_rescale_meta_and_centre(small_arc_run):
    est = small_arc_run.extinction_estimate
    assert abs(est.x0[0]) < 1e-12 and est.x0[1] == 0.0
    snap = bu.rescale(small_arc_run, 2.0)
    assert snap.meta["t"] == pytest.approx(est.T - 0.125)
    with pytest.raises(DomainError):
        bu.rescale(small_arc_run, 2.0, tau=0.1)


def test_convergence_report_validation(small_arc_run):
    with pytest.raises(DomainError):
        bu.convergence_report(small_arc_run, [4.0, 2.0])
    with pytest.raises(DomainError):
        bu.convergence_report(small_arc_run, [0.5, 2.0])


def test_blowup_of_circular_arc(arc_run, shrinker):
    seq = bu.convergence_report(arc_run, [2, 4, 8, 16], limit=shrinker)
    assert seq.hausdorff_decreasing()
    assert seq.gap_decreasing()
    assert seq.hausdorff_to_limit[-1] < 1e-3
    assert [r[0] for r in seq.rows()] == [0, 1, 2, 3]


def test_density_monotone_along_run(arc_run, shrinker):
    dens = bu.density_series(arc_run)
    assert np.max(np.diff(dens)) <= 1e-4
    limit = bu.gaussian_density(shrinker, (0.0, 0.0), 0.0, -0.5)
    assert dens[-1] == pytest.approx(limit, abs=2e-3)
