from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lensflow import classify as cl
from lensflow import energy as en
from lensflow.errors import DomainError
from lensflow.shooting import find_symmetric_lens


@pytest.fixture(scope="module")
def fish():
    return cl.find_fish()


def test_certificate_passes_with_margins():
    rep = cl.certify_lens_uniqueness()
    assert rep.passed
    assert {c.name for c in rep.checks} == {
        "energy_window", "barrier_exclusion", "quadrilateral", "psi_unique", "sigma_bound", "large_eta"}
    assert rep["energy_window"].margin > 0
    assert rep["psi_unique"].details["sign_changes"] == 1
    assert "overall: PASS" in rep.text()


def test_certificate_detects_sabotage():
    rep = cl.certify_lens_uniqueness(sqrt3=1.7)
    assert not rep.passed
    assert not rep["energy_window"].passed


def test_asymmetric_fish_check():
    chk = cl.certify_asymmetric_fish_nonexistence()
    assert chk.passed and chk.margin > 0.15


def test_quadrilateral_area_domain():
    with pytest.raises(DomainError):
        cl.quadrilateral_area(0.5)
    A, dA = cl.quadrilateral_area(1.2)
    h = 1e-4
    fd = (cl.quadrilateral_area(1.2 + h)[0] - cl.quadrilateral_area(1.2 - h)[0]) / (2 * h)
    assert dA == pytest.approx(fd, rel=1e-6)


def test_lens_reconstruction_matches_shooting():
    net = cl.construct_self_similar_network("lens")
    assert net.meta["turning"] == pytest.approx(2 * math.pi / 3, abs=1e-9)
    assert net.max_junction_defect() < 1e-9
    assert net.is_mirror_symmetric()
    assert np.allclose(net.upper_arc[:, 0], -net.upper_arc[::-1, 0], atol=1e-12)
    assert net.meta["energy_spread"] < 1e-9
    assert cl.lens_matches_shooting() < 1e-6
    assert 2 * en.psi(en.eta_star()) == pytest.approx(net.meta["turning"], abs=1e-5)


def test_lens_arc_lies_on_shot_apex():
    H, prof = find_symmetric_lens()
    arc = cl.lens_arc(H)
    assert arc.end[0] == pytest.approx(prof.contact_x, abs=1e-7)
    assert (arc.minima, arc.maxima) == (0, 0)


def test_unit_circle_is_an_arc_solution():
    z = cl._integrate((1.0, 0.0, 0.5 * math.pi), 2.0,
                      cl._event(lambda z: z[0], True, -1))
    r = np.hypot(z.points[:, 0], z.points[:, 1])
    assert np.max(np.abs(r - 1.0)) < 1e-10


def test_fish_solution(fish):
    assert abs(fish.K - cl.FOUR_PI_3) < 1e-9
    assert fish.closure_residual < 1e-6
    for j in fish.geometry.junctions:
        assert all(abs(a - 2 * math.pi / 3) < 1e-6 for a in j.angles())
    assert fish.short_extrema == (1, 0)
    assert fish.long_extrema == (2, 1)
    assert fish.turning == pytest.approx(cl.FOUR_PI_3, abs=1e-9)
    assert fish.energy_spread < 1e-9
    assert not fish.geometry.symmetric


def test_fish_to_dict(fish):
    d = fish.to_dict()
    assert d["r_min"] == fish.r_min and d["geometry"]["kind"] == "fish"


def test_loop_curvature_limits():
    assert cl.fish_total_curvature_log(-2000.0) == pytest.approx(math.pi, abs=1e-3)
    r_star = cl.branch_turning_point()
    assert r_star == pytest.approx(0.64797, abs=1e-5)
    k_bar = cl.fish_total_curvature(r_star * (1 - 1e-9), "bar")
    k_tilde = cl.fish_total_curvature(r_star * (1 - 1e-9), "tilde")
    assert k_bar == pytest.approx(k_tilde, abs=1e-3)


@given(st.floats(1e-3, 0.6))
def test_loop_curvature_matches_direct_theta(r):
    rho = en.rho_from_s_minus(r)
    direct = 2 * en.theta(rho) + 4 * en.psi(en.eta_from_h(r)["bar"])
    assert cl.fish_total_curvature(r) == pytest.approx(direct, abs=1e-9)


def test_small_r_asymptotics():
    # the psi term vanishes and the log form keeps theta accurate
    r = 1e-9
    assert cl.fish_total_curvature(r) == pytest.approx(
        2 * en.theta_log(math.log(en.rho_from_s_minus(r))), abs=1e-15)


def test_construct_fish_and_errors(fish):
    net = cl.construct_self_similar_network("fish", {"r_min": fish.r_min})
    assert net.kind == "fish"
    with pytest.raises(DomainError):
        cl.construct_self_similar_network("triangle")
    with pytest.raises(DomainError):
        cl.fish_total_curvature(1.5)
