from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import midpoint_turning
from lensflow import energy as en
from lensflow.errors import DomainError
from lensflow.shooting import find_symmetric_lens


def test_eta0_bracket_and_minimiser():
    lo, hi = en.eta0()
    assert 1.3365 < lo <= hi < 1.33652
    e0 = en.eta0_value()
    c0 = en.coefficient_C(e0)
    assert en.coefficient_C(e0 - 1e-3) > c0 and en.coefficient_C(e0 + 1e-3) > c0


@pytest.mark.parametrize("eta", [1.05, 1.2, en.ETA0_UPPER, 1.5, 1.9])
def test_psi_against_midpoint_oracle(eta):
    assert en.psi(eta) == pytest.approx(midpoint_turning(en.coefficient_C(eta), eta), abs=1e-7)


@pytest.mark.parametrize("rho", [1.01, 1.5, 3.0, 20.0])
def test_theta_against_midpoint_oracle(rho):
    coeff = (rho * rho - 1) / math.log(rho)
    assert en.theta(rho) == pytest.approx(midpoint_turning(coeff, rho), abs=1e-7)


@pytest.mark.parametrize("rho", [1.0001, 1.5, 10.0, 1e3, 1e12])
def test_theta_log_agrees_with_theta(rho):
    assert en.theta_log(math.log(rho)) == pytest.approx(en.theta(rho), abs=1e-12)


def test_theta_limits():
    assert en.theta(1 + 1e-6) == pytest.approx(math.pi / math.sqrt(2), abs=1e-5)
    big = en.theta_log(2000.0)
    assert math.pi / 2 < big < math.pi / 2 + 1e-3


def test_psi_derivative_matches_difference():
    h = 1e-5
    for eta in (1.2, 1.6):
        fd = (en.psi(eta + h) - en.psi(eta - h)) / (2 * h)
        assert en.psi_derivative(eta) == pytest.approx(fd, rel=1e-6)


def test_riemann_bounds_sandwich_psi():
    for eta in (1.2, en.ETA0_UPPER, 1.8):
        lo = en.psi_lower_bound_riemann(eta, 3)
        hi = en.psi_upper_bound_riemann(eta, 3)
        assert lo <= en.psi(eta) <= hi
    assert en.psi_upper_bound_riemann(1.33652, 3) <= 0.785


def test_psi_eta0_window():
    p = en.psi(en.eta0_value())
    assert 0.72 < p <= 0.785


def test_eta_star_matches_shooting():
    H, _ = find_symmetric_lens()
    assert en.eta_from_h(H)["tilde"] == pytest.approx(en.eta_star(), abs=1e-6)
    assert en.psi(en.eta_star()) == pytest.approx(math.pi / 3, abs=1e-12)


@given(st.floats(1.34, 1.9))
def test_eta_bar_shares_the_level(eta):
    eb = en.eta_bar(eta)
    assert 1.0 < eb <= en.eta0_value() + 1e-12
    assert en.coefficient_C(eb) == pytest.approx(en.coefficient_C(eta), rel=1e-10)
    assert en.eta_eta_bar_relation(eta) == pytest.approx(0.0, abs=1e-9)


@given(st.floats(0.3, 0.64))
def test_eta_from_h_roots(h):
    roots = en.eta_from_h(h)
    for e in roots.values():
        assert en.coefficient_C(e) == pytest.approx(2 / (h * h), rel=1e-10)
    if roots:
        assert roots["bar"] <= roots["tilde"]


def test_eta_from_h_misses_lines_above_turning_point():
    assert en.eta_from_h(0.9) == {}


@given(st.floats(1.01, 50.0))
def test_energy_level_round_trip(rho):
    sm = en.s_minus_from_rho(rho)
    assert en.rho_from_s_minus(sm) == pytest.approx(rho, rel=1e-9)
    lvl = en.energy_level_from_s_minus(sm)
    assert lvl.rho == pytest.approx(rho, rel=1e-9)
    if lvl.reaches_sixty_degree_lines():
        assert lvl.eta_bar <= lvl.eta


def test_sigma_below_two_thirds_pi():
    grid = en.sample_grid(en.eta0_value(), en.ETA_CAP, 50)
    assert max(en.sigma(float(e)) for e in grid) < 2 * math.pi / 3


def test_domain_errors():
    for f in (en.psi, en.coefficient_C, en.A_of_eta):
        with pytest.raises(DomainError):
            f(1.0)
    with pytest.raises(DomainError):
        en.theta(0.5)
    with pytest.raises(DomainError):
        en.theta_log(0.0)
    with pytest.raises(DomainError):
        en.energy_level(0.5)
