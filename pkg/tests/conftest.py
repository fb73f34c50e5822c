from __future__ import annotations

import math
import time

import pytest
from hypothesis import HealthCheck, settings

from lensflow.flow import FlowConfig, evolve
from lensflow.geometry import build_initial_lens

settings.register_profile("lensflow", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lensflow")


@pytest.fixture(scope="session")
def arc_run():
    """Circular-arc lens on [-1, 1], n = 256, explicit scheme, run to extinction."""
    initial = build_initial_lens("circular_arc", n=256)
    start = time.perf_counter()
    traj = evolve(initial, FlowConfig(n=256, scheme="explicit", snapshot_stride=100, ratio_stride=5))
    traj.meta["elapsed"] = time.perf_counter() - start
    return traj


@pytest.fixture(scope="session")
def small_arc_run():
    initial = build_initial_lens("circular_arc", n=64)
    return evolve(initial, FlowConfig(n=64, snapshot_stride=20, ratio_stride=0))


def midpoint_turning(coeff: float, top: float, nodes: int = 20000) -> float:
    """``int_1^top dx / sqrt(1 - x^2 + coeff log x)`` by the midpoint rule in ``x = 1 + (top-1) sin^2 t``."""
    h = 0.5 * math.pi / nodes
    total = 0.0
    for k in range(nodes):
        t = (k + 0.5) * h
        s, c = math.sin(t), math.cos(t)
        x = 1.0 + (top - 1.0) * s * s
        d = 1.0 - x * x + coeff * math.log(x)
        total += 2.0 * (top - 1.0) * s * c / math.sqrt(d)
    return total * h


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
