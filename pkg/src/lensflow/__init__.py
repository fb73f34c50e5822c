"""Lens-shaped networks under curve shortening flow.

Subpackages: ``geometry`` (grid profiles and networks), ``flow`` (moving-boundary
solver), ``shooting`` (self-similar lens), ``energy`` (turning integrals),
``classify`` (shrinker classification and certificate), ``blowup`` (rescaling and
Gaussian density) and ``cli``.
"""

from __future__ import annotations

from .errors import LensflowError
from .flow import FlowConfig, FlowTrajectory, evolve
from .geometry import GridProfile, NetworkSnapshot, build_initial_lens

__version__ = "0.1.0"

__all__ = [
    "FlowConfig",
    "FlowTrajectory",
    "GridProfile",
    "LensflowError",
    "NetworkSnapshot",
    "build_initial_lens",
    "evolve",
]
