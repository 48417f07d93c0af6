"""Wasserstein-based entropy-continuity bounds and interference-channel corners."""

from .core import (
    Channel,
    CouplingPlan,
    GaussianMixture1D,
    InvariantError,
    LogBase,
    Pmf,
    RegionCurve,
    TwoInputChannel,
)

__all__ = [
    "Channel",
    "CouplingPlan",
    "GaussianMixture1D",
    "InvariantError",
    "LogBase",
    "Pmf",
    "RegionCurve",
    "TwoInputChannel",
]

__version__ = "0.1.0"
