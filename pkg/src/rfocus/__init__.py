"""Simulation and optimization toolkit for programmable binary reflecting surfaces."""

__version__ = "0.1.0"

from rfocus.channel import (
    Environment,
    SurfaceConfig,
    evaluate_channel,
    rssi_ratio_exact,
    capacity_improvement,
    ideal_upper_bound,
)

__all__ = [
    "Environment",
    "SurfaceConfig",
    "evaluate_channel",
    "rssi_ratio_exact",
    "capacity_improvement",
    "ideal_upper_bound",
    "__version__",
]
