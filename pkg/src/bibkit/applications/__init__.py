"""The closed B/IB loop and the two simulators built on it."""

from .loop import (
    BIBState,
    data_stream,
    initial_state,
    partition_theta,
    resolve_theta,
    run_from_config,
    run_inference,
    step,
)
from .perception import cyclic_average, noisy_kernel, perception_kernel, run_perception
from .statistics import (
    DiffusionStats,
    DwellStats,
    PowerLawFit,
    diffusion_statistics,
    dwell_statistics,
    fit_power_law,
    mean_squared_displacement,
    run_lengths,
)
from .trajectory import PRECEDENCE, EventTag, TrajectoryLog, dominant_event
from .walker import run_control_walk, run_walker, straight_runs, walk_statistics

__all__ = [
    "BIBState",
    "initial_state",
    "step",
    "run_inference",
    "run_from_config",
    "data_stream",
    "partition_theta",
    "resolve_theta",
    "EventTag",
    "PRECEDENCE",
    "TrajectoryLog",
    "dominant_event",
    "run_perception",
    "perception_kernel",
    "noisy_kernel",
    "cyclic_average",
    "DwellStats",
    "DiffusionStats",
    "PowerLawFit",
    "dwell_statistics",
    "diffusion_statistics",
    "fit_power_law",
    "mean_squared_displacement",
    "run_lengths",
    "run_walker",
    "run_control_walk",
    "straight_runs",
    "walk_statistics",
]
