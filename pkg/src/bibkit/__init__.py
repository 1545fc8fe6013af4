#!/usr/bin/env python3
"""
bibkit - Bayesian and inverse-Bayesian inference on top of fractal basin dynamics.

bibkit couples two things. The first is the Newton map of a complex polynomial,
whose basins of attraction share a fractal boundary. The second is a
finite-space inference loop that interlaces Bayesian updating (B) with
inverse-Bayesian likelihood re-estimation and hypothesis exploration (IB).
The boundary is coarse-grained into inner/outer partitions whose uncertain
shell yields a switch kernel and a relation threshold; the loop produces
multistable percepts and a Levy-like walker.

Key Features:
    Newton dynamics: vectorized basin labeling, orbits, finite-time Lyapunov exponents
    Fractal metrics: boundary extraction and box-counting dimension
    Rough partitions: R-/R+ masks, uncertain-shell threshold, Monte-Carlo switch kernel
    Bayes engine: validated distributions, likelihood tables, free energy
    Inverse Bayes: threshold relations, rough approximations, IB and exploration
    Applications: B/IB loop, perception simulator, walker with diffusion diagnostics

Quick Start:
    Label the z^3 - 1 basins and measure the boundary:
        >>> from bibkit import PolynomialMap, GridSpec, label_grid
        >>> from bibkit import extract_boundary, box_counting_dimension
        >>> grid = label_grid(PolynomialMap.cubic_unity(), GridSpec(nx=256, ny=256))
        >>> estimate = box_counting_dimension(extract_boundary(grid))

    Run the interlaced loop on the tri-stable model:
        >>> from bibkit import RunConfig, run_from_config
        >>> state, log = run_from_config(RunConfig(steps=1000, seed=3))

CLI Usage:
        $ bibkit basins --out basins.ppm
        $ bibkit dimension --in basins.ppm
        $ bibkit infer --config config/tri_stable.conf
        $ bibkit walk --config config/tri_stable.conf --machine

License: MIT License
Version: 0.1.0
"""

# Defined before the submodule imports; bibkit.dynamics.newton reads it.
__version__ = "0.1.0"
__license__ = "MIT"

from .applications import (
    BIBState,
    DiffusionStats,
    DwellStats,
    EventTag,
    TrajectoryLog,
    dwell_statistics,
    initial_state,
    run_control_walk,
    run_from_config,
    run_inference,
    run_perception,
    run_walker,
    step,
)
from .core.exceptions import (
    BIBError,
    ConfigurationError,
    DynamicsError,
    InferenceError,
    InsufficientDataError,
    ValidationError,
)
from .core.models import GridSpec, IBConfig, RunConfig, Settings
from .dynamics import (
    ComplexGrid,
    PolynomialMap,
    SwitchKernel,
    box_counting_dimension,
    build_partition,
    extract_boundary,
    iterate_orbit,
    label_grid,
    switch_kernel,
)
from .inference import (
    BinaryRelation,
    Distribution,
    LikelihoodTable,
    apply_B,
    apply_IB,
    build_relation,
    explore,
    rough_approximation,
)

__all__ = [
    # Dynamics
    "PolynomialMap",
    "ComplexGrid",
    "GridSpec",
    "iterate_orbit",
    "label_grid",
    "extract_boundary",
    "box_counting_dimension",
    "build_partition",
    "switch_kernel",
    "SwitchKernel",

    # Inference
    "Distribution",
    "LikelihoodTable",
    "BinaryRelation",
    "IBConfig",
    "apply_B",
    "apply_IB",
    "build_relation",
    "rough_approximation",
    "explore",

    # Applications
    "BIBState",
    "RunConfig",
    "Settings",
    "EventTag",
    "TrajectoryLog",
    "DwellStats",
    "DiffusionStats",
    "initial_state",
    "step",
    "run_inference",
    "run_from_config",
    "run_perception",
    "run_walker",
    "run_control_walk",
    "dwell_statistics",

    # Exceptions
    "BIBError",
    "ConfigurationError",
    "ValidationError",
    "DynamicsError",
    "InferenceError",
    "InsufficientDataError",

    # Metadata
    "__version__",
    "__license__",
]
