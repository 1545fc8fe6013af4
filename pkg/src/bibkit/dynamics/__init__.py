"""Newton-map dynamics, fractal boundary metrics and coarse-graining partitions."""

from .fractal import (
    BoundaryMask,
    DimensionEstimate,
    MeasureReport,
    box_counting_dimension,
    extract_boundary,
    measure_report,
)
from .newton import (
    UNRESOLVED,
    ComplexGrid,
    Orbit,
    OrbitStatus,
    PolynomialMap,
    iterate_orbit,
    label_grid,
    label_points,
    lyapunov_time,
    newton_step,
    refine_boundary_point,
)
from .partition import (
    Partition,
    PointClass,
    SwitchKernel,
    build_partition,
    build_partitions,
    classify_point,
    switch_kernel,
)

__all__ = [
    "UNRESOLVED",
    "PolynomialMap",
    "Orbit",
    "OrbitStatus",
    "ComplexGrid",
    "newton_step",
    "iterate_orbit",
    "label_points",
    "label_grid",
    "lyapunov_time",
    "refine_boundary_point",
    "BoundaryMask",
    "DimensionEstimate",
    "MeasureReport",
    "extract_boundary",
    "box_counting_dimension",
    "measure_report",
    "Partition",
    "PointClass",
    "SwitchKernel",
    "build_partition",
    "build_partitions",
    "classify_point",
    "switch_kernel",
]
