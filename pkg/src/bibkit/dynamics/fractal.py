"""
Boundary extraction, box-counting dimension and area measures on labeled grids.

The boundary of a labeled :class:`~bibkit.dynamics.newton.ComplexGrid` is the
set of cells that differ from one of their 4-neighbours; Unresolved cells
differ from everything. Its box-counting dimension is the least-squares slope
of ``log(count)`` against ``log(1/box_size)``, with partial boxes at the window
edges counted as boxes.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import linregress

from bibkit.core.exceptions import (
    DegenerateGridError,
    EmptyMaskError,
    ShapeMismatchError,
    ValidationError,
)
from bibkit.core.models import DimensionRecord
from .newton import UNRESOLVED, ComplexGrid

if TYPE_CHECKING:
    from .partition import Partition

logger = logging.getLogger(__name__)

MIN_BOX_SIZES = 4


@dataclass(frozen=True, eq=False)
class BoundaryMask:
    """Boolean ``(nx, ny)`` array of boundary cells."""

    nx: int
    ny: int
    cells: np.ndarray

    def __post_init__(self) -> None:
        if self.cells.shape != (self.nx, self.ny):
            raise ShapeMismatchError(
                "mask cells do not match the declared resolution",
                expected=(self.nx, self.ny),
                actual=self.cells.shape,
            )

    @property
    def count(self) -> int:
        return int(self.cells.sum())

    @property
    def fraction(self) -> float:
        return float(self.cells.mean())

    @classmethod
    def empty(cls, nx: int, ny: int) -> "BoundaryMask":
        return cls(nx, ny, np.zeros((nx, ny), dtype=bool))


@dataclass(frozen=True)
class DimensionEstimate:
    """
    Result of a box-counting fit.

    Attributes:
        box_sizes: Box side lengths in cells
        counts: Occupied boxes per size
        slope: Estimated dimension
        intercept: Fit intercept
        r2: Coefficient of determination of the fit
    """

    box_sizes: tuple
    counts: tuple
    slope: float
    intercept: float
    r2: float

    def to_record(self) -> DimensionRecord:
        return DimensionRecord(
            slope=self.slope,
            intercept=self.intercept,
            r2=self.r2,
            box_sizes=list(self.box_sizes),
            counts=list(self.counts),
        )


@dataclass(frozen=True)
class MeasureReport:
    """
    Empirical area fractions of a grid, optionally inside a region.

    Attributes:
        basin_fractions: Fraction of cells per basin index
        unresolved_fraction: Fraction of Unresolved cells
        boundary_fraction: Fraction of boundary cells (0 without a mask)
        uncertain_fraction: Fraction of the partition's uncertain shell, if given
        cells: Number of cells counted
    """

    basin_fractions: Dict[int, float]
    unresolved_fraction: float
    boundary_fraction: float
    uncertain_fraction: Optional[float]
    cells: int


def extract_boundary(grid: ComplexGrid) -> BoundaryMask:
    """Mark cells that differ from a 4-neighbour; raises ``DegenerateGridError``."""
    labels = grid.labels
    distinct = np.unique(labels)
    if distinct.size < 2:
        raise DegenerateGridError(
            "grid carries a single label; there is no boundary",
            labels=[int(k) for k in distinct],
        )

    unresolved = labels == UNRESOLVED
    cells = np.zeros(labels.shape, dtype=bool)

    differs = (labels[1:, :] != labels[:-1, :]) | unresolved[1:, :] | unresolved[:-1, :]
    cells[1:, :] |= differs
    cells[:-1, :] |= differs

    differs = (labels[:, 1:] != labels[:, :-1]) | unresolved[:, 1:] | unresolved[:, :-1]
    cells[:, 1:] |= differs
    cells[:, :-1] |= differs

    mask = BoundaryMask(grid.nx, grid.ny, cells)
    logger.info(
        "boundary of %dx%d grid covers %.4f of the window", grid.nx, grid.ny, mask.fraction
    )
    return mask


def default_box_sizes(n: int) -> List[int]:
    """Powers of two from 2 to ``n/8``, extended downwards to 1 and up to ``n/2`` if short."""
    sizes = [s for s in (2 ** k for k in range(1, 32)) if s <= n // 8]
    if len(sizes) < MIN_BOX_SIZES:
        sizes = [s for s in (2 ** k for k in range(0, 32)) if s <= max(n // 2, 1)]
    return sizes


def count_boxes(cells: np.ndarray, size: int) -> int:
    """Number of ``size``-by-``size`` boxes holding at least one marked cell."""
    nx, ny = cells.shape
    px, py = -nx % size, -ny % size
    padded = np.pad(cells, ((0, px), (0, py)), constant_values=False)
    boxes = padded.reshape(padded.shape[0] // size, size, padded.shape[1] // size, size)
    return int(boxes.any(axis=(1, 3)).sum())


def box_counting_dimension(
    mask: BoundaryMask,
    sizes: Optional[Sequence[int]] = None,
    r2_warning: float = 0.98,
    slope_min: float = 0.9,
    slope_max: float = 2.0,
    workers: int = 1,
) -> DimensionEstimate:
    """
    Box-counting dimension of a boundary mask.

    Args:
        mask: Boundary cells
        sizes: Box sizes in cells; defaults to :func:`default_box_sizes`
        r2_warning: Fits below this r^2 are logged as warnings
        slope_min, slope_max: Sanity envelope; slopes outside are logged
        workers: Threads used to count the box sizes

    Raises:
        EmptyMaskError: No cell is marked
        ValidationError: Fewer than four usable sizes
    """
    if not mask.cells.any():
        raise EmptyMaskError("box counting needs at least one marked cell")

    if sizes is None:
        sizes = default_box_sizes(min(mask.nx, mask.ny))
    sizes = sorted({int(s) for s in sizes})
    if len(sizes) < MIN_BOX_SIZES or sizes[0] < 1:
        raise ValidationError(
            f"need at least {MIN_BOX_SIZES} distinct positive box sizes",
            field="sizes",
            value=sizes,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda s: count_boxes(mask.cells, s), sizes))
    else:
        counts = [count_boxes(mask.cells, s) for s in sizes]

    fit = linregress(np.log(1.0 / np.asarray(sizes, dtype=float)), np.log(counts))
    estimate = DimensionEstimate(
        box_sizes=tuple(sizes),
        counts=tuple(counts),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r2=float(fit.rvalue ** 2),
    )

    if estimate.r2 < r2_warning:
        logger.warning("box-counting fit has r^2 = %.4f < %.2f", estimate.r2, r2_warning)
    if not slope_min <= estimate.slope <= slope_max:
        logger.warning(
            "box-counting slope %.4f outside [%.2f, %.2f]",
            estimate.slope,
            slope_min,
            slope_max,
        )
    logger.info("box-counting slope %.4f (r^2 %.4f)", estimate.slope, estimate.r2)
    return estimate


def measure_report(
    grid: ComplexGrid,
    mask: Optional[BoundaryMask] = None,
    partition: Optional["Partition"] = None,
    region: Optional[np.ndarray] = None,
) -> MeasureReport:
    """Count area fractions of basins, boundary and uncertain shell.

    ``region`` restricts counting to a boolean sub-window, such as the
    rotation-symmetric disk returned by :meth:`ComplexGrid.disk`.
    """
    shape = (grid.nx, grid.ny)
    for name, array in (
        ("mask", None if mask is None else mask.cells),
        ("partition", None if partition is None else partition.uncertain),
        ("region", region),
    ):
        if array is not None and array.shape != shape:
            raise ShapeMismatchError(
                f"{name} shape {array.shape} does not match grid {shape}",
                expected=shape,
                actual=array.shape,
            )

    inside = np.ones(shape, dtype=bool) if region is None else region.astype(bool)
    total = int(inside.sum())
    if total == 0:
        raise ValidationError("region selects no cells", field="region")

    labels = grid.labels[inside]
    basin_fractions = {
        k: float(np.count_nonzero(labels == k)) / total for k in range(grid.poly.degree)
    }
    unresolved = float(np.count_nonzero(labels == UNRESOLVED)) / total
    boundary = 0.0 if mask is None else float(mask.cells[inside].sum()) / total
    uncertain = (
        None if partition is None else float(partition.uncertain[inside].sum()) / total
    )
    return MeasureReport(
        basin_fractions=basin_fractions,
        unresolved_fraction=unresolved,
        boundary_fraction=boundary,
        uncertain_fraction=uncertain,
        cells=total,
    )
