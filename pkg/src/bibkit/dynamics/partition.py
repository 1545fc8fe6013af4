"""
Coarse-graining partition around each basin and the switch kernel it induces.

For a basin ``k`` the outer region R+ is the basin dilated by ``r`` cells joined
with every boundary cell of the grid, and the inner region R- is the basin eroded by ``r`` cells with boundary cells
removed, so ``R- <= basin <= R+`` holds cell by cell. The shell ``R+ \\ R-``
is the uncertain region; its share of R+ is the threshold ``theta``.

The switch kernel estimates where points of each uncertain shell end up after
a perturbation of one cell diagonal: row ``k`` holds the destination
frequencies for points sampled from basin ``k``'s shell.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from bibkit.core.exceptions import (
    EmptyInnerError,
    EmptyShellError,
    InsufficientDataError,
    NormalizationError,
    ShapeMismatchError,
    ValidationError,
)
from .fractal import BoundaryMask
from .newton import ComplexGrid, label_points

logger = logging.getLogger(__name__)

# 4-connected structuring element
_CROSS = ndimage.generate_binary_structure(2, 1)


class PointClass(Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    UNCERTAIN = "uncertain"


@dataclass(frozen=True, eq=False)
class Partition:
    """
    R-/R+ partition of one basin.

    Attributes:
        basin_index: Basin the partition is built around
        inner: R-, cells that certainly end in the basin
        outer: R+, cells that may end in the basin
        uncertain: The shell ``outer & ~inner``
        theta: ``|uncertain| / |outer|``
        dilation_radius: Radius in cells
        grid: Grid the partition was built on
    """

    basin_index: int
    inner: np.ndarray
    outer: np.ndarray
    uncertain: np.ndarray
    theta: float
    dilation_radius: int
    grid: ComplexGrid


@dataclass(frozen=True, eq=False)
class SwitchKernel:
    """Row-stochastic ``K x K`` matrix of basin-to-basin switch probabilities."""

    matrix: np.ndarray
    samples_per_row: int = 0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeMismatchError(
                "switch kernel must be square", expected="(K, K)", actual=m.shape
            )
        if (m < 0).any() or not np.allclose(m.sum(axis=1), 1.0, rtol=0.0, atol=1e-12):
            raise NormalizationError(
                "switch kernel rows must be non-negative and sum to 1",
                total=float(np.abs(m.sum(axis=1) - 1.0).max()),
            )
        diagonal = np.diag(m)
        if (diagonal <= 0).any():
            raise ValidationError(
                "switch kernel diagonal entries must lie in (0, 1]",
                field="matrix",
                value=diagonal.tolist(),
            )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, size: int) -> "SwitchKernel":
        return cls(np.eye(size))

    @classmethod
    def uniform_stay(cls, size: int, p_stay: float) -> "SwitchKernel":
        """Stay with ``p_stay``, otherwise jump uniformly to another state."""
        off = (1.0 - p_stay) / (size - 1)
        m = np.full((size, size), off)
        np.fill_diagonal(m, p_stay)
        return cls(m)

    def to_list(self) -> List[List[float]]:
        return self.matrix.tolist()


def radius_in_cells(grid: ComplexGrid, physical_radius: float) -> int:
    """Convert a radius in plane units into a dilation radius in cells (at least 1)."""
    dx, dy = grid.cell_size
    return max(1, int(round(physical_radius / min(dx, dy))))


def build_partition(
    grid: ComplexGrid,
    mask: BoundaryMask,
    basin_index: int,
    dilation_radius: int = 2,
) -> Partition:
    """
    Build R-, R+ and the uncertain shell for one basin.

    Raises:
        ValidationError: Unknown basin or radius below 1
        ShapeMismatchError: Mask and grid disagree
        EmptyInnerError: Erosion removed the whole basin
        EmptyShellError: R+ equals R-
    """
    if not 0 <= basin_index < grid.poly.degree:
        raise ValidationError(
            f"basin index must be in [0, {grid.poly.degree})",
            field="basin_index",
            value=basin_index,
        )
    if dilation_radius < 1:
        raise ValidationError(
            "dilation radius must be >= 1", field="dilation_radius", value=dilation_radius
        )
    if mask.cells.shape != grid.labels.shape:
        raise ShapeMismatchError(
            "boundary mask does not match the grid",
            expected=grid.labels.shape,
            actual=mask.cells.shape,
        )

    basin = grid.labels == basin_index
    outer = ndimage.binary_dilation(basin, structure=_CROSS, iterations=dilation_radius)
    outer |= mask.cells
    # window edges are not basin edges
    inner = ndimage.binary_erosion(
        basin, structure=_CROSS, iterations=dilation_radius, border_value=1
    )
    inner &= ~mask.cells

    if not inner.any():
        raise EmptyInnerError(
            f"erosion by {dilation_radius} cells leaves basin {basin_index} empty",
            basin_index=basin_index,
            dilation_radius=dilation_radius,
        )
    uncertain = outer & ~inner
    if not uncertain.any():
        raise EmptyShellError(
            f"basin {basin_index} has no uncertain shell", basin_index=basin_index
        )

    theta = float(uncertain.sum()) / float(outer.sum())
    logger.info(
        "partition basin=%d radius=%d: |R-|=%d |R+|=%d theta=%.6f",
        basin_index,
        dilation_radius,
        int(inner.sum()),
        int(outer.sum()),
        theta,
    )
    return Partition(
        basin_index=basin_index,
        inner=inner,
        outer=outer,
        uncertain=uncertain,
        theta=theta,
        dilation_radius=dilation_radius,
        grid=grid,
    )


def build_partitions(
    grid: ComplexGrid, mask: BoundaryMask, dilation_radius: int = 2
) -> Dict[int, Partition]:
    """One partition per basin present on the grid; each carries its own theta."""
    return {
        k: build_partition(grid, mask, k, dilation_radius) for k in grid.basin_indices()
    }


def classify_point(partition: Partition, z: complex) -> PointClass:
    i, j = partition.grid.locate(z)
    if partition.inner[i, j]:
        return PointClass.INSIDE
    if not partition.outer[i, j]:
        return PointClass.OUTSIDE
    return PointClass.UNCERTAIN


def _tally_chunk(
    grid: ComplexGrid,
    cells: np.ndarray,
    size: int,
    seed_seq: np.random.SeedSequence,
) -> Tuple[np.ndarray, int]:
    rng = np.random.default_rng(seed_seq)
    dx, dy = grid.cell_size
    picks = cells[rng.integers(len(cells), size=size)]
    offsets = rng.random((size, 2))
    angles = rng.uniform(0.0, 2.0 * math.pi, size=size)
    points = (
        grid.origin
        + (picks[:, 0] + offsets[:, 0]) * dx
        + 1j * (picks[:, 1] + offsets[:, 1]) * dy
        + grid.cell_diagonal * np.exp(1j * angles)
    )
    labels, _ = label_points(grid.poly, points, grid.max_iters, grid.convergence_radius)
    resolved = labels[labels >= 0]
    return np.bincount(resolved, minlength=grid.poly.degree), int(size - resolved.size)


def switch_kernel(
    grid: ComplexGrid,
    partitions: Sequence[Partition],
    seed: int,
    samples_per_row: int = 10_000,
    region: Optional[np.ndarray] = None,
    workers: int = 1,
    chunk_size: int = 1024,
) -> SwitchKernel:
    """
    Monte-Carlo switch kernel from the uncertain shells.

    Samples are drawn in fixed-size chunks, each with its own child of
    ``SeedSequence([seed, basin])``; counts are summed, so the kernel does not
    depend on ``workers``. Samples whose orbit stays Unresolved are dropped.

    Raises:
        EmptyShellError: A shell (restricted to ``region``) has no cells
        InsufficientDataError: Every sample from a shell stayed Unresolved
        ValidationError: A basin present on the grid has no partition
    """
    size = grid.poly.degree
    present = grid.basin_indices()
    if len(present) < 2:
        return SwitchKernel(np.eye(size), samples_per_row, seed)

    by_basin = {p.basin_index: p for p in partitions}
    missing = [k for k in present if k not in by_basin]
    if missing:
        raise ValidationError(
            f"no partition for basins {missing}", field="partitions", value=missing
        )
    if region is not None and region.shape != grid.labels.shape:
        raise ShapeMismatchError(
            "region does not match the grid",
            expected=grid.labels.shape,
            actual=region.shape,
        )

    matrix = np.eye(size)
    n_chunks = -(-samples_per_row // chunk_size)
    chunk_sizes = [chunk_size] * (n_chunks - 1) + [samples_per_row - chunk_size * (n_chunks - 1)]

    for k in present:
        shell = by_basin[k].uncertain if region is None else by_basin[k].uncertain & region
        cells = np.argwhere(shell)
        if cells.size == 0:
            raise EmptyShellError(f"uncertain shell of basin {k} is empty", basin_index=k)

        children = np.random.SeedSequence([seed, k]).spawn(n_chunks)
        jobs = list(zip(chunk_sizes, children))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda job: _tally_chunk(grid, cells, *job), jobs))
        else:
            results = [_tally_chunk(grid, cells, *job) for job in jobs]

        counts = np.sum([r[0] for r in results], axis=0)
        dropped = sum(r[1] for r in results)
        if dropped:
            logger.warning("basin %d: %d kernel samples stayed unresolved", k, dropped)
        if counts.sum() == 0:
            raise InsufficientDataError(
                f"every kernel sample from basin {k} stayed unresolved",
                required=1,
                observed=0,
            )
        matrix[k] = counts / counts.sum()

    logger.info("switch kernel diagonal %s", np.round(np.diag(matrix), 4).tolist())
    return SwitchKernel(matrix, samples_per_row, seed)
