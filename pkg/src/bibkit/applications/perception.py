"""Multistable-perception simulator driven by a basin switch kernel."""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from bibkit.core.exceptions import ValidationError
from bibkit.core.models import NewtonSettings, PartitionSettings
from bibkit.dynamics.fractal import extract_boundary
from bibkit.dynamics.newton import PolynomialMap, label_grid
from bibkit.dynamics.partition import (
    Partition,
    SwitchKernel,
    build_partitions,
    switch_kernel,
)
from .statistics import DwellStats, dwell_statistics
from .trajectory import EventTag, TrajectoryLog

logger = logging.getLogger(__name__)


def percept_labels(size: int) -> Tuple[str, ...]:
    return tuple(str(k + 1) for k in range(size))


def noisy_kernel(kernel: SwitchKernel, noise_amplitude: float) -> np.ndarray:
    """``(1 - a) K + a U`` with ``U`` the uniform kernel."""
    if not 0.0 <= noise_amplitude <= 1.0:
        raise ValidationError(
            "noise amplitude must lie in [0, 1]",
            field="noise_amplitude",
            value=noise_amplitude,
        )
    k = kernel.size
    return (1.0 - noise_amplitude) * kernel.matrix + noise_amplitude / k


def _initial_weights(size: int, partitions: Optional[Dict[int, Partition]]) -> np.ndarray:
    if not partitions:
        return np.full(size, 1.0 / size)
    weights = np.zeros(size)
    for k, part in partitions.items():
        weights[k] = np.count_nonzero(part.inner)
    if weights.sum() == 0:
        return np.full(size, 1.0 / size)
    return weights / weights.sum()


def run_perception(
    kernel: SwitchKernel,
    steps: int,
    seed: int,
    noise_amplitude: float = 0.0,
    partitions: Optional[Dict[int, Partition]] = None,
) -> Tuple[TrajectoryLog, DwellStats]:
    """
    Simulate the percept as a Markov chain on the basins of ``kernel``.

    The starting percept is drawn in proportion to the inner areas of
    ``partitions`` (uniformly without them). Every step either stays (tagged
    B) or jumps (tagged SWITCH) according to the noisy kernel row of the
    current percept. An absorbing kernel yields a log with zero switches and
    empty dwell samples.
    """
    if steps < 1:
        raise ValidationError("steps must be >= 1", field="steps", value=steps)
    matrix = noisy_kernel(kernel, noise_amplitude)
    size = kernel.size
    labels = percept_labels(size)
    cumulative = np.cumsum(matrix, axis=1)
    cumulative[:, -1] = 1.0

    rng = np.random.default_rng(seed)
    state = int(rng.choice(size, p=_initial_weights(size, partitions)))
    draws = rng.random(steps)

    percepts = np.empty(steps, dtype=np.int64)
    for t in range(steps):
        state = int(np.searchsorted(cumulative[state], draws[t], side="right"))
        percepts[t] = state

    switched = np.empty(steps, dtype=bool)
    switched[0] = False
    switched[1:] = percepts[1:] != percepts[:-1]
    events = [EventTag.SWITCH if s else EventTag.B for s in switched]

    log = TrajectoryLog.from_arrays(
        np.arange(1, steps + 1), [labels[p] for p in percepts], events
    )
    stats = dwell_statistics(log, strict=False, labels=labels)
    logger.info(
        "perception: %d steps, %d switches, mean dwell %s",
        steps,
        stats.switches,
        {k: round(v, 3) for k, v in stats.means.items() if np.isfinite(v)},
    )
    return log, stats


def perception_kernel(
    newton: NewtonSettings,
    partition: PartitionSettings,
    region: Optional[np.ndarray] = None,
) -> Tuple[SwitchKernel, Dict[int, Partition]]:
    """Label a grid, partition every basin and sample the switch kernel."""
    poly = PolynomialMap(tuple(newton.coefficients), floor_scale=newton.derivative_floor)
    grid = label_grid(
        poly,
        newton.grid,
        max_iters=newton.max_iters,
        convergence_radius=newton.convergence_radius,
        workers=newton.workers,
    )
    partitions = build_partitions(grid, extract_boundary(grid), partition.dilation_radius)
    kernel = switch_kernel(
        grid,
        list(partitions.values()),
        seed=partition.seed,
        samples_per_row=partition.samples_per_row,
        region=region,
        workers=partition.workers,
        chunk_size=partition.chunk_size,
    )
    return kernel, partitions


def cyclic_average(kernel: SwitchKernel, order: Sequence[int]) -> SwitchKernel:
    """Average of ``kernel`` over the cyclic group generated by the permutation ``order``."""
    perm = np.asarray(order)
    if sorted(perm.tolist()) != list(range(kernel.size)):
        raise ValidationError("order must be a permutation", field="order", value=list(order))
    acc = np.zeros_like(kernel.matrix)
    current = np.arange(kernel.size)
    count = 0
    while True:
        acc += kernel.matrix[np.ix_(current, current)]
        count += 1
        current = perm[current]
        if (current == np.arange(kernel.size)).all():
            break
    return SwitchKernel(acc / count, kernel.samples_per_row, kernel.seed)
