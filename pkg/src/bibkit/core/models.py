#!/usr/bin/env python3
"""
bibkit Core Models - Configuration sections and wire records.

Pydantic models for everything that crosses a process boundary: the layered
settings read from ``config/defaults.json`` and the environment, the
``key=value`` run files consumed by ``bibkit infer`` / ``bibkit walk``, and
the JSON-lines records written next to pixmaps and CSV logs.

Numerical objects (grids, partitions, distributions, logs) are plain
dataclasses backed by numpy in their own modules; each of them converts to
one of the record models below through ``to_record()``.

Thread Safety:
    All models are immutable (frozen=True); a loaded ``Settings`` instance can
    be shared by worker threads without copying.

Example Usage:
    >>> spec = GridSpec(xmin=-2, xmax=2, ymin=-2, ymax=2, nx=512, ny=512)
    >>> spec.extent
    (4+4j)
    >>> cfg = IBConfig(gamma=0.05, policy=ExplorationPolicy.ADD_HYPOTHESIS)
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ExplorationPolicy(str, Enum):
    """How ``explore`` makes room for a new hypothesis."""

    REPLACE_WEAKEST = "replace_weakest"
    ADD_HYPOTHESIS = "add_hypothesis"


class ThetaSource(str, Enum):
    """Where the relation threshold comes from."""

    PARTITION = "partition"
    FIXED = "fixed"


class GridSpec(BaseModel):
    """
    Rectangular window of the complex plane and its sampling resolution.

    Attributes:
        xmin, xmax: Real-axis bounds
        ymin, ymax: Imaginary-axis bounds
        nx, ny: Number of cells along each axis
    """

    model_config = ConfigDict(frozen=True)

    xmin: float = Field(default=-2.0, description="Lower real bound")
    xmax: float = Field(default=2.0, description="Upper real bound")
    ymin: float = Field(default=-2.0, description="Lower imaginary bound")
    ymax: float = Field(default=2.0, description="Upper imaginary bound")
    nx: int = Field(default=512, ge=2, description="Cells along the real axis")
    ny: int = Field(default=512, ge=2, description="Cells along the imaginary axis")

    @model_validator(mode="after")
    def _check_bounds(self) -> "GridSpec":
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValueError("window bounds must satisfy xmin < xmax and ymin < ymax")
        return self

    @property
    def origin(self) -> complex:
        return complex(self.xmin, self.ymin)

    @property
    def extent(self) -> complex:
        return complex(self.xmax - self.xmin, self.ymax - self.ymin)

    @property
    def window(self) -> Tuple[float, float, float, float]:
        return (self.xmin, self.xmax, self.ymin, self.ymax)


class NewtonSettings(BaseModel):
    """Defaults for orbit iteration and grid labeling."""

    model_config = ConfigDict(frozen=True)

    coefficients: List[float] = Field(
        default_factory=lambda: [-1.0, 0.0, 0.0, 1.0],
        description="Real polynomial coefficients, constant term first",
    )
    max_iters: int = Field(default=200, ge=1)
    convergence_radius: float = Field(default=1e-9, gt=0.0)
    derivative_floor: float = Field(
        default=1e-14, gt=0.0, description="Relative to the leading coefficient"
    )
    ftle_clip: float = Field(default=50.0, gt=0.0)
    workers: int = Field(default=1, ge=1)
    grid: GridSpec = Field(default_factory=GridSpec)


class FractalSettings(BaseModel):
    """Thresholds for the box-counting regression alarms."""

    model_config = ConfigDict(frozen=True)

    r2_warning: float = Field(default=0.98, ge=0.0, le=1.0)
    slope_min: float = Field(default=0.9)
    slope_max: float = Field(default=2.0)
    unresolved_warning: float = Field(default=0.01, ge=0.0, le=1.0)


class PartitionSettings(BaseModel):
    """Defaults for the coarse-graining partition and switch kernel."""

    model_config = ConfigDict(frozen=True)

    basin: int = Field(default=0, ge=0, description="Designated basin index")
    dilation_radius: int = Field(default=2, ge=1)
    samples_per_row: int = Field(default=10_000, ge=1)
    chunk_size: int = Field(default=1024, ge=1)
    seed: int = Field(default=0)
    workers: int = Field(default=1, ge=1)


class IBConfig(BaseModel):
    """
    Free parameters of the interlaced B/IB loop.

    Attributes:
        gamma: Likelihood learning rate of the IB mixture; 0 disables IB
        policy: Exploration policy
        theta_source: Threshold from a partition or a fixed value
        theta: Fixed threshold, or the partition-derived value once resolved
        window: Length of the recent-data buffer
        epsilon: Uniform smoothing floor for re-seeded likelihood rows
        ib_tolerance: Smallest row change reported as an IB event
        max_hypotheses: Cap on the hypothesis count under AddHypothesis
    """

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(default=0.01, ge=0.0, le=1.0)
    policy: ExplorationPolicy = Field(default=ExplorationPolicy.REPLACE_WEAKEST)
    theta_source: ThetaSource = Field(default=ThetaSource.FIXED)
    theta: float = Field(default=0.36, ge=0.0, lt=1.0)
    window: int = Field(default=16, ge=1)
    epsilon: float = Field(default=1e-6, gt=0.0)
    ib_tolerance: float = Field(default=1e-9, ge=0.0)
    max_hypotheses: int = Field(default=16, ge=2)


class PerceptionSettings(BaseModel):
    """Defaults for the tri-stable perception simulator."""

    model_config = ConfigDict(frozen=True)

    steps: int = Field(default=100_000, ge=1)
    seed: int = Field(default=0)
    noise_amplitude: float = Field(default=0.0, ge=0.0, le=1.0)


class WalkerSettings(BaseModel):
    """Defaults for the BIB-driven walker and its diagnostics."""

    model_config = ConfigDict(frozen=True)

    steps: int = Field(default=100_000, ge=1)
    seed: int = Field(default=0)
    min_runs: int = Field(default=30, ge=1)
    lag_min: int = Field(default=10, ge=1)


class Settings(BaseModel):
    """Complete layered configuration of the toolkit."""

    model_config = ConfigDict(frozen=True)

    newton: NewtonSettings = Field(default_factory=NewtonSettings)
    fractal: FractalSettings = Field(default_factory=FractalSettings)
    partition: PartitionSettings = Field(default_factory=PartitionSettings)
    inference: IBConfig = Field(default_factory=IBConfig)
    perception: PerceptionSettings = Field(default_factory=PerceptionSettings)
    walker: WalkerSettings = Field(default_factory=WalkerSettings)


class RunConfig(BaseModel):
    """
    A single inference or walker run parsed from a ``key=value`` file.

    ``tables`` points at a JSON-lines file holding one distribution record
    (the prior) followed by one table record (the likelihood). When absent,
    the canned tri-stable model is used.
    """

    model_config = ConfigDict(frozen=True)

    mode: Literal["bayes", "bib"] = Field(default="bib")
    seed: int = Field(default=0)
    steps: int = Field(default=10_000, ge=1)
    stream: Literal["true", "ambiguous", "constant"] = Field(default="ambiguous")
    true_hypothesis: Optional[str] = Field(default=None)
    constant_datum: Optional[str] = Field(default=None)
    tables: Optional[Path] = Field(default=None)
    ib: IBConfig = Field(default_factory=IBConfig)


class DistributionRecord(BaseModel):
    """Wire form of a Distribution."""

    model_config = ConfigDict(frozen=True)

    labels: List[str]
    probs: List[float]


class TableRecord(BaseModel):
    """Wire form of a LikelihoodTable (rows indexed by hypothesis)."""

    model_config = ConfigDict(frozen=True)

    h_labels: List[str]
    d_labels: List[str]
    rows: List[List[float]]


class RelationRecord(BaseModel):
    """Wire form of a BinaryRelation."""

    model_config = ConfigDict(frozen=True)

    theta: float
    pairs: List[Tuple[str, str]]


class RoughRecord(BaseModel):
    """Wire form of a RoughApproximation."""

    model_config = ConfigDict(frozen=True)

    lower: Dict[str, List[str]]
    upper: Dict[str, List[str]]


class DimensionRecord(BaseModel):
    """Summary of a box-counting fit."""

    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    r2: float
    box_sizes: List[int]
    counts: List[int]


class PartitionRecord(BaseModel):
    """Summary of a partition and its switch kernel."""

    model_config = ConfigDict(frozen=True)

    basin: int
    dilation_radius: int
    theta: float
    theta_scope: str = "per-basin"
    thetas: Dict[str, float] = Field(default_factory=dict)
    kernel: List[List[float]]
    samples: int
    seed: int


class DwellRecord(BaseModel):
    """Summary of dwell-time statistics."""

    model_config = ConfigDict(frozen=True)

    switches: int
    counts: Dict[str, int]
    means: Dict[str, float]
    medians: Dict[str, float]
    stderrs: Dict[str, float]
    tail: Optional[Dict[str, Any]] = None


class DiffusionRecord(BaseModel):
    """Summary of walker diffusion statistics."""

    model_config = ConfigDict(frozen=True)

    runs: int
    msd_exponent: float
    fit_range: Tuple[int, int]
    tail: Optional[Dict[str, Any]] = None
