#!/usr/bin/env python3
"""
bibkit Newton Dynamics - Orbits, basin labels and finite-time Lyapunov exponents.

This module implements the complex Newton map ``N(z) = z - f(z)/f'(z)`` for a
polynomial ``f`` and the machinery built on it:

    - :func:`newton_step` and :func:`iterate_orbit` for single orbits, with the
      finite-time Lyapunov exponent (FTLE) ``(1/n) * sum(ln|N'(z_k)|)``
    - :func:`label_points` and :func:`label_grid` for vectorised basin labels
      over arbitrary point sets and rectangular windows
    - :func:`lyapunov_time` for the contracting / expanding dichotomy
    - :func:`refine_boundary_point` to place a point on a basin boundary to
      within machine precision

Conventions:
    Polynomial coefficients are stored constant term first. Roots are ordered
    by argument in ``[0, 2*pi)`` and then by modulus, so for ``z**3 - 1`` the
    basin indices are ``0 -> 1``, ``1 -> omega``, ``2 -> omega**2`` and a
    rotation by ``omega`` maps basin ``k`` to ``(k + 1) % 3``.

    Grid arrays are indexed ``[i, j]`` with ``i`` along the real axis and
    ``j`` along the imaginary axis; cells whose orbit hits a vanishing
    derivative or never converges carry :data:`UNRESOLVED`.

Example Usage:
    >>> poly = PolynomialMap.cubic_unity()
    >>> orbit = iterate_orbit(poly, 2.0)
    >>> orbit.status, orbit.root_index
    (<OrbitStatus.CONVERGED: 'converged'>, 0)
    >>> grid = label_grid(poly, GridSpec(nx=128, ny=128))
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from bibkit import __version__
from bibkit.core.exceptions import (
    OutOfWindowError,
    SingularDerivativeError,
    ValidationError,
)
from bibkit.core.models import GridSpec
from bibkit.core.storage import (
    labels_to_rgb,
    read_key_values,
    read_pixmap,
    rgb_to_labels,
    write_key_values,
    write_pixmap,
)

logger = logging.getLogger(__name__)

UNRESOLVED = -1

DEFAULT_MAX_ITERS = 200
DEFAULT_CONVERGENCE_RADIUS = 1e-9
DEFAULT_FTLE_CLIP = 50.0


@dataclass(frozen=True)
class PolynomialMap:
    """
    A complex polynomial and its Newton map.

    Attributes:
        coefficients: Complex coefficients, constant term first
        root_tolerance: Bound on ``|f(root)|`` after polishing
        floor_scale: Derivative floor relative to the leading coefficient

    Examples:
        >>> poly = PolynomialMap((-1, 0, 0, 1))
        >>> poly.degree
        3
        >>> poly(1.0)
        0j
    """

    coefficients: Tuple[complex, ...]
    root_tolerance: float = 1e-10
    floor_scale: float = 1e-14

    def __post_init__(self) -> None:
        coeffs = tuple(complex(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 3:
            raise ValidationError(
                "polynomial degree must be at least 2",
                field="coefficients",
                value=list(coeffs),
            )
        if coeffs[-1] == 0:
            raise ValidationError(
                "leading coefficient must be nonzero",
                field="coefficients",
                value=list(coeffs),
            )

    @classmethod
    def cubic_unity(cls) -> "PolynomialMap":
        """The default map, ``f(z) = z**3 - 1``."""
        return cls((-1.0, 0.0, 0.0, 1.0))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> complex:
        return self.coefficients[-1]

    @property
    def derivative_floor(self) -> float:
        return self.floor_scale * abs(self.leading)

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.coefficients)

    @cached_property
    def _c0(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=complex)

    @cached_property
    def _c1(self) -> np.ndarray:
        return npoly.polyder(self._c0)

    @cached_property
    def _c2(self) -> np.ndarray:
        return npoly.polyder(self._c0, 2)

    def __call__(self, z):
        return npoly.polyval(z, self._c0)

    def derivative(self, z):
        return npoly.polyval(z, self._c1)

    def second_derivative(self, z):
        return npoly.polyval(z, self._c2)

    def newton_derivative(self, z):
        """``N'(z) = f(z) f''(z) / f'(z)**2``."""
        d = self.derivative(z)
        return self(z) * self.second_derivative(z) / (d * d)

    @cached_property
    def _roots(self) -> Tuple[complex, ...]:
        raw = npoly.polyroots(self._c0)
        polished = []
        for r in raw:
            r = complex(r)
            for _ in range(8):
                d = self.derivative(r)
                if abs(d) <= self.derivative_floor:
                    break
                step = self(r) / d
                r -= step
                if abs(step) < 1e-17:
                    break
            polished.append(r)
        for r in polished:
            if abs(self(r)) >= self.root_tolerance:
                logger.warning("root %s leaves residual %.3e", r, abs(self(r)))
        polished.sort(
            key=lambda r: (
                float(np.mod(np.round(np.angle(r), 9), 2 * np.pi)),
                round(abs(r), 9),
            )
        )
        return tuple(polished)

    def roots(self) -> Tuple[complex, ...]:
        """Exactly ``degree`` polished roots in basin-index order."""
        return self._roots

    def conjugate_root_permutation(self) -> List[int]:
        """Index of ``conj(root_k)`` among the roots, for real-coefficient maps."""
        if not self.is_real:
            raise ValidationError(
                "conjugation symmetry needs real coefficients", field="coefficients"
            )
        roots = np.asarray(self.roots())
        return [int(np.argmin(np.abs(roots - np.conj(r)))) for r in roots]


class OrbitStatus(Enum):
    """How an orbit terminated."""

    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    SINGULAR = "singular"


@dataclass(frozen=True)
class Orbit:
    """
    A realized Newton orbit.

    Attributes:
        points: ``z_0, z_1, ..., z_n``
        status: Terminal status
        root_index: Captured root for converged orbits, else None
        ftle: Finite-time Lyapunov exponent in nats per iteration
    """

    points: Tuple[complex, ...]
    status: OrbitStatus
    root_index: Optional[int]
    ftle: float

    @property
    def iterations(self) -> int:
        return len(self.points) - 1

    @property
    def label(self) -> int:
        return self.root_index if self.status is OrbitStatus.CONVERGED else UNRESOLVED


def newton_step(poly: PolynomialMap, z: complex) -> complex:
    """One Newton step; raises ``SingularDerivativeError`` when ``|f'(z)|`` hits the floor."""
    z = complex(z)
    d = complex(poly.derivative(z))
    if abs(d) <= poly.derivative_floor:
        raise SingularDerivativeError(
            f"|f'(z)| = {abs(d):.3e} at z = {z} is below the derivative floor",
            z=z,
            derivative=abs(d),
        )
    return z - complex(poly(z)) / d


def _captured(roots: np.ndarray, z: complex, radius: float) -> Optional[int]:
    dist = np.abs(roots - z)
    k = int(np.argmin(dist))
    return k if dist[k] < radius else None


def _ftle_term(poly: PolynomialMap, z: complex, clip: float) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        value = abs(complex(poly.newton_derivative(z)))
    if not math.isfinite(value):
        return clip
    if value == 0.0:
        return -clip
    return float(np.clip(math.log(value), -clip, clip))


def iterate_orbit(
    poly: PolynomialMap,
    z0: complex,
    max_iters: int = DEFAULT_MAX_ITERS,
    convergence_radius: float = DEFAULT_CONVERGENCE_RADIUS,
    ftle_clip: float = DEFAULT_FTLE_CLIP,
) -> Orbit:
    """
    Iterate the Newton map from ``z0`` until capture, singularity or ``max_iters``.

    Capture is checked before every step, so a root converges in zero steps.
    The FTLE averages ``ln|N'|`` over the points preceding the terminal one
    (``z0`` alone when no step was taken); each term is clipped to
    ``[-ftle_clip, ftle_clip]`` and a singular point contributes ``+ftle_clip``.
    """
    if max_iters < 1:
        raise ValidationError("max_iters must be >= 1", field="max_iters", value=max_iters)

    roots = np.asarray(poly.roots())
    z = complex(z0)
    points = [z]
    status = OrbitStatus.MAX_ITERS
    root_index: Optional[int] = None

    for n in range(max_iters + 1):
        k = _captured(roots, z, convergence_radius)
        if k is not None:
            status, root_index = OrbitStatus.CONVERGED, k
            break
        if n == max_iters:
            break
        try:
            z = newton_step(poly, z)
        except SingularDerivativeError:
            status = OrbitStatus.SINGULAR
            break
        points.append(z)

    if status is OrbitStatus.SINGULAR:
        terms = [_ftle_term(poly, p, ftle_clip) for p in points[:-1]] + [ftle_clip]
    else:
        head = points[:-1] if len(points) > 1 else points
        terms = [_ftle_term(poly, p, ftle_clip) for p in head]

    return Orbit(
        points=tuple(points),
        status=status,
        root_index=root_index,
        ftle=float(np.mean(terms)),
    )


def lyapunov_time(ftle: float) -> float:
    """``1/ftle`` for expanding orbits, ``math.inf`` for contracting ones."""
    return 1.0 / ftle if ftle > 0 else math.inf


def label_points(
    poly: PolynomialMap,
    z: np.ndarray,
    max_iters: int = DEFAULT_MAX_ITERS,
    convergence_radius: float = DEFAULT_CONVERGENCE_RADIUS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorised orbit labels for an array of starting points.

    Returns:
        ``(labels, iters)`` shaped like ``z``; labels follow :attr:`Orbit.label`
        and iters follow :attr:`Orbit.iterations`.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    current = z.ravel().copy()
    n = current.size
    labels = np.full(n, UNRESOLVED, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    roots = np.asarray(poly.roots())
    floor = poly.derivative_floor
    active = np.arange(n)

    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(max_iters + 1):
            if active.size == 0:
                break
            zc = current[active]
            dist = np.abs(zc[:, None] - roots[None, :])
            nearest = dist.argmin(axis=1)
            hit = dist[np.arange(active.size), nearest] < convergence_radius
            labels[active[hit]] = nearest[hit]
            iters[active[hit]] = it
            active, zc = active[~hit], zc[~hit]
            if it == max_iters:
                iters[active] = max_iters
                break
            d = poly.derivative(zc)
            # overflowed orbits and vanishing derivatives both stay Unresolved
            dropped = (np.abs(d) <= floor) | ~np.isfinite(zc)
            iters[active[dropped]] = it
            active, zc, d = active[~dropped], zc[~dropped], d[~dropped]
            current[active] = zc - poly(zc) / d

    return labels.reshape(shape), iters.reshape(shape)


@dataclass(frozen=True, eq=False)
class ComplexGrid:
    """
    A labeled rectangular sampling of the complex plane.

    Attributes:
        origin: Lower-left corner
        extent: ``width + 1j * height``
        nx, ny: Resolution
        labels: ``(nx, ny)`` basin indices, :data:`UNRESOLVED` for -1
        iters: ``(nx, ny)`` iteration counts
        poly: Map the labels were computed for
        max_iters, convergence_radius: Labeling parameters
    """

    origin: complex
    extent: complex
    nx: int
    ny: int
    labels: np.ndarray
    iters: np.ndarray
    poly: PolynomialMap = field(default_factory=PolynomialMap.cubic_unity)
    max_iters: int = DEFAULT_MAX_ITERS
    convergence_radius: float = DEFAULT_CONVERGENCE_RADIUS

    def __post_init__(self) -> None:
        if self.labels.shape != (self.nx, self.ny) or self.iters.shape != (self.nx, self.ny):
            raise ValidationError(
                f"labels and iters must have shape ({self.nx}, {self.ny})",
                field="labels",
                value=self.labels.shape,
            )

    @classmethod
    def from_spec(
        cls,
        spec: GridSpec,
        labels: np.ndarray,
        iters: Optional[np.ndarray] = None,
        poly: Optional[PolynomialMap] = None,
        **kwargs,
    ) -> "ComplexGrid":
        labels = np.asarray(labels, dtype=np.int64)
        return cls(
            origin=spec.origin,
            extent=spec.extent,
            nx=spec.nx,
            ny=spec.ny,
            labels=labels,
            iters=np.zeros_like(labels) if iters is None else np.asarray(iters),
            poly=poly or PolynomialMap.cubic_unity(),
            **kwargs,
        )

    @property
    def spec(self) -> GridSpec:
        return GridSpec(
            xmin=self.origin.real,
            xmax=self.origin.real + self.extent.real,
            ymin=self.origin.imag,
            ymax=self.origin.imag + self.extent.imag,
            nx=self.nx,
            ny=self.ny,
        )

    @property
    def window(self) -> Tuple[float, float, float, float]:
        return self.spec.window

    @property
    def cell_size(self) -> Tuple[float, float]:
        return self.extent.real / self.nx, self.extent.imag / self.ny

    @property
    def cell_diagonal(self) -> float:
        dx, dy = self.cell_size
        return math.hypot(dx, dy)

    def cell_center(self, i: int, j: int) -> complex:
        return (
            self.origin
            + ((i + 0.5) / self.nx) * self.extent.real
            + 1j * ((j + 0.5) / self.ny) * self.extent.imag
        )

    def centers(self) -> np.ndarray:
        return cell_centers(self.spec)

    def locate(self, z: complex) -> Tuple[int, int]:
        """Cell holding ``z``; the closed window is accepted."""
        z = complex(z)
        u = (z.real - self.origin.real) / self.extent.real
        v = (z.imag - self.origin.imag) / self.extent.imag
        if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
            raise OutOfWindowError(f"{z} lies outside the grid window", z, self.window)
        return min(int(u * self.nx), self.nx - 1), min(int(v * self.ny), self.ny - 1)

    def disk(self, radius: float, center: complex = 0j) -> np.ndarray:
        """Boolean region of cells whose centers lie within ``radius`` of ``center``."""
        return np.abs(self.centers() - center) <= radius

    def basin_indices(self) -> List[int]:
        return [int(k) for k in np.unique(self.labels) if k != UNRESOLVED]

    @property
    def unresolved_fraction(self) -> float:
        return float(np.mean(self.labels == UNRESOLVED))


def cell_centers(spec: GridSpec) -> np.ndarray:
    """``(nx, ny)`` complex array of cell centers."""
    x = spec.xmin + (np.arange(spec.nx) + 0.5) / spec.nx * (spec.xmax - spec.xmin)
    y = spec.ymin + (np.arange(spec.ny) + 0.5) / spec.ny * (spec.ymax - spec.ymin)
    return x[:, None] + 1j * y[None, :]


def label_grid(
    poly: PolynomialMap,
    spec: GridSpec,
    max_iters: int = DEFAULT_MAX_ITERS,
    convergence_radius: float = DEFAULT_CONVERGENCE_RADIUS,
    workers: int = 1,
    unresolved_warning: float = 0.01,
) -> ComplexGrid:
    """
    Label every cell center of ``spec`` by the terminal status of its orbit.

    Column blocks are independent and may be spread over a thread pool; the
    result does not depend on ``workers``.
    """
    centers = cell_centers(spec)
    if workers <= 1:
        labels, iters = label_points(poly, centers, max_iters, convergence_radius)
    else:
        blocks = np.array_split(np.arange(spec.nx), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    lambda idx: label_points(
                        poly, centers[idx], max_iters, convergence_radius
                    ),
                    blocks,
                )
            )
        labels = np.concatenate([p[0] for p in parts], axis=0)
        iters = np.concatenate([p[1] for p in parts], axis=0)

    grid = ComplexGrid.from_spec(
        spec,
        labels,
        iters,
        poly,
        max_iters=max_iters,
        convergence_radius=convergence_radius,
    )
    fraction = grid.unresolved_fraction
    if fraction > unresolved_warning:
        logger.warning(
            "%.2f%% of %dx%d cells are unresolved", 100 * fraction, spec.nx, spec.ny
        )
    logger.info(
        "labeled %dx%d grid, basins=%s, mean iterations %.1f",
        spec.nx,
        spec.ny,
        grid.basin_indices(),
        float(iters.mean()),
    )
    return grid


def refine_boundary_point(
    poly: PolynomialMap,
    z_a: complex,
    z_b: complex,
    tol: float = 1e-15,
    max_iters: int = DEFAULT_MAX_ITERS,
    convergence_radius: float = DEFAULT_CONVERGENCE_RADIUS,
    max_bisections: int = 200,
) -> complex:
    """
    Bisect the segment ``[z_a, z_b]`` down to a basin boundary crossing.

    The endpoints must carry different labels. Returns the ``z_a``-side end of
    the final bracket, which keeps the label of ``z_a``.
    """
    a, b = complex(z_a), complex(z_b)
    label_a = iterate_orbit(poly, a, max_iters, convergence_radius).label
    label_b = iterate_orbit(poly, b, max_iters, convergence_radius).label
    if label_a == label_b:
        raise ValidationError(
            "endpoints share a basin label; no crossing to refine",
            field="z_b",
            value=label_a,
        )
    for _ in range(max_bisections):
        if abs(b - a) <= tol:
            break
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if iterate_orbit(poly, mid, max_iters, convergence_radius).label == label_a:
            a = mid
        else:
            b = mid
    return a


def save_grid(grid: ComplexGrid, path: Path) -> Tuple[Path, Path]:
    """Write the label pixmap and its ``.meta`` sidecar."""
    path = Path(path)
    pixmap = write_pixmap(path, labels_to_rgb(grid.labels))
    xmin, xmax, ymin, ymax = grid.window
    meta: Dict[str, object] = {
        "window": f"{xmin!r},{xmax!r},{ymin!r},{ymax!r}",
        "resolution": f"{grid.nx},{grid.ny}",
        "coefficients": ",".join(_format_complex(c) for c in grid.poly.coefficients),
        "max_iters": grid.max_iters,
        "convergence_radius": repr(grid.convergence_radius),
        "unresolved_fraction": f"{grid.unresolved_fraction:.6f}",
        "seed": "irrelevant",
        "tool_version": __version__,
    }
    sidecar = write_key_values(path.with_suffix(path.suffix + ".meta"), meta)
    return pixmap, sidecar


def load_grid(path: Path) -> ComplexGrid:
    """Read a pixmap written by :func:`save_grid`; iteration counts are not stored."""
    path = Path(path)
    meta = read_key_values(path.with_suffix(path.suffix + ".meta"))
    xmin, xmax, ymin, ymax = (float(v) for v in meta["window"].split(","))
    nx, ny = (int(v) for v in meta["resolution"].split(","))
    labels = rgb_to_labels(read_pixmap(path))
    if labels.shape != (nx, ny):
        raise ValidationError(
            f"pixmap shape {labels.shape} disagrees with metadata ({nx}, {ny})",
            field="resolution",
        )
    poly = PolynomialMap(tuple(complex(c) for c in meta["coefficients"].split(",")))
    spec = GridSpec(xmin=xmin, xmax=xmax, ymin=ymin, ymax=ymax, nx=nx, ny=ny)
    return ComplexGrid.from_spec(
        spec,
        labels,
        poly=poly,
        max_iters=int(meta.get("max_iters", DEFAULT_MAX_ITERS)),
        convergence_radius=float(
            meta.get("convergence_radius", DEFAULT_CONVERGENCE_RADIUS)
        ),
    )


def parse_coefficients(text: str) -> Tuple[complex, ...]:
    """Parse ``"-1,0,0,1"`` (constant first); entries may be complex like ``1+2j``."""
    try:
        return tuple(complex(part.strip().replace(" ", "")) for part in text.split(","))
    except ValueError as e:
        raise ValidationError(
            f"cannot parse coefficient list {text!r}: {e}", field="poly", value=text
        )


def _format_complex(c: complex) -> str:
    return repr(c.real) if c.imag == 0 else repr(c).strip("()")

