"""Tests for the Newton map, orbits and basin labeling."""

import cmath
import math

import mpmath
import numpy as np
import pytest

from bibkit.core.exceptions import OutOfWindowError, SingularDerivativeError, ValidationError
from bibkit.core.models import GridSpec
from bibkit.dynamics import (
    UNRESOLVED,
    OrbitStatus,
    PolynomialMap,
    iterate_orbit,
    label_grid,
    label_points,
    lyapunov_time,
    newton_step,
    refine_boundary_point,
)
from bibkit.dynamics.newton import load_grid, parse_coefficients, save_grid

OMEGA = cmath.exp(2j * math.pi / 3)


def _reference_orbit(z0, steps):
    """Newton orbit of z**3 - 1 in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    z = mpmath.mpc(z0.real, z0.imag)
    points = [z]
    for _ in range(steps):
        z = z - (z**3 - 1) / (3 * z**2)
        points.append(z)
    return [complex(p) for p in points]


class TestPolynomialMap:
    def test_cubic_roots_are_ordered_by_argument(self, cubic):
        roots = cubic.roots()
        assert len(roots) == 3
        expected = [1.0, OMEGA, OMEGA**2]
        for r, e in zip(roots, expected):
            assert abs(r - e) < 1e-12
            assert abs(cubic(r)) < 1e-10

    def test_degree_below_two_is_rejected(self):
        with pytest.raises(ValidationError):
            PolynomialMap((1.0, 2.0))

    def test_zero_leading_coefficient_is_rejected(self):
        with pytest.raises(ValidationError):
            PolynomialMap((-1.0, 0.0, 0.0, 0.0))

    def test_newton_derivative_vanishes_at_roots(self, cubic):
        for r in cubic.roots():
            assert abs(cubic.newton_derivative(r)) < 1e-9

    def test_conjugate_permutation(self, cubic):
        assert cubic.conjugate_root_permutation() == [0, 2, 1]

    def test_complex_coefficients_have_no_conjugation_symmetry(self):
        with pytest.raises(ValidationError):
            PolynomialMap((1j, 0.0, 1.0)).conjugate_root_permutation()

    def test_parse_coefficients(self):
        assert parse_coefficients("-1, 0, 0, 1") == (-1, 0, 0, 1)
        assert parse_coefficients("1+2j,0,1")[0] == 1 + 2j
        with pytest.raises(ValidationError):
            parse_coefficients("one,two")


class TestOrbits:
    def test_root_converges_in_zero_steps(self, cubic):
        orbit = iterate_orbit(cubic, 1.0)
        assert orbit.status is OrbitStatus.CONVERGED
        assert orbit.iterations == 0
        assert orbit.root_index == 0

    def test_critical_point_is_singular(self, cubic):
        orbit = iterate_orbit(cubic, 0.0)
        assert orbit.status is OrbitStatus.SINGULAR
        assert orbit.label == UNRESOLVED
        assert orbit.ftle == 50.0
        with pytest.raises(SingularDerivativeError):
            newton_step(cubic, 0.0)

    def test_converging_orbit_contracts(self, cubic):
        orbit = iterate_orbit(cubic, 1.3 + 0.2j)
        assert orbit.status is OrbitStatus.CONVERGED
        assert orbit.root_index == 0
        assert orbit.ftle < 0
        assert lyapunov_time(orbit.ftle) == math.inf

    def test_budget_exhaustion(self, cubic):
        orbit = iterate_orbit(cubic, 5.0 + 5.0j, max_iters=2)
        assert orbit.status is OrbitStatus.MAX_ITERS
        assert orbit.iterations == 2
        assert orbit.label == UNRESOLVED

    def test_invalid_budget(self, cubic):
        with pytest.raises(ValidationError):
            iterate_orbit(cubic, 1.0, max_iters=0)

    def test_matches_extended_precision_reference(self, cubic):
        z0 = 0.001 + 0.001j
        orbit = iterate_orbit(cubic, z0)
        assert orbit.status is OrbitStatus.CONVERGED
        reference = _reference_orbit(z0, orbit.iterations)
        for z, ref in zip(orbit.points, reference):
            assert abs(z - ref) <= 1e-8 * max(1.0, abs(ref))
        assert abs(reference[-1] - cubic.roots()[orbit.root_index]) < 1e-8

    def test_boundary_point_shadows_with_positive_exponent(self, cubic):
        z = refine_boundary_point(cubic, -1.0 + 1.0j, -1.0 - 1.0j, tol=1e-15)
        full = iterate_orbit(cubic, z)
        assert full.status is OrbitStatus.CONVERGED
        head = iterate_orbit(cubic, z, max_iters=max(full.iterations // 2, 1))
        assert head.status is OrbitStatus.MAX_ITERS
        assert head.ftle > 0
        assert math.isfinite(lyapunov_time(head.ftle))

    def test_refine_needs_a_crossing(self, cubic):
        with pytest.raises(ValidationError):
            refine_boundary_point(cubic, 1.0 + 0.1j, 1.0 - 0.1j)

    def test_lyapunov_time(self):
        assert lyapunov_time(0.5) == 2.0
        assert lyapunov_time(-1.0) == math.inf


class TestLabeling:
    def test_vectorised_labels_agree_with_orbits(self, cubic, rng):
        z = rng.uniform(-2, 2, 200) + 1j * rng.uniform(-2, 2, 200)
        labels, iters = label_points(cubic, z)
        for zi, label, n in zip(z, labels, iters):
            orbit = iterate_orbit(cubic, zi)
            assert label == orbit.label
            if orbit.status is OrbitStatus.CONVERGED:
                assert n == orbit.iterations

    def test_rotation_equivariance(self, cubic, rng):
        radius = 2.0 * np.sqrt(rng.random(512 * 512))
        z = radius * np.exp(2j * np.pi * rng.random(radius.size))
        labels, _ = label_points(cubic, z)
        rotated, _ = label_points(cubic, OMEGA * z)
        resolved = (labels != UNRESOLVED) & (rotated != UNRESOLVED)
        violations = np.count_nonzero(rotated[resolved] != (labels[resolved] + 1) % 3)
        violations += np.count_nonzero(labels != UNRESOLVED) - np.count_nonzero(resolved)
        assert violations / z.size < 1e-3

    def test_conjugation_equivariance(self, cubic, rng):
        z = rng.uniform(-2, 2, 20000) + 1j * rng.uniform(-2, 2, 20000)
        labels, _ = label_points(cubic, z)
        mirrored, _ = label_points(cubic, np.conj(z))
        perm = np.array(cubic.conjugate_root_permutation())
        resolved = (labels != UNRESOLVED) & (mirrored != UNRESOLVED)
        assert np.mean(mirrored[resolved] != perm[labels[resolved]]) < 1e-3

    def test_grid_shape_and_orientation(self, small_grid):
        assert small_grid.labels.shape == (128, 128)
        # right edge of the real axis belongs to the root 1
        i, j = small_grid.locate(1.9 + 0.0j)
        assert small_grid.labels[i, j] == 0
        with pytest.raises(OutOfWindowError):
            small_grid.locate(3.0)

    def test_workers_do_not_change_labels(self, cubic):
        spec = GridSpec(nx=64, ny=48)
        serial = label_grid(cubic, spec, workers=1)
        threaded = label_grid(cubic, spec, workers=3)
        assert np.array_equal(serial.labels, threaded.labels)
        assert np.array_equal(serial.iters, threaded.iters)

    def test_unresolved_warning(self, cubic, caplog):
        label_grid(cubic, GridSpec(nx=32, ny=32), max_iters=1)
        assert any("unresolved" in r.getMessage() for r in caplog.records)

    def test_saved_grid_reloads(self, small_grid, tmp_path):
        pixmap, sidecar = save_grid(small_grid, tmp_path / "basins.ppm")
        assert sidecar.read_text().count("tool_version=") == 1
        loaded = load_grid(pixmap)
        assert np.array_equal(loaded.labels, small_grid.labels)
        assert loaded.window == small_grid.window
        assert loaded.poly.coefficients == small_grid.poly.coefficients

    @pytest.mark.slow
    def test_basin_fractions_on_symmetric_disk(self, grid_512):
        from bibkit.dynamics import measure_report

        report = measure_report(grid_512, region=grid_512.disk(1.5))
        fractions = list(report.basin_fractions.values())
        assert max(fractions) - min(fractions) < 0.01
