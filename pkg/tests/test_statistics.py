"""Tests for dwell statistics, power-law tail fits and MSD diagnostics."""

import numpy as np
import pytest
from scipy import stats as sps

from bibkit.applications import EventTag, TrajectoryLog
from bibkit.applications.statistics import (
    DwellStats,
    diffusion_statistics,
    dwell_statistics,
    fit_power_law,
    log_spaced_lags,
    mean_squared_displacement,
    msd_exponent,
    run_lengths,
)
from bibkit.core.exceptions import InsufficientDataError, ValidationError


def _log(percepts):
    n = len(percepts)
    return TrajectoryLog.from_arrays(range(1, n + 1), percepts, [EventTag.B] * n)


def _runs_log(lengths):
    percepts = []
    for k, length in enumerate(lengths):
        percepts.extend([str(k % 2 + 1)] * int(length))
    return _log(percepts)


class TestDwell:
    def test_run_lengths(self):
        assert run_lengths(["a", "a", "b", "a"]) == [("a", 2), ("b", 1), ("a", 1)]
        assert run_lengths([]) == []

    def test_alternating_percepts(self):
        stats = dwell_statistics(_log(["1", "2", "1", "2"]))
        assert stats.switches == 3
        assert stats.means == {"1": 1.0, "2": 1.0}
        assert stats.counts == {"1": 2, "2": 1}
        assert stats.tail is None

    def test_constant_percept(self):
        with pytest.raises(InsufficientDataError):
            dwell_statistics(_log(["1"] * 50))
        lenient = dwell_statistics(_log(["1"] * 50), strict=False)
        assert lenient.switches == 0
        assert lenient.pooled().size == 0

    def test_trailing_run_is_censored(self):
        stats = dwell_statistics(_log(["1", "1", "2", "2", "2", "2", "2"]))
        assert stats.samples["1"].tolist() == [2]
        assert stats.samples["2"].tolist() == []

    def test_geometric_runs(self, rng):
        lengths = rng.geometric(0.1, size=5000)
        stats = dwell_statistics(_runs_log(lengths), fit_tail=False)
        assert stats.pooled().mean() == pytest.approx(10.0, rel=0.05)
        assert np.median(stats.pooled()) == pytest.approx(7.0, abs=1.0)

    def test_record_drops_undefined_values(self):
        stats = DwellStats({"1": np.array([3]), "2": np.array([], dtype=np.int64)}, switches=1)
        record = stats.to_record()
        assert record.means == {"1": 3.0}
        assert record.stderrs == {}
        assert record.counts == {"1": 1, "2": 0}


class TestPowerLaw:
    def test_recovers_exponent_with_fixed_cutoff(self, rng):
        samples = sps.zipf(2.5).rvs(size=5000, random_state=rng)
        fit = fit_power_law(samples, xmin=1)
        assert fit.xmin == 1 and fit.n_tail == 5000
        assert abs(fit.alpha - 2.5) < 4 * fit.sigma
        assert fit.sigma > 0
        assert fit.ci[0] < fit.alpha < fit.ci[1]

    def test_recovers_exponent_with_chosen_cutoff(self, rng):
        samples = sps.zipf(2.2).rvs(size=20_000, random_state=rng)
        fit = fit_power_law(samples, min_tail=500)
        assert fit.n_tail >= 500
        assert abs(fit.alpha - 2.2) < 0.2
        assert 0 <= fit.ks < 0.1

    def test_rejects_bad_samples(self):
        with pytest.raises(ValidationError):
            fit_power_law([0, 1, 2] * 10)
        with pytest.raises(InsufficientDataError):
            fit_power_law([1, 2, 3])

    def test_record_keys(self, rng):
        fit = fit_power_law(sps.zipf(3.0).rvs(size=500, random_state=rng), xmin=1)
        assert set(fit.to_dict()) == {"alpha", "xmin", "n_tail", "ks", "sigma", "ci_low", "ci_high"}


class TestDiffusion:
    def test_lags_are_log_spaced(self):
        lags = log_spaced_lags(1000)
        assert lags[0] == 1 and lags[-1] == 1000
        assert (np.diff(lags) > 0).all()
        with pytest.raises(ValidationError):
            log_spaced_lags(0)

    def test_straight_line_is_ballistic(self):
        z = np.arange(2000, dtype=float) + 0j
        lags = log_spaced_lags(500)
        msd = mean_squared_displacement(z, lags)
        assert np.allclose(msd, lags.astype(float) ** 2)
        assert msd_exponent(lags, msd, 10, 200) == pytest.approx(2.0, abs=1e-9)

    def test_exponent_needs_two_lags(self):
        lags = np.array([1, 2, 4])
        with pytest.raises(InsufficientDataError):
            msd_exponent(lags, np.array([1.0, 2.0, 4.0]), 3, 4)

    def test_ensemble_average(self, rng):
        walks = [np.cumsum(np.exp(2j * np.pi * rng.random(4000))) for _ in range(6)]
        result = diffusion_statistics(walks, [1.0] * 100, fit_tail=False)
        assert result.fit_range == (10, 400)
        assert 0.85 < result.msd_exponent < 1.15
        assert result.runs == 100
        assert result.to_record().tail is None
