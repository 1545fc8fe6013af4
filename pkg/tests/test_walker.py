"""Tests for the event-steered walker and its control walks."""

import numpy as np
import pytest

from bibkit.applications import EventTag, TrajectoryLog, walker
from bibkit.applications.walker import (
    run_control_walk,
    run_walker,
    straight_runs,
    turns_from_log,
    walk_statistics,
)
from bibkit.core.exceptions import InsufficientDataError, ValidationError
from bibkit.core.models import IBConfig, RunConfig, ThetaSource


def test_straight_runs_drop_the_trailing_run():
    turns = np.array([False, False, True, False, True, False])
    assert straight_runs(turns).tolist() == [2.0, 2.0]
    assert straight_runs(np.zeros(5, dtype=bool)).size == 0


def test_turns_follow_switch_and_explore():
    events = [EventTag.SWITCH, EventTag.B, EventTag.EXPLORE, EventTag.IB, EventTag.SWITCH]
    log = TrajectoryLog.from_arrays(range(1, 6), ["h1"] * 5, events)
    assert turns_from_log(log).tolist() == [False, False, True, False, True]


def test_memoryless_control_is_diffusive():
    _, stats = run_control_walk("memoryless", steps=10_000, seed=0, ensemble=8, workers=2)
    assert 0.9 <= stats.msd_exponent <= 1.1
    assert stats.tail is None


def test_ballistic_control():
    log, stats = run_control_walk("ballistic", steps=5000, seed=1)
    assert 1.9 <= stats.msd_exponent <= 2.0 + 1e-9
    assert stats.runs == 0
    assert log.count(EventTag.SWITCH) == 0
    assert abs(abs(log.positions()[-1]) - 5000) < 1e-6


def test_control_ensemble_is_reproducible():
    serial = run_control_walk("memoryless", steps=2000, seed=3, ensemble=4)[1]
    threaded = run_control_walk("memoryless", steps=2000, seed=3, ensemble=4, workers=4)[1]
    assert np.array_equal(serial.msd, threaded.msd)


def test_control_validation():
    with pytest.raises(ValidationError):
        run_control_walk("levy", steps=100, seed=0)
    with pytest.raises(ValidationError):
        run_control_walk("memoryless", steps=100, seed=0, ensemble=0)


def test_walker_without_turns_is_rejected():
    run = RunConfig(stream="constant", steps=2000)
    with pytest.raises(InsufficientDataError):
        run_walker(run)


def test_walker_log_carries_positions():
    run = RunConfig(seed=5, steps=4000)
    log, stats = run_walker(run, strict=False)
    assert log.has_positions
    assert len(log) == 4000
    steps = np.abs(np.diff(log.positions()))
    assert np.allclose(steps, 1.0)
    assert stats.runs == int(turns_from_log(log).sum())


def test_walker_is_reproducible():
    run = RunConfig(seed=8, steps=1500)
    first, _ = run_walker(run, strict=False)
    second, _ = run_walker(run, strict=False)
    assert np.array_equal(first.positions(), second.positions())


def test_walker_uses_the_partition_theta(monkeypatch):
    calls = []

    def derived(config):
        calls.append(config.theta_source)
        return 0.2

    monkeypatch.setattr(walker, "resolve_theta", derived)
    run = RunConfig(seed=6, steps=2000, ib=IBConfig(theta_source=ThetaSource.PARTITION))
    resolved, _ = run_walker(run, strict=False)
    explicit, _ = run_walker(run, strict=False, theta=0.2)
    assert calls == [ThetaSource.PARTITION]
    assert resolved.events == explicit.events
    assert np.array_equal(resolved.positions(), explicit.positions())


def test_stored_logs_reproduce_control_statistics(tmp_path):
    logs = []
    for seed in range(3):
        log, _ = run_control_walk("memoryless", steps=3000, seed=seed)
        logs.append(TrajectoryLog.from_csv(log.to_csv(tmp_path / f"walk{seed}.csv")))
    stats = walk_statistics(logs, fit_tail=False)
    assert 0.8 < stats.msd_exponent < 1.2


def test_walk_statistics_need_positions():
    log = TrajectoryLog.from_arrays([1, 2], ["h1", "h2"], [EventTag.B, EventTag.SWITCH])
    with pytest.raises(InsufficientDataError):
        walk_statistics([log])


@pytest.mark.slow
def test_bib_walker_is_superdiffusive():
    run = RunConfig(seed=21, steps=100_000, ib=IBConfig(gamma=0.01, theta=0.36))
    _, bib = run_walker(run)
    _, memoryless = run_control_walk("memoryless", steps=100_000, seed=21)
    assert bib.msd_exponent > memoryless.msd_exponent + 0.15
