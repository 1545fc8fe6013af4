"""Tests for trajectory logs and event precedence."""

import numpy as np
import pytest

from bibkit.applications import PRECEDENCE, EventTag, TrajectoryLog, dominant_event
from bibkit.core.exceptions import ConfigurationError, ValidationError


def test_dominant_event_follows_precedence():
    assert dominant_event({EventTag.B, EventTag.IB}) is EventTag.IB
    assert dominant_event({EventTag.B, EventTag.SWITCH, EventTag.EXPLORE}) is EventTag.EXPLORE
    assert dominant_event([]) is EventTag.B
    assert PRECEDENCE[0] is EventTag.EXPLORE


def test_append_keeps_every_event():
    log = TrajectoryLog()
    log.append(1, "h1", {EventTag.B})
    log.append(2, "h2", {EventTag.B, EventTag.IB, EventTag.SWITCH})
    assert log.events == [EventTag.B, EventTag.SWITCH]
    assert log.count(EventTag.B) == 2
    assert log.count(EventTag.IB) == 1
    assert log.tags() == {EventTag.B: 1, EventTag.SWITCH: 1}
    assert not log.has_positions


def test_times_must_increase():
    log = TrajectoryLog()
    log.append(3, "h1", {EventTag.B})
    with pytest.raises(ValidationError):
        log.append(3, "h1", {EventTag.B})
    with pytest.raises(ValidationError):
        TrajectoryLog.from_arrays([1, 3, 2], ["a", "b", "c"], [EventTag.B] * 3)


def test_csv_round_trip(tmp_path):
    positions = np.array([0.5 + 0.25j, 1.5 - 2.0j, -3.0 + 0.0j])
    log = TrajectoryLog.from_arrays(
        [1, 2, 5], ["1", "2", "2"], [EventTag.B, EventTag.SWITCH, EventTag.IB], positions
    )
    loaded = TrajectoryLog.from_csv(log.to_csv(tmp_path / "logs" / "run.csv"))
    assert loaded.times == [1, 2, 5]
    assert loaded.percepts == ["1", "2", "2"]
    assert loaded.events == log.events
    assert np.allclose(loaded.positions(), positions)


def test_csv_keeps_far_positions_exact(tmp_path):
    rng = np.random.default_rng(8)
    n = 50
    positions = np.cumsum(rng.normal(size=n) + 1j * rng.normal(size=n)) * 1e5 + (
        123456.789 - 98765.4321j
    )
    log = TrajectoryLog.from_arrays(range(1, n + 1), ["h1"] * n, [EventTag.B] * n, positions)
    loaded = TrajectoryLog.from_csv(log.to_csv(tmp_path / "far.csv"))
    assert np.array_equal(loaded.positions(), positions)


def test_csv_without_positions(tmp_path):
    log = TrajectoryLog()
    log.append(1, "h1", {EventTag.B})
    loaded = TrajectoryLog.from_csv(log.to_csv(tmp_path / "plain.csv"))
    assert not loaded.has_positions


def test_bad_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,percept\n1,h1\n")
    with pytest.raises(ConfigurationError):
        TrajectoryLog.from_csv(path)
    path.write_text("t,percept,event\n1,h1,JUMP\n")
    with pytest.raises(ConfigurationError):
        TrajectoryLog.from_csv(path)
