"""Tests for the interlaced B/IB scheduler and config-driven runs."""

import logging

import numpy as np
import pytest

from bibkit.applications import EventTag
from bibkit.applications.loop import (
    data_stream,
    initial_state,
    resolve_theta,
    run_from_config,
    run_inference,
    step,
)
from bibkit.core.exceptions import UnknownLabelError, ValidationError
from bibkit.core.models import (
    GridSpec,
    IBConfig,
    NewtonSettings,
    PartitionSettings,
    RunConfig,
    ThetaSource,
)
from bibkit.inference import Distribution, LikelihoodTable


def _stream(kind, table, steps, seed, **kwargs):
    return list(data_stream(kind, table, steps, np.random.default_rng(seed), **kwargs))


class TestStep:
    def test_first_step(self, tri_stable, ib_config):
        prior, table = tri_stable
        state = step(initial_state(prior, table, ib_config, seed=1), "d1")
        assert state.t == 1
        assert state.window == ("d1",)
        assert state.prior.equals(prior)
        assert state.map_hypothesis == "h1"
        assert EventTag.B in state.last_events

    def test_unknown_datum(self, tri_stable, ib_config):
        prior, table = tri_stable
        with pytest.raises(UnknownLabelError):
            step(initial_state(prior, table, ib_config), "d7")

    def test_unknown_mode(self, tri_stable, ib_config):
        prior, table = tri_stable
        with pytest.raises(ValidationError):
            initial_state(prior, table, ib_config, mode="frequentist")

    def test_window_keeps_the_latest_data(self, tri_stable):
        prior, table = tri_stable
        state = initial_state(prior, table, IBConfig(window=3), seed=0)
        for d in ("d1", "d2", "d3", "d2"):
            state = step(state, d)
        assert state.window == ("d2", "d3", "d2")

    def test_zero_evidence_explores_then_updates(self):
        table = LikelihoodTable(("h1", "h2"), ("d1", "d2"), [[1.0, 0.0], [0.9, 0.1]])
        prior = Distribution(("h1", "h2"), [1.0, 0.0])
        state = step(initial_state(prior, table, IBConfig(gamma=0.0), seed=0), "d2")
        assert {EventTag.EXPLORE, EventTag.B, EventTag.SWITCH} <= state.last_events
        assert state.map_hypothesis == "h2"
        assert state.likelihood.rows[1, 1] > 0.99

    def test_empty_relation_explores_on_every_step(self, tri_stable):
        prior, table = tri_stable
        state = initial_state(prior, table, IBConfig(theta=0.9), seed=4)
        for datum in ("d1", "d2", "d3", "d1"):
            state = step(state, datum)
            assert EventTag.EXPLORE in state.last_events
            assert not state.relation.related_data(state.map_hypothesis)

    def test_zero_evidence_in_bayes_mode_keeps_belief(self, caplog):
        table = LikelihoodTable(("h1", "h2"), ("d1", "d2"), [[1.0, 0.0], [0.9, 0.1]])
        prior = Distribution(("h1", "h2"), [1.0, 0.0])
        with caplog.at_level(logging.WARNING, logger="bibkit"):
            state = step(initial_state(prior, table, IBConfig(), mode="bayes"), "d2")
        assert state.posterior.equals(prior)
        assert EventTag.B not in state.last_events
        assert any("zero evidence" in r.getMessage() for r in caplog.records)


class TestRuns:
    def test_without_ib_matches_plain_bayes(self, tri_stable):
        prior, table = tri_stable
        data = _stream("ambiguous", table, 3000, 5)
        config = IBConfig(gamma=0.0, theta=0.0)
        bib, bib_log, _ = run_inference(initial_state(prior, table, config, seed=1), data)
        plain, plain_log, _ = run_inference(
            initial_state(prior, table, config, seed=1, mode="bayes"), data
        )
        assert bib.posterior.equals(plain.posterior)
        assert bib.likelihood.equals(plain.likelihood)
        assert bib_log.percepts == plain_log.percepts
        assert bib_log.events == plain_log.events
        assert bib_log.count(EventTag.EXPLORE) == 0

    def test_fixed_seed_is_reproducible(self):
        run = RunConfig(seed=3, steps=2000)
        _, first = run_from_config(run)
        _, second = run_from_config(run)
        assert first.percepts == second.percepts
        assert first.events == second.events

    def test_true_stream_converges(self, tri_stable):
        prior, table = tri_stable
        data = _stream("true", table, 2000, 9, true_hypothesis="h2")
        config = IBConfig(gamma=0.0)
        final, log, _ = run_inference(initial_state(prior, table, config, mode="bayes"), data)
        assert final.map_hypothesis == "h2"
        assert set(log.percepts[-500:]) == {"h2"}
        assert final.posterior.prob("h2") > 1 - 1e-9

    def test_constant_stream_settles_into_bayes(self, tri_stable, ib_config):
        prior, table = tri_stable
        data = _stream("constant", table, 10_000, 0, constant_datum="d1")
        final, log, _ = run_inference(initial_state(prior, table, ib_config, seed=2), data)
        late = log.events[5000:]
        assert late.count(EventTag.B) / len(late) >= 0.99
        assert final.map_hypothesis == "h1"
        assert final.likelihood.rows[0, 0] > 0.99

    def test_ambiguous_stream_triggers_ib_and_exploration(self, tri_stable, ib_config):
        prior, table = tri_stable
        data = _stream("ambiguous", table, 10_000, 7)
        _, log, _ = run_inference(initial_state(prior, table, ib_config, seed=7), data)
        assert log.count(EventTag.IB) > 0
        assert log.count(EventTag.EXPLORE) > 0
        assert log.count(EventTag.SWITCH) > 0

    def test_every_state_stays_normalized(self, tri_stable, ib_config):
        prior, table = tri_stable
        data = _stream("ambiguous", table, 500, 3)
        _, _, states = run_inference(
            initial_state(prior, table, ib_config, seed=3), data, keep_states=True
        )
        assert [s.t for s in states] == list(range(1, 501))
        for s in states:
            assert abs(s.posterior.probs.sum() - 1.0) <= 1e-12
            assert np.abs(s.likelihood.rows.sum(axis=1) - 1.0).max() <= 1e-12
            assert len(s.window) <= ib_config.window

    def test_add_policy_grows_the_space(self, tri_stable):
        prior, table = tri_stable
        config = IBConfig(policy="add_hypothesis", max_hypotheses=5)
        data = _stream("ambiguous", table, 5000, 11)
        final, _, _ = run_inference(initial_state(prior, table, config, seed=11), data)
        assert 3 <= len(final.hypotheses) <= 5


class TestStreams:
    def test_constant_defaults_to_first_datum(self, tri_stable):
        _, table = tri_stable
        assert set(_stream("constant", table, 10, 0)) == {"d1"}

    def test_unknown_stream(self, tri_stable):
        _, table = tri_stable
        with pytest.raises(ValidationError):
            _stream("adversarial", table, 10, 0)


class TestTheta:
    def test_fixed_theta(self):
        assert resolve_theta(IBConfig(theta=0.2)) == 0.2

    def test_partition_theta(self):
        newton = NewtonSettings(grid=GridSpec(nx=64, ny=64))
        theta = resolve_theta(
            IBConfig(theta_source=ThetaSource.PARTITION),
            newton,
            PartitionSettings(dilation_radius=1),
        )
        assert 0.0 < theta < 1.0

    def test_unusable_partition(self):
        newton = NewtonSettings(grid=GridSpec(nx=16, ny=16))
        with pytest.raises(ValidationError):
            resolve_theta(
                IBConfig(theta_source=ThetaSource.PARTITION),
                newton,
                PartitionSettings(dilation_radius=30),
            )
