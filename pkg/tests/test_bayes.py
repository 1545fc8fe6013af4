"""Tests for distributions, the Bayes operator and variational free energy."""

import numpy as np
import pytest
from scipy.special import logsumexp

from bibkit.core.exceptions import (
    NormalizationError,
    ShapeMismatchError,
    SupportMismatchError,
    UnknownLabelError,
    ValidationError,
    ZeroEvidenceError,
)
from bibkit.inference import (
    Distribution,
    GenerativeModel,
    LikelihoodTable,
    apply_B,
    bayes_update,
    empirical,
    evidence,
    free_energy,
    joint_from,
    tri_stable_model,
)
from bibkit.inference.bayes import read_model, write_model


def _random_instance(rng, n_h, n_d):
    hs = tuple(f"h{i + 1}" for i in range(n_h))
    ds = tuple(f"d{j + 1}" for j in range(n_d))
    prior = Distribution(hs, rng.dirichlet(np.ones(n_h)))
    table = LikelihoodTable(hs, ds, rng.dirichlet(np.ones(n_d), size=n_h))
    return prior, table


class TestDistribution:
    def test_rejects_bad_vectors(self):
        with pytest.raises(NormalizationError):
            Distribution(("a", "b"), [0.6, 0.6])
        with pytest.raises(NormalizationError):
            Distribution(("a", "b"), [1.5, -0.5])
        with pytest.raises(ShapeMismatchError):
            Distribution(("a", "b"), [1.0])
        with pytest.raises(ValidationError):
            Distribution(("a", "a"), [0.5, 0.5])

    def test_normalized_and_uniform(self):
        dist = Distribution.normalized(("a", "b", "c"), [1, 1, 2])
        assert dist.prob("c") == pytest.approx(0.5)
        assert dist.argmax() == "c"
        assert Distribution.uniform(("x", "y")).as_dict() == {"x": 0.5, "y": 0.5}
        with pytest.raises(NormalizationError):
            Distribution.normalized(("a",), [0.0])

    def test_empirical(self):
        dist = empirical(["d1", "d3", "d3", "d1"], ("d1", "d2", "d3"))
        assert dist.probs.tolist() == [0.5, 0.0, 0.5]
        with pytest.raises(UnknownLabelError):
            empirical(["d4"], ("d1", "d2"))
        with pytest.raises(ValidationError):
            empirical([], ("d1",))

    def test_record_round_trip(self):
        dist = Distribution(("a", "b"), [0.25, 0.75])
        assert Distribution.from_record(dist.to_record().model_dump()).equals(dist)


class TestBayesUpdate:
    def test_matches_log_space_oracle(self, rng):
        worst = 0.0
        for _ in range(1000):
            prior, table = _random_instance(rng, int(rng.integers(1, 9)), int(rng.integers(1, 9)))
            d = table.d_labels[int(rng.integers(len(table.d_labels)))]
            posterior = bayes_update(prior, table, d)
            log_joint = np.log(prior.probs) + np.log(table.column(d))
            expected = np.exp(log_joint - logsumexp(log_joint))
            worst = max(worst, float(np.abs(posterior.probs - expected).max()))
        assert worst < 1e-12

    def test_tri_stable_update(self, tri_stable):
        prior, table = tri_stable
        posterior = apply_B(prior, table, "d2")
        assert posterior.labels == prior.labels
        assert posterior.argmax() == "h2"
        assert posterior.prob("h2") == pytest.approx(0.8)
        assert evidence(prior, table, "d2") == pytest.approx(1 / 3)

    def test_zero_evidence(self):
        table = LikelihoodTable(("h1", "h2"), ("d1", "d2"), [[1.0, 0.0], [0.5, 0.5]])
        prior = Distribution(("h1", "h2"), [1.0, 0.0])
        with pytest.raises(ZeroEvidenceError):
            bayes_update(prior, table, "d2")

    def test_unknown_datum(self, tri_stable):
        prior, table = tri_stable
        with pytest.raises(UnknownLabelError):
            bayes_update(prior, table, "d9")

    def test_misaligned_prior(self, tri_stable):
        _, table = tri_stable
        with pytest.raises(ShapeMismatchError):
            bayes_update(Distribution.uniform(("a", "b", "c")), table, "d1")

    def test_likelihood_rows_must_normalize(self):
        with pytest.raises(NormalizationError):
            LikelihoodTable(("h1",), ("d1", "d2"), [[0.7, 0.7]])

    def test_joint_marginals(self, tri_stable):
        prior, table = tri_stable
        joint = joint_from(prior, table)
        assert np.allclose(joint.marginal_h().probs, prior.probs)
        assert joint.prob("h1", "d1") == pytest.approx(0.8 / 3)


class TestFreeEnergy:
    def test_bounds_surprise(self, rng):
        worst = np.inf
        for _ in range(100):
            n_h, n_d = int(rng.integers(2, 7)), int(rng.integers(2, 7))
            prior, table = _random_instance(rng, n_h, n_d)
            d = table.d_labels[int(rng.integers(n_d))]
            for q_probs in rng.dirichlet(np.ones(n_h), size=1000):
                report = free_energy(Distribution(prior.labels, q_probs), table, prior, d)
                worst = min(worst, report.free_energy - report.surprise)
        assert worst >= -1e-12

    def test_perturbed_posterior_raises_the_bound(self, rng):
        for _ in range(100):
            prior, table = _random_instance(rng, 5, 4)
            d = table.d_labels[int(rng.integers(4))]
            posterior = bayes_update(prior, table, d)
            tight = free_energy(posterior, table, prior, d).free_energy
            for eps in (1e-3, 1e-2, 1e-1):
                noise = rng.dirichlet(np.ones(5))
                q = Distribution(prior.labels, (1 - eps) * posterior.probs + eps * noise)
                assert free_energy(q, table, prior, d).free_energy > tight

    def test_tight_at_the_posterior(self, rng):
        prior, table = _random_instance(rng, 5, 4)
        posterior = bayes_update(prior, table, "d3")
        report = free_energy(posterior, table, prior, "d3")
        assert report.free_energy == pytest.approx(report.surprise, abs=1e-12)
        assert report.surprise == pytest.approx(-np.log(evidence(prior, table, "d3")))

    def test_point_mass_has_zero_entropy(self, tri_stable):
        prior, table = tri_stable
        q = Distribution(prior.labels, [1.0, 0.0, 0.0])
        report = free_energy(q, table, prior, "d1")
        assert report.entropy == 0.0
        assert report.energy == pytest.approx(-np.log(0.8 / 3))

    def test_support_mismatch(self):
        table = LikelihoodTable(("h1", "h2"), ("d1", "d2"), [[1.0, 0.0], [0.5, 0.5]])
        prior = Distribution.uniform(("h1", "h2"))
        with pytest.raises(SupportMismatchError):
            free_energy(prior, table, prior, "d2")

    def test_generative_model_tags_eta(self, tri_stable):
        prior, table = tri_stable
        model = GenerativeModel(prior, table, eta="cyclic")
        posterior = model.update("d3")
        assert model.free_energy(posterior, "d3").eta == "cyclic"


def test_model_file_round_trip(tmp_path, tri_stable):
    prior, table = tri_stable
    path = write_model(tmp_path / "model.jsonl", prior, table)
    loaded_prior, loaded_table = read_model(path)
    assert loaded_prior.equals(prior)
    assert loaded_table.equals(table)


def test_tri_stable_rejects_weak_stay():
    with pytest.raises(ValidationError):
        tri_stable_model(stay=0.3)
