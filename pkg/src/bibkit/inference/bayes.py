#!/usr/bin/env python3
"""
bibkit Bayes Engine - Finite distributions, Bayesian updates and free energy.

Key Components:
    - :class:`Distribution`: labeled probability vector, normalization enforced
    - :class:`LikelihoodTable`: ``P(d|h)`` with one row per hypothesis
    - :class:`JointTable`: ``P(d,h)`` stored as ``entries[h, d]``
    - :func:`bayes_update` / :func:`apply_B`: ``P(h|d) = P(d|h)P(h) / P(d)``
    - :func:`free_energy`: ``F(q) = energy - entropy`` with
      ``energy = -sum q ln P(d,h)`` and ``entropy = -sum q ln q``

Hypothesis space is ``H`` (the internal states of the variational picture),
data space is ``D`` (the sensory states). All logarithms are natural, so
energies are in nats.

Every operation that returns a distribution re-validates it: probabilities
are non-negative and sum to one within ``1e-12``.

Example Usage:
    >>> prior = Distribution(("h1", "h2"), (0.5, 0.5))
    >>> table = LikelihoodTable(("h1", "h2"), ("d1", "d2"), [[0.8, 0.2], [0.2, 0.8]])
    >>> bayes_update(prior, table, "d1").probs
    array([0.8, 0.2])
    >>> report = free_energy(prior, table, prior, "d1")
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr, xlogy

from bibkit.core.exceptions import (
    ConfigurationError,
    NormalizationError,
    ShapeMismatchError,
    SupportMismatchError,
    UnknownLabelError,
    ValidationError,
    ZeroEvidenceError,
)
from bibkit.core.models import DistributionRecord, TableRecord
from bibkit.core.storage import read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12


def _check_labels(labels: Sequence[str], field: str) -> Tuple[str, ...]:
    labels = tuple(str(label) for label in labels)
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{field} must be unique", field=field, value=list(labels))
    return labels


def _label_index(labels: Tuple[str, ...], label: str, kind: str) -> int:
    try:
        return labels.index(label)
    except ValueError:
        raise UnknownLabelError(
            f"unknown {kind} label {label!r}", label=label, known_labels=list(labels)
        )


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    A finite probability vector over labeled outcomes.

    Attributes:
        labels: Unique outcome labels
        probs: Non-negative probabilities summing to one
    """

    labels: Tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        labels = _check_labels(self.labels, "labels")
        probs = np.array(self.probs, dtype=float)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (len(labels),):
            raise ShapeMismatchError(
                "probs and labels differ in length",
                expected=(len(labels),),
                actual=probs.shape,
            )
        total = float(probs.sum())
        if (probs < 0).any() or not abs(total - 1.0) <= NORMALIZATION_TOLERANCE:
            raise NormalizationError(
                f"probabilities must be non-negative and sum to 1 (sum={total!r})",
                total=total,
            )

    @classmethod
    def normalized(cls, labels: Sequence[str], weights: Iterable[float]) -> "Distribution":
        """Normalize non-negative weights; an all-zero vector is an error."""
        w = np.asarray(list(weights), dtype=float)
        total = w.sum()
        if (w < 0).any() or total <= 0:
            raise NormalizationError("weights must be non-negative with a positive sum", total=float(total))
        return cls(tuple(labels), w / total)

    @classmethod
    def uniform(cls, labels: Sequence[str]) -> "Distribution":
        n = len(labels)
        return cls(tuple(labels), np.full(n, 1.0 / n))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return _label_index(self.labels, label, "outcome")

    def prob(self, label: str) -> float:
        return float(self.probs[self.index(label)])

    def argmax(self) -> str:
        """Label of the most probable outcome (first one on ties)."""
        return self.labels[int(np.argmax(self.probs))]

    def as_dict(self) -> Dict[str, float]:
        return {label: float(p) for label, p in zip(self.labels, self.probs)}

    def equals(self, other: "Distribution") -> bool:
        """Bit-for-bit equality of labels and probabilities."""
        return self.labels == other.labels and np.array_equal(self.probs, other.probs)

    def to_record(self) -> DistributionRecord:
        return DistributionRecord(labels=list(self.labels), probs=self.probs.tolist())

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "Distribution":
        parsed = DistributionRecord.model_validate(record)
        return cls(tuple(parsed.labels), np.asarray(parsed.probs))


def empirical(data: Sequence[str], labels: Sequence[str]) -> Distribution:
    """Empirical distribution of ``data`` over ``labels``."""
    labels = tuple(labels)
    if not data:
        raise ValidationError("empirical distribution of an empty sample", field="data")
    counts = np.zeros(len(labels))
    for datum in data:
        counts[_label_index(labels, datum, "data")] += 1
    return Distribution(labels, counts / counts.sum())


@dataclass(frozen=True, eq=False)
class LikelihoodTable:
    """
    Conditional probabilities ``P(d|h)``; ``rows[i]`` is a distribution over D.

    Attributes:
        h_labels: Hypothesis labels (rows)
        d_labels: Data labels (columns)
        rows: ``(|H|, |D|)`` array
    """

    h_labels: Tuple[str, ...]
    d_labels: Tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        h = _check_labels(self.h_labels, "h_labels")
        d = _check_labels(self.d_labels, "d_labels")
        rows = np.array(self.rows, dtype=float)
        object.__setattr__(self, "h_labels", h)
        object.__setattr__(self, "d_labels", d)
        object.__setattr__(self, "rows", rows)
        if rows.shape != (len(h), len(d)):
            raise ShapeMismatchError(
                "likelihood rows do not match the label sets",
                expected=(len(h), len(d)),
                actual=rows.shape,
            )
        sums = rows.sum(axis=1)
        if (rows < 0).any() or not np.abs(sums - 1.0).max() <= NORMALIZATION_TOLERANCE:
            raise NormalizationError(
                "every likelihood row must be a distribution over D",
                total=float(np.abs(sums - 1.0).max()),
            )

    def h_index(self, label: str) -> int:
        return _label_index(self.h_labels, label, "hypothesis")

    def d_index(self, label: str) -> int:
        return _label_index(self.d_labels, label, "data")

    def row(self, h: str) -> Distribution:
        return Distribution(self.d_labels, self.rows[self.h_index(h)])

    def column(self, d: str) -> np.ndarray:
        return self.rows[:, self.d_index(d)].copy()

    def with_row(self, h: str, row: np.ndarray) -> "LikelihoodTable":
        rows = self.rows.copy()
        rows[self.h_index(h)] = row
        return LikelihoodTable(self.h_labels, self.d_labels, rows)

    def with_hypothesis(self, h: str, row: np.ndarray) -> "LikelihoodTable":
        return LikelihoodTable(
            self.h_labels + (h,), self.d_labels, np.vstack([self.rows, row])
        )

    def permuted(self, order: Sequence[int]) -> "LikelihoodTable":
        """Reorder hypotheses (rows) by index."""
        return LikelihoodTable(
            tuple(self.h_labels[i] for i in order), self.d_labels, self.rows[list(order)]
        )

    def equals(self, other: "LikelihoodTable") -> bool:
        return (
            self.h_labels == other.h_labels
            and self.d_labels == other.d_labels
            and np.array_equal(self.rows, other.rows)
        )

    def to_record(self) -> TableRecord:
        return TableRecord(
            h_labels=list(self.h_labels), d_labels=list(self.d_labels), rows=self.rows.tolist()
        )

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "LikelihoodTable":
        parsed = TableRecord.model_validate(record)
        return cls(tuple(parsed.h_labels), tuple(parsed.d_labels), np.asarray(parsed.rows))


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint probabilities ``P(d,h)`` stored as ``entries[h, d]``; total mass one."""

    h_labels: Tuple[str, ...]
    d_labels: Tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self) -> None:
        h = _check_labels(self.h_labels, "h_labels")
        d = _check_labels(self.d_labels, "d_labels")
        entries = np.array(self.entries, dtype=float)
        object.__setattr__(self, "h_labels", h)
        object.__setattr__(self, "d_labels", d)
        object.__setattr__(self, "entries", entries)
        if entries.shape != (len(h), len(d)):
            raise ShapeMismatchError(
                "joint entries do not match the label sets",
                expected=(len(h), len(d)),
                actual=entries.shape,
            )
        total = float(entries.sum())
        if (entries < 0).any() or not abs(total - 1.0) <= NORMALIZATION_TOLERANCE:
            raise NormalizationError("joint table must sum to 1", total=total)

    def prob(self, h: str, d: str) -> float:
        return float(
            self.entries[
                _label_index(self.h_labels, h, "hypothesis"),
                _label_index(self.d_labels, d, "data"),
            ]
        )

    def marginal_d(self) -> Distribution:
        return Distribution(self.d_labels, self.entries.sum(axis=0))

    def marginal_h(self) -> Distribution:
        return Distribution(self.h_labels, self.entries.sum(axis=1))


@dataclass(frozen=True)
class FreeEnergyReport:
    """
    Variational free energy of ``q`` for one observed datum, in nats.

    ``free_energy = energy - entropy >= -ln(evidence)`` with equality exactly
    at the Bayes posterior. ``eta`` tags the generative-model variant.
    """

    energy: float
    entropy: float
    free_energy: float
    surprise: float
    eta: Optional[str] = None

    @property
    def bound_gap(self) -> float:
        """``F - surprise``; the KL divergence from q to the posterior."""
        return self.free_energy - self.surprise


@dataclass(frozen=True)
class GenerativeModel:
    """A prior and likelihood bundled under an external-state tag ``eta``."""

    prior: Distribution
    likelihood: LikelihoodTable
    eta: str = "default"

    def update(self, observed: str) -> Distribution:
        return bayes_update(self.prior, self.likelihood, observed)

    def free_energy(self, q: Distribution, observed: str) -> FreeEnergyReport:
        return free_energy(q, self.likelihood, self.prior, observed, eta=self.eta)


def _check_aligned(prior: Distribution, likelihood: LikelihoodTable) -> None:
    if prior.labels != likelihood.h_labels:
        raise ShapeMismatchError(
            "prior and likelihood disagree on the hypothesis set",
            expected=likelihood.h_labels,
            actual=prior.labels,
        )


def joint_column(prior: Distribution, likelihood: LikelihoodTable, observed: str) -> np.ndarray:
    """``P(observed|h) P(h)`` for every hypothesis."""
    _check_aligned(prior, likelihood)
    return likelihood.rows[:, likelihood.d_index(observed)] * prior.probs


def evidence(prior: Distribution, likelihood: LikelihoodTable, observed: str) -> float:
    """``P(observed) = sum_k P(observed|h_k) P(h_k)``."""
    return float(joint_column(prior, likelihood, observed).sum())


def bayes_update(
    prior: Distribution, likelihood: LikelihoodTable, observed: str
) -> Distribution:
    """
    Posterior ``P(h|observed)``.

    Raises:
        UnknownLabelError: ``observed`` is not in D
        ShapeMismatchError: Prior and likelihood disagree on H
        ZeroEvidenceError: ``observed`` is impossible under every supported hypothesis
    """
    weights = joint_column(prior, likelihood, observed)
    total = weights.sum()
    if not total > 0:
        raise ZeroEvidenceError(
            f"datum {observed!r} has zero probability under the prior", datum=observed
        )
    return Distribution(prior.labels, weights / total)


def apply_B(prior: Distribution, likelihood: LikelihoodTable, observed: str) -> Distribution:
    """The Bayesian operator B: the posterior becomes the next prior."""
    return bayes_update(prior, likelihood, observed)


def free_energy(
    q: Distribution,
    likelihood: LikelihoodTable,
    prior: Distribution,
    observed: str,
    eta: Optional[str] = None,
) -> FreeEnergyReport:
    """
    ``F(q) = -<ln P(observed, h)>_q + <ln q(h)>_q``.

    Hypotheses with ``q(h) = 0`` contribute nothing. A hypothesis with
    ``q(h) > 0`` but zero joint mass makes ``F`` infinite and raises
    ``SupportMismatchError``.
    """
    if q.labels != prior.labels:
        raise ShapeMismatchError(
            "q and prior disagree on the hypothesis set",
            expected=prior.labels,
            actual=q.labels,
        )
    joint = joint_column(prior, likelihood, observed)
    outside = (q.probs > 0) & (joint <= 0)
    if outside.any():
        raise SupportMismatchError(
            "q places mass outside the support of the joint",
            hypotheses=[q.labels[i] for i in np.flatnonzero(outside)],
        )
    total = joint.sum()
    if not total > 0:
        raise ZeroEvidenceError(
            f"datum {observed!r} has zero probability under the prior", datum=observed
        )

    energy = float(-xlogy(q.probs, joint).sum())
    entropy = float(entr(q.probs).sum())
    return FreeEnergyReport(
        energy=energy,
        entropy=entropy,
        free_energy=energy - entropy,
        surprise=float(-np.log(total)),
        eta=eta,
    )


def joint_from(prior: Distribution, likelihood: LikelihoodTable) -> JointTable:
    """``P(d,h) = P(d|h) P(h)``."""
    _check_aligned(prior, likelihood)
    return JointTable(
        prior.labels, likelihood.d_labels, prior.probs[:, None] * likelihood.rows
    )


def tri_stable_model(stay: float = 0.8) -> Tuple[Distribution, LikelihoodTable]:
    """
    Three hypotheses over three data with cyclically shifted likelihood rows.

    Row ``h_k`` puts ``stay`` on ``d_k`` and splits the rest evenly, so no
    datum favours a hypothesis on average under a uniform data stream.
    """
    if not 1.0 / 3.0 < stay < 1.0:
        raise ValidationError("stay must lie in (1/3, 1)", field="stay", value=stay)
    off = (1.0 - stay) / 2.0
    base = np.array([stay, off, off])
    rows = np.vstack([np.roll(base, k) for k in range(3)])
    h = ("h1", "h2", "h3")
    d = ("d1", "d2", "d3")
    return Distribution.uniform(h), LikelihoodTable(h, d, rows)


def read_model(path: Path) -> Tuple[Distribution, LikelihoodTable]:
    """Read a prior record and a likelihood record from a JSON-lines file."""
    prior: Optional[Distribution] = None
    table: Optional[LikelihoodTable] = None
    for record in read_jsonl(path):
        if "rows" in record:
            table = LikelihoodTable.from_record(record)
        elif "probs" in record:
            prior = Distribution.from_record(record)
    if table is None:
        raise ConfigurationError(f"{path} holds no likelihood table record", config_type="tables")
    if prior is None:
        prior = Distribution.uniform(table.h_labels)
    _check_aligned(prior, table)
    return prior, table


def write_model(path: Path, prior: Distribution, likelihood: LikelihoodTable) -> Path:
    records: List[Any] = [prior.to_record(), likelihood.to_record()]
    return write_jsonl(path, records)
