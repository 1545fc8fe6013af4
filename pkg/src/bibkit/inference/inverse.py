"""
Inverse-Bayesian operator: threshold relation, rough approximations, likelihood
re-estimation and exploration of new hypotheses.

``build_relation`` keeps the pairs ``(h, d)`` whose joint mass exceeds
``theta`` strictly. For that relation ``R``:

    R(h)       = {d : (h, d) in R}
    R^-1(d)    = {h : (h, d) in R}
    closure(d) = {d' : R^-1(d') contains R^-1(d)}
    lower(d)   = {h : R(h) non-empty and R(h) within closure(d)}
    upper(h)   = R(h)

``upper_hypotheses(d) = {h : R(h) meets closure(d)}`` always contains
``lower(d)``; the gap between the two is the rough boundary of ``d``.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from bibkit.core.exceptions import (
    ExplorationRefusedError,
    ShapeMismatchError,
    UnknownLabelError,
    ValidationError,
)
from bibkit.core.models import (
    ExplorationPolicy,
    IBConfig,
    RelationRecord,
    RoughRecord,
)
from .bayes import Distribution, JointTable, LikelihoodTable

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


@dataclass(frozen=True)
class BinaryRelation:
    """
    Relation ``R`` between hypotheses and data, with the threshold it was built at.

    Attributes:
        h_labels: Hypothesis universe
        d_labels: Data universe
        pairs: Related ``(h, d)`` pairs
        theta: Threshold used by :func:`build_relation`
    """

    h_labels: Tuple[str, ...]
    d_labels: Tuple[str, ...]
    pairs: FrozenSet[Pair]
    theta: float = 0.0

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def is_empty(self) -> bool:
        return not self.pairs

    def related_data(self, h: str) -> FrozenSet[str]:
        return frozenset(d for (hh, d) in self.pairs if hh == h)

    def related_hypotheses(self, d: str) -> FrozenSet[str]:
        return frozenset(h for (h, dd) in self.pairs if dd == d)

    def sorted_pairs(self) -> List[Pair]:
        h_pos = {h: i for i, h in enumerate(self.h_labels)}
        d_pos = {d: i for i, d in enumerate(self.d_labels)}
        return sorted(self.pairs, key=lambda p: (h_pos[p[0]], d_pos[p[1]]))

    def to_record(self) -> RelationRecord:
        return RelationRecord(theta=self.theta, pairs=self.sorted_pairs())


def build_relation(joint: JointTable, theta: float) -> BinaryRelation:
    """Pairs with ``P(d, h) > theta``; an empty relation is legal."""
    if not 0.0 <= theta < 1.0:
        raise ValidationError("theta must lie in [0, 1)", field="theta", value=theta)
    hs, ds = np.nonzero(joint.entries > theta)
    pairs = frozenset((joint.h_labels[i], joint.d_labels[j]) for i, j in zip(hs, ds))
    return BinaryRelation(joint.h_labels, joint.d_labels, pairs, float(theta))


@dataclass(frozen=True)
class RoughApproximation:
    """
    Lower approximation on hypotheses and upper approximation on data.

    Attributes:
        lower: data label -> hypotheses certainly explaining it
        upper: hypothesis label -> data it relates to
        closure: data label -> data whose hypothesis sets contain its own
        upper_hypotheses: data label -> hypotheses possibly explaining it
    """

    lower: Dict[str, FrozenSet[str]]
    upper: Dict[str, FrozenSet[str]]
    closure: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    upper_hypotheses: Dict[str, FrozenSet[str]] = field(default_factory=dict)

    def boundary(self, d: str) -> FrozenSet[str]:
        """Hypotheses that may but need not explain ``d``."""
        return self.upper_hypotheses[d] - self.lower[d]

    def accuracy(self, d: str) -> float:
        """``|lower(d)| / |upper_hypotheses(d)|``, 1.0 when both are empty."""
        upper = self.upper_hypotheses[d]
        return len(self.lower[d]) / len(upper) if upper else 1.0

    def to_record(self) -> RoughRecord:
        return RoughRecord(
            lower={d: sorted(hs) for d, hs in self.lower.items()},
            upper={h: sorted(ds) for h, ds in self.upper.items()},
        )


def rough_approximation(
    rel: BinaryRelation,
    h_labels: Optional[Sequence[str]] = None,
    d_labels: Optional[Sequence[str]] = None,
) -> RoughApproximation:
    hs = tuple(h_labels) if h_labels is not None else rel.h_labels
    ds = tuple(d_labels) if d_labels is not None else rel.d_labels

    r_of_h = {h: rel.related_data(h) for h in hs}
    r_inv = {d: rel.related_hypotheses(d) for d in ds}
    closure = {d: frozenset(e for e in ds if r_inv[e] >= r_inv[d]) for d in ds}

    lower = {
        d: frozenset(h for h in hs if r_of_h[h] and r_of_h[h] <= closure[d]) for d in ds
    }
    upper_hypotheses = {
        d: frozenset(h for h in hs if r_of_h[h] & closure[d]) for d in ds
    }
    return RoughApproximation(
        lower=lower,
        upper=dict(r_of_h),
        closure=closure,
        upper_hypotheses=upper_hypotheses,
    )


def apply_IB(
    likelihood: LikelihoodTable,
    recent_data: Distribution,
    focus_h: str,
    config: IBConfig,
) -> LikelihoodTable:
    """
    Pull the focus row toward the recent empirical data.

    The row of ``focus_h`` becomes ``(1 - gamma) * row + gamma * recent_data``;
    other rows are untouched. ``gamma = 0`` returns ``likelihood`` itself.
    """
    index = likelihood.h_index(focus_h)
    if recent_data.labels != likelihood.d_labels:
        raise ShapeMismatchError(
            "recent data and likelihood disagree on the data set",
            expected=likelihood.d_labels,
            actual=recent_data.labels,
        )
    gamma = config.gamma
    if gamma == 0.0:
        return likelihood
    row = (1.0 - gamma) * likelihood.rows[index] + gamma * recent_data.probs
    rows = likelihood.rows.copy()
    rows[index] = row
    return LikelihoodTable(likelihood.h_labels, likelihood.d_labels, rows)


@dataclass(frozen=True)
class HypothesisSpace:
    """The hypothesis set with its prior and likelihood rows."""

    prior: Distribution
    likelihood: LikelihoodTable

    def __post_init__(self) -> None:
        if self.prior.labels != self.likelihood.h_labels:
            raise ShapeMismatchError(
                "prior and likelihood disagree on the hypothesis set",
                expected=self.likelihood.h_labels,
                actual=self.prior.labels,
            )

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.prior.labels


@dataclass(frozen=True)
class Exploration:
    """Outcome of :func:`explore`."""

    space: HypothesisSpace
    seeded: str
    added: bool


def _fresh_label(existing: Iterable[str]) -> str:
    taken = set(existing)
    k = len(taken) + 1
    while f"h{k}" in taken:
        k += 1
    return f"h{k}"


def explore(
    space: HypothesisSpace,
    relation: BinaryRelation,
    config: IBConfig,
    rng: np.random.Generator,
    recent_data: Distribution,
    focus_h: str,
    zero_evidence: bool = False,
) -> Exploration:
    """
    Re-seed (or add) a hypothesis from the recent data.

    The seeded row is ``(recent + epsilon) / (1 + epsilon * |D|)``. Under
    ReplaceWeakest the minimum-prior hypothesis (ties broken by ``rng``) gets
    the row and prior mass ``1/|H|``; under AddHypothesis a new hypothesis is
    appended with mass ``1/(|H| + 1)``, falling back to ReplaceWeakest once
    ``max_hypotheses`` is reached. The prior is renormalized in both cases.

    Raises:
        ExplorationRefusedError: The focus still relates to some datum and no
            zero-evidence event occurred
    """
    if focus_h not in space.labels:
        raise UnknownLabelError(
            f"unknown hypothesis {focus_h!r}", label=focus_h, known_labels=list(space.labels)
        )
    related = relation.related_data(focus_h)
    if related and not zero_evidence:
        raise ExplorationRefusedError(
            f"hypothesis {focus_h!r} still relates to {sorted(related)}",
            focus=focus_h,
            related=sorted(related),
        )
    if recent_data.labels != space.likelihood.d_labels:
        raise ShapeMismatchError(
            "recent data and likelihood disagree on the data set",
            expected=space.likelihood.d_labels,
            actual=recent_data.labels,
        )

    eps = config.epsilon
    n_data = len(recent_data)
    seeded_row = (recent_data.probs + eps) / (1.0 + eps * n_data)
    probs = space.prior.probs
    n = len(probs)

    add = (
        config.policy is ExplorationPolicy.ADD_HYPOTHESIS and n < config.max_hypotheses
    )
    if add:
        label = _fresh_label(space.labels)
        likelihood = space.likelihood.with_hypothesis(label, seeded_row)
        prior = Distribution.normalized(
            space.labels + (label,), np.append(probs, 1.0 / (n + 1))
        )
    else:
        weakest = np.flatnonzero(probs == probs.min())
        index = int(rng.choice(weakest)) if weakest.size > 1 else int(weakest[0])
        label = space.labels[index]
        likelihood = space.likelihood.with_row(label, seeded_row)
        weights = probs.copy()
        weights[index] = 1.0 / n
        prior = Distribution.normalized(space.labels, weights)

    logger.debug(
        "explore: %s hypothesis %s (focus %s, zero evidence %s)",
        "added" if add else "re-seeded",
        label,
        focus_h,
        zero_evidence,
    )
    return Exploration(HypothesisSpace(prior, likelihood), seeded=label, added=add)
