"""
The interlaced Bayesian / inverse-Bayesian scheduler.

One call to :func:`step` consumes one datum:

1. B: the posterior of the previous step becomes the prior and is updated.
2. The joint table is thresholded into a relation at the current ``theta``.
3. IB: the likelihood row of the MAP hypothesis is pulled toward the recent
   empirical data distribution.
4. Explore: whenever the MAP hypothesis has no related datum (or the datum
   had zero evidence) a hypothesis is re-seeded from the recent data.

Zero evidence always explores and then retries B on the new hypothesis space.

Example:
    >>> prior, table = tri_stable_model()
    >>> state = initial_state(prior, table, IBConfig(), seed=7)
    >>> state = step(state, "d1")
    >>> state.t
    1
"""

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import FrozenSet, Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np

from bibkit.core.exceptions import (
    DynamicsError,
    UnknownLabelError,
    ValidationError,
    ZeroEvidenceError,
)
from bibkit.core.models import (
    IBConfig,
    NewtonSettings,
    PartitionSettings,
    RunConfig,
    ThetaSource,
)
from bibkit.inference.bayes import (
    Distribution,
    LikelihoodTable,
    apply_B,
    empirical,
    joint_from,
    read_model,
    tri_stable_model,
)
from bibkit.inference.inverse import (
    BinaryRelation,
    HypothesisSpace,
    apply_IB,
    build_relation,
    explore,
)
from .trajectory import EventTag, TrajectoryLog

logger = logging.getLogger(__name__)

Mode = Literal["bayes", "bib"]


@dataclass(frozen=True, eq=False)
class BIBState:
    """
    Snapshot of the loop after ``t`` steps.

    ``rng`` is shared by every state of one run; stepping an old state again
    draws from the same stream, so replays should start from
    :func:`initial_state`.

    Attributes:
        prior: Belief before the last datum
        likelihood: Current likelihood table
        posterior: Belief after the last datum
        relation: Relation built from the posterior and likelihood
        window: The last ``config.window`` data, oldest first
        rng: Generator used for exploration tie-breaks
        theta: Relation threshold
        config: Loop parameters
        mode: ``"bib"`` or ``"bayes"`` (B only)
        t: Steps taken
        last_events: Events of the last step
    """

    prior: Distribution
    likelihood: LikelihoodTable
    posterior: Distribution
    relation: BinaryRelation
    window: Tuple[str, ...]
    rng: np.random.Generator
    theta: float
    config: IBConfig
    mode: Mode = "bib"
    t: int = 0
    last_events: FrozenSet[EventTag] = frozenset()

    @property
    def hypotheses(self) -> Tuple[str, ...]:
        return self.posterior.labels

    @property
    def data_labels(self) -> Tuple[str, ...]:
        return self.likelihood.d_labels

    @property
    def map_hypothesis(self) -> str:
        return self.posterior.argmax()


def initial_state(
    prior: Distribution,
    likelihood: LikelihoodTable,
    config: IBConfig,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    theta: Optional[float] = None,
    mode: Mode = "bib",
) -> BIBState:
    """
    State at ``t = 0``; the posterior equals the prior.

    ``theta`` overrides ``config.theta`` (used for partition-derived thresholds).
    """
    if mode not in ("bayes", "bib"):
        raise ValidationError(f"unknown mode {mode!r}", field="mode", value=mode)
    if rng is None:
        rng = np.random.default_rng(seed)
    theta = config.theta if theta is None else float(theta)
    relation = build_relation(joint_from(prior, likelihood), theta)
    return BIBState(
        prior=prior,
        likelihood=likelihood,
        posterior=prior,
        relation=relation,
        window=(),
        rng=rng,
        theta=theta,
        config=config,
        mode=mode,
    )


def step(state: BIBState, datum: str) -> BIBState:
    """
    Advance the loop by one datum.

    Raises:
        UnknownLabelError: ``datum`` is not a data label
    """
    if datum not in state.data_labels:
        raise UnknownLabelError(
            f"unknown datum {datum!r}", label=datum, known_labels=list(state.data_labels)
        )
    config = state.config
    window = deque(state.window, maxlen=config.window)
    window.append(datum)
    recent = empirical(list(window), state.data_labels)

    prior = state.posterior
    likelihood = state.likelihood
    previous_map = prior.argmax()
    events = {EventTag.B}

    zero_evidence = False
    try:
        posterior = apply_B(prior, likelihood, datum)
    except ZeroEvidenceError:
        zero_evidence = True
        posterior = prior

    if state.mode == "bayes":
        if zero_evidence:
            logger.warning("t=%d: datum %s has zero evidence; belief kept", state.t, datum)
            events.discard(EventTag.B)
        if posterior.argmax() != previous_map:
            events.add(EventTag.SWITCH)
        relation = build_relation(joint_from(posterior, likelihood), state.theta)
        return replace(
            state,
            prior=prior,
            posterior=posterior,
            relation=relation,
            window=tuple(window),
            t=state.t + 1,
            last_events=frozenset(events),
        )

    if zero_evidence:
        events.discard(EventTag.B)
    relation = build_relation(joint_from(posterior, likelihood), state.theta)
    focus = posterior.argmax()

    updated = apply_IB(likelihood, recent, focus, config)
    if updated is not likelihood:
        moved = np.abs(updated.rows[updated.h_index(focus)] - likelihood.rows[likelihood.h_index(focus)])
        if moved.max() > config.ib_tolerance:
            events.add(EventTag.IB)
        likelihood = updated

    relation_empty = not relation.related_data(focus)
    if zero_evidence or relation_empty:
        outcome = explore(
            HypothesisSpace(posterior, likelihood),
            relation,
            config,
            state.rng,
            recent,
            focus,
            zero_evidence=zero_evidence,
        )
        events.add(EventTag.EXPLORE)
        posterior, likelihood = outcome.space.prior, outcome.space.likelihood
        if zero_evidence:
            posterior = apply_B(posterior, likelihood, datum)
            events.add(EventTag.B)
        logger.debug("t=%d: explored, seeded %s", state.t, outcome.seeded)

    relation = build_relation(joint_from(posterior, likelihood), state.theta)
    if posterior.argmax() != previous_map:
        events.add(EventTag.SWITCH)

    return BIBState(
        prior=prior,
        likelihood=likelihood,
        posterior=posterior,
        relation=relation,
        window=tuple(window),
        rng=state.rng,
        theta=state.theta,
        config=config,
        mode=state.mode,
        t=state.t + 1,
        last_events=frozenset(events),
    )


def run_inference(
    state: BIBState,
    data: Sequence[str],
    keep_states: bool = False,
) -> Tuple[BIBState, TrajectoryLog, List[BIBState]]:
    """
    Feed ``data`` through :func:`step`, logging the MAP hypothesis per step.

    Returns:
        The final state, the log and (when ``keep_states``) every intermediate state
    """
    log = TrajectoryLog()
    states: List[BIBState] = []
    for datum in data:
        state = step(state, datum)
        log.append(state.t, state.map_hypothesis, state.last_events)
        if keep_states:
            states.append(state)
    logger.info(
        "ran %d steps (%s): %s",
        len(log),
        state.mode,
        {tag.value: log.count(tag) for tag in EventTag},
    )
    return state, log, states


def data_stream(
    kind: str,
    likelihood: LikelihoodTable,
    steps: int,
    rng: np.random.Generator,
    true_hypothesis: Optional[str] = None,
    constant_datum: Optional[str] = None,
) -> Iterator[str]:
    """
    Canned data streams.

    ``true`` samples from the likelihood row of ``true_hypothesis`` (first
    hypothesis by default), ``ambiguous`` draws uniformly over all data and
    ``constant`` repeats ``constant_datum`` (first datum by default).
    """
    labels = likelihood.d_labels
    if kind == "true":
        h = true_hypothesis or likelihood.h_labels[0]
        p = likelihood.rows[likelihood.h_index(h)]
        picks = rng.choice(len(labels), size=steps, p=p)
    elif kind == "ambiguous":
        picks = rng.integers(len(labels), size=steps)
    elif kind == "constant":
        d = constant_datum or labels[0]
        picks = np.full(steps, likelihood.d_index(d))
    else:
        raise ValidationError(f"unknown stream {kind!r}", field="stream", value=kind)
    return (labels[i] for i in picks)


def partition_theta(
    newton: NewtonSettings, partition: PartitionSettings
) -> float:
    """Threshold taken from the uncertain shell of the configured basin."""
    from bibkit.dynamics import build_partition, extract_boundary, label_grid
    from bibkit.dynamics.newton import PolynomialMap

    poly = PolynomialMap(tuple(newton.coefficients), floor_scale=newton.derivative_floor)
    grid = label_grid(
        poly,
        newton.grid,
        max_iters=newton.max_iters,
        convergence_radius=newton.convergence_radius,
        workers=newton.workers,
    )
    part = build_partition(
        grid, extract_boundary(grid), partition.basin, partition.dilation_radius
    )
    logger.info("partition theta %.6f (basin %d)", part.theta, partition.basin)
    return part.theta


def resolve_theta(
    config: IBConfig,
    newton: Optional[NewtonSettings] = None,
    partition: Optional[PartitionSettings] = None,
) -> float:
    if config.theta_source is ThetaSource.FIXED:
        return config.theta
    try:
        return partition_theta(newton or NewtonSettings(), partition or PartitionSettings())
    except DynamicsError as e:
        raise ValidationError(
            f"cannot derive theta from the partition: {e.message}", field="theta_source"
        ) from e


def run_from_config(
    run: RunConfig,
    model: Optional[Tuple[Distribution, LikelihoodTable]] = None,
    theta: Optional[float] = None,
) -> Tuple[BIBState, TrajectoryLog]:
    """
    Execute a parsed run file.

    The data stream and the exploration tie-breaks use independent child
    streams of ``run.seed``. Without ``theta`` the threshold is resolved from
    ``run.ib``.
    """
    if model is None:
        model = read_model(run.tables) if run.tables else tri_stable_model()
    prior, likelihood = model
    data_seq, loop_seq = np.random.SeedSequence(run.seed).spawn(2)
    if theta is None:
        theta = resolve_theta(run.ib)
    data = data_stream(
        run.stream,
        likelihood,
        run.steps,
        np.random.default_rng(data_seq),
        run.true_hypothesis,
        run.constant_datum,
    )
    state = initial_state(
        prior,
        likelihood,
        run.ib,
        rng=np.random.default_rng(loop_seq),
        theta=theta,
        mode=run.mode,
    )
    final, log, _ = run_inference(state, data)
    return final, log
