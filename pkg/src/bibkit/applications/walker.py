"""
A 2-D walker steered by inference events.

The walker moves one unit per step. Its heading is kept while the MAP
hypothesis persists and is redrawn uniformly on the circle at every SWITCH or
EXPLORE event, so straight-run lengths are MAP dwell times. Two controls
bracket its behaviour: a memoryless walker that turns every step and a
ballistic walker that never turns.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from bibkit.core.exceptions import InsufficientDataError, ValidationError
from bibkit.core.models import RunConfig
from bibkit.inference.bayes import Distribution, LikelihoodTable, read_model, tri_stable_model
from .loop import data_stream, initial_state, resolve_theta, run_inference
from .statistics import DiffusionStats, diffusion_statistics
from .trajectory import EventTag, TrajectoryLog

logger = logging.getLogger(__name__)

TURN_EVENTS = frozenset({EventTag.SWITCH, EventTag.EXPLORE})
MIN_RUNS = 30


def _walk(turns: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Positions of a unit-speed walk that redraws its heading where ``turns`` is set."""
    run_id = np.cumsum(turns)
    headings = rng.uniform(0.0, 2.0 * np.pi, size=int(run_id[-1]) + 1)[run_id]
    positions = np.cumsum(np.exp(1j * headings))
    return positions, run_id


def straight_runs(turns: np.ndarray) -> np.ndarray:
    """Completed straight-run lengths; the trailing run is censored and dropped."""
    run_id = np.cumsum(np.asarray(turns, dtype=bool))
    return np.bincount(run_id)[:-1].astype(float)


def turns_from_log(log: TrajectoryLog) -> np.ndarray:
    turns = np.array([e in TURN_EVENTS for e in log.events], dtype=bool)
    if turns.size:
        turns[0] = False
    return turns


def run_walker(
    run: RunConfig,
    steps: Optional[int] = None,
    seed: Optional[int] = None,
    strict: bool = True,
    min_runs: int = MIN_RUNS,
    lag_min: int = 10,
    model: Optional[Tuple[Distribution, LikelihoodTable]] = None,
    theta: Optional[float] = None,
) -> Tuple[TrajectoryLog, DiffusionStats]:
    """
    Drive the walker with a B/IB run.

    Data, exploration and headings use independent child streams of ``seed``.
    Without ``theta`` the threshold is resolved from ``run.ib``, so a
    partition-derived source labels the default grid first.

    Raises:
        InsufficientDataError: In strict mode, fewer than ``min_runs`` completed runs
    """
    steps = run.steps if steps is None else steps
    seed = run.seed if seed is None else seed
    if steps < 2:
        raise ValidationError("walker needs at least 2 steps", field="steps", value=steps)
    if model is None:
        model = read_model(run.tables) if run.tables else tri_stable_model()
    prior, likelihood = model

    data_seq, loop_seq, heading_seq = np.random.SeedSequence(seed).spawn(3)
    data = data_stream(
        run.stream,
        likelihood,
        steps,
        np.random.default_rng(data_seq),
        run.true_hypothesis,
        run.constant_datum,
    )
    if theta is None:
        theta = resolve_theta(run.ib)
    state = initial_state(
        prior,
        likelihood,
        run.ib,
        rng=np.random.default_rng(loop_seq),
        theta=theta,
        mode=run.mode,
    )
    _, inference_log, _ = run_inference(state, data)

    turns = turns_from_log(inference_log)
    positions, _ = _walk(turns, np.random.default_rng(heading_seq))
    lengths = straight_runs(turns)
    if strict and lengths.size < min_runs:
        raise InsufficientDataError(
            "too few straight runs for walker statistics",
            required=min_runs,
            observed=int(lengths.size),
        )

    log = TrajectoryLog.from_arrays(
        inference_log.times, inference_log.percepts, inference_log.events, positions
    )
    log.event_counts = inference_log.event_counts.copy()
    stats = diffusion_statistics(
        [positions], lengths, lag_min=lag_min, lag_max=max(steps // 10, lag_min + 1)
    )
    logger.info(
        "walker: %d steps, %d runs, msd exponent %.3f",
        steps,
        stats.runs,
        stats.msd_exponent,
    )
    return log, stats


def _control_positions(kind: str, steps: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    if kind == "memoryless":
        turns = np.ones(steps, dtype=bool)
    elif kind == "ballistic":
        turns = np.zeros(steps, dtype=bool)
    else:
        raise ValidationError(f"unknown control {kind!r}", field="kind", value=kind)
    turns[0] = False
    positions, _ = _walk(turns, rng)
    return positions


def run_control_walk(
    kind: str,
    steps: int,
    seed: int,
    ensemble: int = 1,
    workers: int = 1,
    lag_min: int = 10,
) -> Tuple[TrajectoryLog, DiffusionStats]:
    """
    Memoryless or ballistic control walk.

    With ``ensemble > 1`` the MSD is averaged over independent walkers seeded
    from ``seed``; the log holds the first walker only.
    """
    if ensemble < 1:
        raise ValidationError("ensemble must be >= 1", field="ensemble", value=ensemble)
    children = np.random.SeedSequence(seed).spawn(ensemble)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            walks: List[np.ndarray] = list(
                pool.map(lambda s: _control_positions(kind, steps, s), children)
            )
    else:
        walks = [_control_positions(kind, steps, s) for s in children]

    turns = np.full(steps, kind == "memoryless")
    turns[0] = False
    lengths = straight_runs(turns)
    events = [EventTag.SWITCH if t else EventTag.B for t in turns]
    log = TrajectoryLog.from_arrays(np.arange(1, steps + 1), ["0"] * steps, events, walks[0])
    stats = diffusion_statistics(
        walks,
        lengths,
        lag_min=lag_min,
        lag_max=max(steps // 10, lag_min + 1),
        fit_tail=False,
    )
    logger.info("%s control: msd exponent %.3f", kind, stats.msd_exponent)
    return log, stats


def walk_statistics(
    logs: Sequence[TrajectoryLog], lag_min: int = 10, fit_tail: bool = True
) -> DiffusionStats:
    """Recompute diffusion statistics from stored walker logs."""
    if not logs or not all(log.has_positions for log in logs):
        raise InsufficientDataError("walker logs carry no positions", required=1, observed=0)
    lengths = np.concatenate([straight_runs(turns_from_log(log)) for log in logs])
    steps = min(len(log) for log in logs)
    return diffusion_statistics(
        [log.positions() for log in logs],
        lengths,
        lag_min=lag_min,
        lag_max=max(steps // 10, lag_min + 1),
        fit_tail=fit_tail,
    )
