"""Time-stamped run records shared by the inference loop, perception and walker."""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from bibkit.core.exceptions import ConfigurationError, ValidationError

logger = logging.getLogger(__name__)


class EventTag(str, Enum):
    """Closed set of per-step events."""

    B = "B"
    IB = "IB"
    EXPLORE = "EXPLORE"
    SWITCH = "SWITCH"


# A step that carries several events is recorded under the first one listed.
PRECEDENCE: Tuple[EventTag, ...] = (
    EventTag.EXPLORE,
    EventTag.SWITCH,
    EventTag.IB,
    EventTag.B,
)
_CODES = {tag: code for code, tag in enumerate(PRECEDENCE)}


def dominant_event(events: Iterable[EventTag]) -> EventTag:
    present = set(events)
    for tag in PRECEDENCE:
        if tag in present:
            return tag
    return EventTag.B


@dataclass
class TrajectoryLog:
    """
    One record per step: time, percept (or MAP hypothesis), optional 2-D
    position and the step's dominant event.

    ``event_counts`` keeps every event of every step, including the ones
    hidden behind a dominant tag. Logs read back from CSV only know the
    dominant tags.
    """

    times: List[int] = field(default_factory=list)
    percepts: List[str] = field(default_factory=list)
    events: List[EventTag] = field(default_factory=list)
    xs: List[float] = field(default_factory=list)
    ys: List[float] = field(default_factory=list)
    event_counts: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return len(self.times)

    def append(
        self,
        t: int,
        percept: str,
        events: Iterable[EventTag],
        position: Optional[complex] = None,
    ) -> None:
        if self.times and t <= self.times[-1]:
            raise ValidationError(
                f"timestamps must increase strictly ({t} after {self.times[-1]})",
                field="t",
                value=t,
            )
        events = set(events)
        self.event_counts.update(events)
        self.times.append(int(t))
        self.percepts.append(str(percept))
        self.events.append(dominant_event(events))
        self.xs.append(np.nan if position is None else float(position.real))
        self.ys.append(np.nan if position is None else float(position.imag))

    @classmethod
    def from_arrays(
        cls,
        times: Sequence[int],
        percepts: Sequence[str],
        events: Sequence[EventTag],
        positions: Optional[np.ndarray] = None,
    ) -> "TrajectoryLog":
        """Bulk construction for simulators that produce whole columns at once."""
        times = [int(t) for t in times]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("timestamps must increase strictly", field="times")
        n = len(times)
        if positions is None:
            xs = ys = [np.nan] * n
        else:
            positions = np.asarray(positions, dtype=complex)
            xs, ys = positions.real.tolist(), positions.imag.tolist()
        events = [EventTag(e) for e in events]
        return cls(
            times=times,
            percepts=[str(p) for p in percepts],
            events=events,
            xs=list(xs),
            ys=list(ys),
            event_counts=Counter(events),
        )

    @property
    def has_positions(self) -> bool:
        return bool(self.xs) and not np.isnan(self.xs).all()

    def positions(self) -> np.ndarray:
        return np.asarray(self.xs) + 1j * np.asarray(self.ys)

    def tags(self) -> Dict[EventTag, int]:
        """Counts of dominant tags."""
        return dict(Counter(self.events))

    def count(self, tag: EventTag) -> int:
        return int(self.event_counts.get(tag, 0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.times,
                "percept": self.percepts,
                "x": self.xs,
                "y": self.ys,
                "event": [e.value for e in self.events],
            }
        )

    def to_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        logger.debug("wrote %d log records to %s", len(self), path)
        return path

    @classmethod
    def from_csv(cls, path: Path) -> "TrajectoryLog":
        try:
            frame = pd.read_csv(
                path, dtype={"percept": str, "event": str}, float_precision="round_trip"
            )
        except (OSError, pd.errors.ParserError) as e:
            raise ConfigurationError(f"cannot read log {path}: {e}", config_type="log")
        missing = {"t", "percept", "event"} - set(frame.columns)
        if missing:
            raise ConfigurationError(
                f"{path} lacks columns {sorted(missing)}", config_type="log"
            )
        try:
            events = [EventTag(e) for e in frame["event"]]
        except ValueError as e:
            raise ConfigurationError(f"{path}: {e}", config_type="log")
        positions = None
        if {"x", "y"} <= set(frame.columns) and frame["x"].notna().any():
            positions = frame["x"].to_numpy(float) + 1j * frame["y"].to_numpy(float)
        return cls.from_arrays(
            frame["t"].tolist(), frame["percept"].tolist(), events, positions
        )
