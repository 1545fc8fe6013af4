"""
Dwell-time, power-law tail and diffusion statistics for trajectory logs.

Tail exponents are fitted by discrete maximum likelihood,

    P(x) = x**(-alpha) / zeta(alpha, xmin)     for x >= xmin,

with ``xmin`` chosen to minimise the Kolmogorov-Smirnov distance between the
empirical and fitted tail distributions. The standard error of ``alpha``
comes from the observed Fisher information, ``n * d2/dalpha2 ln zeta``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta
from scipy.stats import linregress

from bibkit.core.exceptions import InsufficientDataError, ValidationError
from bibkit.core.models import DiffusionRecord, DwellRecord
from .trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

ALPHA_BOUNDS = (1.01, 6.0)
MIN_TAIL = 10
MAX_XMIN_CANDIDATES = 64


@dataclass(frozen=True)
class PowerLawFit:
    """
    Discrete power-law tail fit.

    Attributes:
        alpha: Tail exponent
        xmin: Lower cutoff of the fitted tail
        n_tail: Samples at or above ``xmin``
        ks: Kolmogorov-Smirnov distance of the fit
        sigma: Standard error of ``alpha``
    """

    alpha: float
    xmin: int
    n_tail: int
    ks: float
    sigma: float

    @property
    def ci(self) -> Tuple[float, float]:
        """95% confidence interval of ``alpha``."""
        return (self.alpha - 1.96 * self.sigma, self.alpha + 1.96 * self.sigma)

    def to_dict(self) -> Dict[str, float]:
        lo, hi = self.ci
        return {
            "alpha": self.alpha,
            "xmin": self.xmin,
            "n_tail": self.n_tail,
            "ks": self.ks,
            "sigma": self.sigma,
            "ci_low": lo,
            "ci_high": hi,
        }


def _neg_log_likelihood(alpha: float, log_sum: float, n: int, xmin: int) -> float:
    return alpha * log_sum + n * math.log(zeta(alpha, xmin))


def _ks_distance(tail: np.ndarray, alpha: float, xmin: int) -> float:
    values, counts = np.unique(tail, return_counts=True)
    empirical = np.cumsum(counts) / tail.size
    model = 1.0 - zeta(alpha, values + 1.0) / zeta(alpha, xmin)
    return float(np.max(np.abs(empirical - model)))


def _log_zeta(alpha: float, xmin: int) -> float:
    return math.log(zeta(alpha, xmin))


def _fit_at(x: np.ndarray, xmin: int) -> Tuple[float, float, int]:
    tail = x[x >= xmin]
    n = tail.size
    log_sum = float(np.log(tail).sum())
    result = minimize_scalar(
        _neg_log_likelihood,
        bounds=ALPHA_BOUNDS,
        args=(log_sum, n, xmin),
        method="bounded",
    )
    alpha = float(result.x)
    return alpha, _ks_distance(tail, alpha, xmin), n


def fit_power_law(
    samples: Sequence[int],
    xmin: Optional[int] = None,
    min_tail: int = MIN_TAIL,
) -> PowerLawFit:
    """
    Discrete power-law fit of positive integer samples.

    Args:
        samples: Observations (dwell or run lengths), each >= 1
        xmin: Fixed cutoff; chosen by KS minimisation when omitted
        min_tail: Smallest tail a candidate cutoff may leave

    Raises:
        InsufficientDataError: Fewer than ``min_tail`` samples
    """
    x = np.asarray(samples, dtype=float)
    if x.size and (x < 1).any():
        raise ValidationError("power-law samples must be >= 1", field="samples")
    x = np.floor(x)
    if x.size < min_tail:
        raise InsufficientDataError(
            "too few samples for a tail fit", required=min_tail, observed=int(x.size)
        )

    if xmin is not None:
        candidates = [int(xmin)]
    else:
        values = np.unique(x)
        tails = np.array([np.count_nonzero(x >= v) for v in values])
        values = values[tails >= min_tail]
        if values.size > MAX_XMIN_CANDIDATES:
            values = np.unique(
                values[np.linspace(0, values.size - 1, MAX_XMIN_CANDIDATES).astype(int)]
            )
        candidates = [int(v) for v in values]
    if not candidates:
        raise InsufficientDataError(
            "no cutoff leaves enough tail samples", required=min_tail, observed=int(x.size)
        )

    best: Optional[Tuple[float, float, int, int]] = None
    for candidate in candidates:
        alpha, ks, n = _fit_at(x, candidate)
        if best is None or ks < best[1]:
            best = (alpha, ks, n, candidate)
    assert best is not None
    alpha, ks, n, chosen = best

    h = 1e-4
    curvature = (
        _log_zeta(alpha + h, chosen) - 2 * _log_zeta(alpha, chosen) + _log_zeta(alpha - h, chosen)
    ) / (h * h)
    sigma = 1.0 / math.sqrt(n * curvature) if curvature > 0 else math.inf
    return PowerLawFit(alpha=alpha, xmin=chosen, n_tail=n, ks=ks, sigma=sigma)


def run_lengths(sequence: Sequence[str]) -> List[Tuple[str, int]]:
    """Run-length encoding ``[(value, length), ...]``."""
    runs: List[Tuple[str, int]] = []
    for value in sequence:
        if runs and runs[-1][0] == value:
            runs[-1] = (value, runs[-1][1] + 1)
        else:
            runs.append((value, 1))
    return runs


@dataclass(frozen=True)
class DwellStats:
    """
    Per-percept dwell-time samples and summaries.

    The trailing run of a log is censored (it has not ended) and is excluded.
    """

    samples: Dict[str, np.ndarray]
    switches: int
    tail: Optional[PowerLawFit] = None

    @property
    def counts(self) -> Dict[str, int]:
        return {k: int(v.size) for k, v in self.samples.items()}

    @property
    def means(self) -> Dict[str, float]:
        return {k: float(v.mean()) if v.size else math.nan for k, v in self.samples.items()}

    @property
    def medians(self) -> Dict[str, float]:
        return {
            k: float(np.median(v)) if v.size else math.nan for k, v in self.samples.items()
        }

    @property
    def stderrs(self) -> Dict[str, float]:
        return {
            k: float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
            for k, v in self.samples.items()
        }

    def pooled(self) -> np.ndarray:
        parts = [v for v in self.samples.values() if v.size]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def to_record(self) -> DwellRecord:
        return DwellRecord(
            switches=self.switches,
            counts=self.counts,
            means=_finite(self.means),
            medians=_finite(self.medians),
            stderrs=_finite(self.stderrs),
            tail=self.tail.to_dict() if self.tail else None,
        )


def _finite(values: Dict[str, float]) -> Dict[str, float]:
    return {k: v for k, v in values.items() if math.isfinite(v)}


def dwell_statistics(
    log: TrajectoryLog,
    strict: bool = True,
    fit_tail: bool = True,
    labels: Optional[Sequence[str]] = None,
) -> DwellStats:
    """
    Dwell-time samples per percept from the percept column of ``log``.

    Raises:
        InsufficientDataError: In strict mode, when the percept never changes
    """
    runs = run_lengths(log.percepts)
    switches = max(len(runs) - 1, 0)
    if switches == 0 and strict:
        raise InsufficientDataError(
            "dwell statistics need at least one switch", required=1, observed=0
        )

    keys = list(labels) if labels is not None else sorted({p for p, _ in runs})
    buckets: Dict[str, List[int]] = {k: [] for k in keys}
    for percept, length in runs[:-1]:
        buckets.setdefault(percept, []).append(length)
    samples = {k: np.asarray(v, dtype=np.int64) for k, v in buckets.items()}

    stats = DwellStats(samples=samples, switches=switches)
    if fit_tail:
        try:
            stats = DwellStats(samples, switches, fit_power_law(stats.pooled()))
        except InsufficientDataError as e:
            logger.info("no dwell tail fit: %s", e.message)
    return stats


def log_spaced_lags(max_lag: int, count: int = 48) -> np.ndarray:
    if max_lag < 1:
        raise ValidationError("max lag must be >= 1", field="max_lag", value=max_lag)
    return np.unique(np.geomspace(1, max_lag, num=count).astype(np.int64))


def mean_squared_displacement(positions: np.ndarray, lags: Sequence[int]) -> np.ndarray:
    """Time-averaged MSD of a complex-valued 2-D trajectory at each lag."""
    z = np.asarray(positions, dtype=complex)
    return np.array([np.mean(np.abs(z[lag:] - z[:-lag]) ** 2) for lag in lags])


def msd_exponent(
    lags: np.ndarray, msd: np.ndarray, lag_min: int, lag_max: int
) -> float:
    """Log-log slope of the MSD curve over ``[lag_min, lag_max]``."""
    keep = (lags >= lag_min) & (lags <= lag_max) & (msd > 0)
    if np.count_nonzero(keep) < 2:
        raise InsufficientDataError(
            "too few lags in the fit range", required=2, observed=int(np.count_nonzero(keep))
        )
    return float(linregress(np.log(lags[keep]), np.log(msd[keep])).slope)


@dataclass(frozen=True)
class DiffusionStats:
    """
    Diffusion diagnostics of a walker.

    Attributes:
        step_lengths: Straight-run lengths
        lags, msd: Mean-squared-displacement curve
        msd_exponent: ``alpha`` from the log-log fit
        fit_range: Lags used for the fit
        tail: Power-law fit of the run lengths, when available
    """

    step_lengths: np.ndarray
    lags: np.ndarray
    msd: np.ndarray
    msd_exponent: float
    fit_range: Tuple[int, int]
    tail: Optional[PowerLawFit] = None

    @property
    def runs(self) -> int:
        return int(self.step_lengths.size)

    def to_record(self) -> DiffusionRecord:
        return DiffusionRecord(
            runs=self.runs,
            msd_exponent=self.msd_exponent,
            fit_range=self.fit_range,
            tail=self.tail.to_dict() if self.tail else None,
        )


def diffusion_statistics(
    trajectories: Sequence[np.ndarray],
    step_lengths: Sequence[float],
    lag_min: int = 10,
    lag_max: Optional[int] = None,
    fit_tail: bool = True,
) -> DiffusionStats:
    """
    MSD curve, exponent and run-length tail for one or more equally long walks.

    The MSD is averaged over the ensemble; lags run up to a quarter of the
    trajectory and the exponent is fitted over ``[lag_min, lag_max]``
    (``lag_max`` defaults to a tenth of the trajectory).
    """
    walks = [np.asarray(t, dtype=complex) for t in trajectories]
    n = min(w.size for w in walks)
    lags = log_spaced_lags(max(n // 4, 1))
    msd = np.mean([mean_squared_displacement(w[:n], lags) for w in walks], axis=0)
    upper = lag_max if lag_max is not None else max(n // 10, lag_min + 1)
    alpha = msd_exponent(lags, msd, lag_min, upper)

    lengths = np.asarray(step_lengths, dtype=float)
    tail = None
    if fit_tail:
        try:
            tail = fit_power_law(lengths)
        except InsufficientDataError as e:
            logger.info("no run-length tail fit: %s", e.message)
    return DiffusionStats(
        step_lengths=lengths,
        lags=lags,
        msd=msd,
        msd_exponent=alpha,
        fit_range=(lag_min, upper),
        tail=tail,
    )
