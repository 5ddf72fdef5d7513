"""Estimation and classification diagnostics shared by every model.

Everything that turns a simulated path into a number with an error bar
or a stability verdict lives here: batch-means and regenerative
confidence intervals, Wilson intervals for binomial estimates, the
two-sample Kolmogorov-Smirnov distance, the Hill tail-index estimator,
and the drift classifier that labels trajectories stable, transient, or
boundary candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

STABLE = "stable"
TRANSIENT = "transient"
NULL_BOUNDARY = "null_boundary_candidate"
INCONCLUSIVE = "inconclusive"

_METHODS = ("regenerative", "batch_means", "binomial", "hill")


@dataclass(frozen=True)
class EstimateWithCI:
    """Point estimate with symmetric confidence half-width."""

    point: float
    half_width: float
    level: float = 0.95
    n_eff: int = 0
    method: str = "batch_means"

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"unknown CI method {self.method!r}")

    @property
    def lo(self) -> float:
        return self.point - self.half_width

    @property
    def hi(self) -> float:
        return self.point + self.half_width

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of drift classification on one trajectory."""

    klass: str
    slope: float
    slope_ci: tuple

    @property
    def is_stable(self) -> bool:
        return self.klass == STABLE

    @property
    def is_transient(self) -> bool:
        return self.klass == TRANSIENT


def _t_quantile(level: float, df: int) -> float:
    return float(sps.t.ppf(0.5 + level / 2.0, df))


def _ls_slope(t: np.ndarray, x: np.ndarray) -> float:
    tc = t - t.mean()
    denom = float(np.dot(tc, tc))
    if denom == 0.0:
        return math.nan
    return float(np.dot(tc, x - x.mean()) / denom)


def drift_classify(
    times,
    levels,
    window: int = None,
    level: float = 0.95,
    max_growth_frac: float = 0.10,
) -> StabilityVerdict:
    """Classify a (time, level) trajectory by its long-run drift.

    The slope is least squares over the second half of the path; its CI
    comes from batch means with `window` points per batch.  Rules:
    CI strictly above 0 -> transient; CI containing 0 with the path
    level (its per-half average, a noise-robust stand-in for the running
    maximum) growing between halves by less than max_growth_frac of the
    path range -> stable; CI containing 0 otherwise -> null boundary
    candidate.  A CI strictly below 0 means the window is dominated by a
    transient drain, which is reported inconclusive rather than guessed
    at.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(levels, dtype=float)
    if t.shape != x.shape or t.ndim != 1:
        raise ValueError("times and levels must be equal-length 1-d arrays")
    n = len(t)
    if window is None:
        window = max(4, n // 40)
    if n < 2 * window or n < 8:
        return StabilityVerdict(INCONCLUSIVE, math.nan, (math.nan, math.nan))

    half = n // 2
    t2, x2 = t[half:], x[half:]
    slope = _ls_slope(t2, x2)
    nb = len(t2) // window
    batch_slopes = []
    for b in range(nb):
        ts = t2[b * window : (b + 1) * window]
        xs = x2[b * window : (b + 1) * window]
        s = _ls_slope(ts, xs)
        if not math.isnan(s):
            batch_slopes.append(s)
    if math.isnan(slope) or len(batch_slopes) < 2:
        return StabilityVerdict(INCONCLUSIVE, slope, (math.nan, math.nan))
    bs = np.asarray(batch_slopes)
    se = float(bs.std(ddof=1)) / math.sqrt(len(bs))
    hw = _t_quantile(level, len(bs) - 1) * se
    ci = (slope - hw, slope + hw)

    if ci[0] > 0.0:
        return StabilityVerdict(TRANSIENT, slope, ci)
    if ci[0] <= 0.0 <= ci[1]:
        # maxima and extreme quantiles of ergodic paths carry
        # excursion-scale noise, so level growth is read off half
        # averages: any unbounded envelope drags the average with it
        growth = float(x[half:].mean() - x[:half].mean())
        path_range = float(x.max() - x.min())
        if path_range == 0.0 or growth < max_growth_frac * path_range:
            return StabilityVerdict(STABLE, slope, ci)
        return StabilityVerdict(NULL_BOUNDARY, slope, ci)
    return StabilityVerdict(INCONCLUSIVE, slope, ci)


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic, exact."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("ks_distance needs non-empty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.abs(cdf_a - cdf_b).max())


def ks_critical_value(n1: int, n2: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value at significance alpha."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n1 + n2) / (n1 * n2))


def tail_index_hill(sample, k: int = None, level: float = 0.95) -> EstimateWithCI:
    """Hill estimator of the tail index from the top k order statistics.

    Returns alpha_hat with the asymptotic half-width z * alpha_hat /
    sqrt(k).  Default k = n^(2/3).  All entries must be positive; a
    sample whose top k values are constant has no defined index.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or len(x) < 20:
        raise ValueError("need a 1-d sample of at least 20 points")
    if np.any(x <= 0.0):
        raise ValueError("hill estimator needs strictly positive entries")
    n = len(x)
    if k is None:
        k = int(n ** (2.0 / 3.0))
    if k < 10 or k >= n:
        raise ValueError(f"k={k} out of range [10, {n - 1}]")
    top = np.sort(x)[-(k + 1) :]
    excess = np.log(top[1:]) - math.log(top[0])
    mean_excess = float(excess.mean())
    if mean_excess <= 0.0:
        raise ValueError("degenerate tail: top order statistics are constant")
    alpha = 1.0 / mean_excess
    z = float(sps.norm.ppf(0.5 + level / 2.0))
    return EstimateWithCI(
        point=alpha,
        half_width=z * alpha / math.sqrt(k),
        level=level,
        n_eff=k,
        method="hill",
    )


def regenerative_ci(cycle_sums, cycle_lengths, level: float = 0.95) -> EstimateWithCI:
    """Ratio estimator over regeneration cycles with a delta-method CI.

    Estimates E[per-step value] as sum(cycle sums) / sum(cycle lengths).
    Few cycles widen the interval through the t quantile; n_eff carries
    the cycle count so callers can flag low confidence.
    """
    s = np.asarray(cycle_sums, dtype=float)
    ell = np.asarray(cycle_lengths, dtype=float)
    if s.shape != ell.shape or s.ndim != 1:
        raise ValueError("cycle sums and lengths must be equal-length 1-d arrays")
    n = len(s)
    if n < 2:
        raise ValueError("need at least 2 regeneration cycles")
    if np.any(ell <= 0):
        raise ValueError("cycle lengths must be positive")
    ratio = float(s.sum() / ell.sum())
    resid = s - ratio * ell
    var = float(np.dot(resid, resid)) / (n - 1)
    se = math.sqrt(var / n) / float(ell.mean())
    hw = _t_quantile(level, n - 1) * se
    return EstimateWithCI(
        point=ratio, half_width=hw, level=level, n_eff=n, method="regenerative"
    )


def batch_means_ci(values, batches: int = 20, level: float = 0.95) -> EstimateWithCI:
    """Batch-means CI for the mean of a correlated stationary sequence."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValueError("values must be 1-d")
    if batches < 2:
        raise ValueError("need at least 2 batches")
    size = len(x) // batches
    if size < 1:
        raise ValueError("not enough values for the requested batches")
    used = x[: size * batches].reshape(batches, size)
    means = used.mean(axis=1)
    point = float(means.mean())
    se = float(means.std(ddof=1)) / math.sqrt(batches)
    hw = _t_quantile(level, batches - 1) * se
    return EstimateWithCI(
        point=point, half_width=hw, level=level, n_eff=batches, method="batch_means"
    )


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> EstimateWithCI:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials, trials > 0")
    z = float(sps.norm.ppf(0.5 + level / 2.0))
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    hw = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return EstimateWithCI(
        point=center, half_width=hw, level=level, n_eff=trials, method="binomial"
    )
