"""FCFS many-server queue via the sorted workload vector recursion.

State is the ascending vector of server workloads seen by an arriving
customer.  Customer n waits w[0] (the least loaded server), its service
is added there, every coordinate drains by the next interarrival time,
negative parts are clamped, and the vector is re-sorted:

    w' = sort( (w + e1 * sigma - t * 1)^+ )

For m = 1 this degenerates bit-for-bit to the single-server recursion.
On top of the path simulator sit a regenerative estimator of the
stationary wait, an analytic moment-finiteness table for the delay
based on integrated-tail minima, and the tail-asymptotics experiment
that compares the empirical delay tail against a power of the
integrated service tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, integrated_tail
from .inputs import InputProcess, traffic_intensity
from .rng import RngStream
from .stats import EstimateWithCI, batch_means_ci, regenerative_ci

_CHUNK = 1 << 16

FINITE = "finite"
INFINITE = "infinite"
INTEGER_RHO_OPEN = "integer_rho_open"
UNKNOWN = "unknown"


def kw_step(w, sigma: float, t: float) -> tuple:
    """One update of the ascending workload vector."""
    if sigma < 0 or t < 0:
        raise ValueError("sigma and t must be non-negative")
    vec = list(w)
    if not vec:
        raise ValueError("workload vector must be non-empty")
    if any(a > b for a, b in zip(vec, vec[1:])) or vec[0] < 0:
        raise ValueError("workload vector must be non-negative ascending")
    out = []
    first = vec[0] + sigma - t
    out.append(first if first > 0.0 else 0.0)
    for v in vec[1:]:
        d = v - t
        out.append(d if d > 0.0 else 0.0)
    out.sort()
    return tuple(out)


def kw_path(
    proc: InputProcess,
    m: int,
    customers: int,
    rng: RngStream,
    x0=None,
):
    """Waits and empty-system flags for customers 1..customers.

    Returns (waits, empty) where waits[k] is the wait of customer k+1
    (the least coordinate at its arrival) and empty[k] says the arrival
    found every server idle, which is the regeneration event.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if customers < 1:
        raise ValueError("need at least one customer")
    if x0 is None:
        vec = [0.0] * m
    else:
        vec = list(x0)
        if len(vec) != m or vec[0] < 0 or any(
            a > b for a, b in zip(vec, vec[1:])
        ):
            raise ValueError("x0 must be a non-negative ascending m-vector")
    n = customers
    waits = np.empty(n)
    empty = np.empty(n, dtype=bool)
    waits[0] = vec[0]
    empty[0] = vec[-1] == 0.0
    filled = 1
    stream = proc.pair_stream(rng, chunk=min(_CHUNK, max(1, n - 1)))
    if m == 2:
        w0, w1 = vec
        while filled < n:
            sig, t = next(stream)
            take = min(len(sig), n - filled)
            sl = sig[:take].tolist()
            tl = t[:take].tolist()
            wout = []
            eout = []
            wapp = wout.append
            eapp = eout.append
            for k in range(take):
                tk = tl[k]
                a = w0 + sl[k] - tk
                b = w1 - tk
                if a < 0.0:
                    a = 0.0
                if b < 0.0:
                    b = 0.0
                if a > b:
                    a, b = b, a
                w0, w1 = a, b
                wapp(a)
                eapp(b == 0.0)
            waits[filled : filled + take] = wout
            empty[filled : filled + take] = eout
            filled += take
    else:
        while filled < n:
            sig, t = next(stream)
            take = min(len(sig), n - filled)
            sl = sig[:take].tolist()
            tl = t[:take].tolist()
            for k in range(take):
                tk = tl[k]
                first = vec[0] + sl[k] - tk
                vec[0] = first if first > 0.0 else 0.0
                for i in range(1, m):
                    d = vec[i] - tk
                    vec[i] = d if d > 0.0 else 0.0
                vec.sort()
                waits[filled + k] = vec[0]
                empty[filled + k] = vec[-1] == 0.0
            filled += take
    return waits, empty


def loynes_backward_vectors(
    proc: InputProcess, m: int, n: int, rng: RngStream
) -> list:
    """Backward zero-start workload vectors M_1..M_n.

    M_j applies the vector recursion to the zero state over the j
    oldest realized pairs, oldest first.  Along a fixed realization the
    sequence is coordinatewise non-decreasing, which is checked here on
    the actual path.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    sig, t = proc.pairs(n, rng)
    out = []
    prev = None
    for j in range(1, n + 1):
        vec = tuple([0.0] * m)
        for i in range(j - 1, -1, -1):
            vec = kw_step(vec, float(sig[i]), float(t[i]))
        if prev is not None and any(a < b for a, b in zip(vec, prev)):
            raise AssertionError("backward vector sequence decreased")
        out.append(vec)
        prev = vec
    return out


@dataclass
class StationaryWaitResult:
    """Stationary waiting-time estimates for an m-server queue."""

    mean: EstimateWithCI
    tails: dict
    method: str
    cycles: int
    low_confidence: bool
    customers: int


def estimate_stationary_wait(
    proc: InputProcess,
    m: int,
    customers: int,
    rng: RngStream,
    levels=(0.0,),
    warmup: int = None,
) -> StationaryWaitResult:
    """Estimate E[D] and P(D > x) from one long run.

    Uses the regenerative ratio estimator over cycles delimited by
    arrivals that find the system empty.  If fewer than two such
    arrivals occur, falls back to batch means after a warmup discard
    and flags the result low-confidence.
    """
    intensity = traffic_intensity(proc, m)
    if not intensity.stable:
        raise ValueError(
            f"unstable input (rho={intensity.rho:g}, m={m}); no stationary wait"
        )
    waits, empty = kw_path(proc, m, customers, rng)
    if warmup is None:
        warmup = max(1, customers // 10)
    regen = np.flatnonzero(empty)
    levels = tuple(float(x) for x in levels)

    if len(regen) >= 2:
        first, last = regen[0], regen[-1]
        bounds = regen
        lengths = np.diff(bounds).astype(float)
        csum = np.concatenate([[0.0], np.cumsum(waits)])
        mean_sums = csum[bounds[1:]] - csum[bounds[:-1]]
        mean_est = regenerative_ci(mean_sums, lengths)
        tails = {}
        for x in levels:
            ind = np.concatenate([[0.0], np.cumsum(waits > x)])
            tails[x] = regenerative_ci(ind[bounds[1:]] - ind[bounds[:-1]], lengths)
        n_cycles = len(lengths)
        return StationaryWaitResult(
            mean=mean_est,
            tails=tails,
            method="regenerative",
            cycles=n_cycles,
            low_confidence=n_cycles < 30,
            customers=customers,
        )

    tail_sample = waits[warmup:]
    if len(tail_sample) < 40:
        raise ValueError("run too short to estimate anything")
    mean_est = batch_means_ci(tail_sample)
    tails = {
        x: batch_means_ci((tail_sample > x).astype(float)) for x in levels
    }
    return StationaryWaitResult(
        mean=mean_est,
        tails=tails,
        method="batch_means",
        cycles=0,
        low_confidence=True,
        customers=customers,
    )


def moment_condition_check(
    service: DistributionSpec, rho: float, m: int, gamma: float
) -> str:
    """Analytic finiteness of E[D^gamma] in an m-server queue.

    With k = floor(rho) servers pinned by heavy traffic, the delay
    moment of order gamma is finite exactly when the minimum of m - k
    independent integrated-tail variables has a finite gamma-moment.
    That minimum has tail (integrated tail)^(m-k), so for a power-law
    service tail with index alpha the switch sits at
    gamma = (m - k)(alpha - 1).  Light-tailed and bounded services give
    every moment.  Integer rho is a genuinely open case and is reported
    as such rather than resolved.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0 < rho < m:
        raise ValueError("need 0 < rho < m")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if abs(rho - round(rho)) < 1e-9:
        return INTEGER_RHO_OPEN
    j = m - math.floor(rho)
    if service.kind in ("det", "uniform", "empirical", "exp", "weibull_tail"):
        # bounded support or tails decaying faster than any power
        return FINITE
    if service.kind == "pareto":
        alpha = service.params[0]
        if alpha <= 1:
            return INFINITE  # integrated tail is improper
        return FINITE if gamma < j * (alpha - 1.0) else INFINITE
    return UNKNOWN


@dataclass
class TailAsymptoticsResult:
    """Empirical delay tail against the integrated-tail power reference.

    ratios[i] = P_hat(D > levels[i]) / reference[i] with reference =
    integrated_tail(service, eta * x) ** (m - k).  Flagged levels had
    fewer than min_hits exceedances and carry no evidential weight.
    """

    levels: np.ndarray
    estimates: list
    hits: np.ndarray
    references: np.ndarray
    ratios: np.ndarray
    flagged: np.ndarray
    fitted_tail_exponent: float
    rho: float
    k_floor: int
    eta: float
    customers: int
    waits: np.ndarray = field(repr=False, default=None)


def tail_asymptotics_experiment(
    service: DistributionSpec,
    proc: InputProcess,
    m: int,
    customers: int,
    rng: RngStream,
    eta: float = 1.0,
    levels=None,
    min_hits: int = 30,
    keep_waits: bool = False,
) -> TailAsymptoticsResult:
    """Measure the stationary delay tail and compare to the reference.

    Levels default to a geometric grid between the median and the
    1 - 50/n quantile of the positive waits.  Estimates use batch-means
    intervals on exceedance indicators; the fitted exponent is the
    negative log-log slope over unflagged levels.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    intensity = traffic_intensity(proc, m)
    if not intensity.stable:
        raise ValueError(f"unstable input (rho={intensity.rho:g}, m={m})")
    rho = intensity.rho
    k_floor = math.floor(rho)
    if abs(rho - round(rho)) < 1e-12:
        k_floor = int(round(rho))
    waits, _ = kw_path(proc, m, customers, rng)

    if levels is None:
        positive = waits[waits > 0]
        if len(positive) < 200:
            raise ValueError("too few positive waits to place tail levels")
        lo = float(np.quantile(positive, 0.5))
        hi = float(np.quantile(positive, 1.0 - 50.0 / len(positive)))
        if not lo < hi:
            raise ValueError("degenerate wait distribution; supply levels")
        levels = np.geomspace(lo, hi, 12)
    levels = np.asarray(sorted(float(x) for x in levels))
    if len(levels) == 0 or levels[0] < 0:
        raise ValueError("levels must be non-negative")

    estimates = []
    hits = np.empty(len(levels), dtype=np.int64)
    references = np.empty(len(levels))
    ratios = np.empty(len(levels))
    flagged = np.empty(len(levels), dtype=bool)
    for i, x in enumerate(levels):
        ind = waits > x
        hits[i] = int(ind.sum())
        est = batch_means_ci(ind.astype(float))
        estimates.append(est)
        ref = integrated_tail(service, eta * x) ** (m - k_floor)
        references[i] = ref
        ratios[i] = est.point / ref if ref > 0 else math.nan
        flagged[i] = hits[i] < min_hits

    usable = (~flagged) & (np.array([e.point for e in estimates]) > 0)
    if usable.sum() >= 3:
        lx = np.log(levels[usable])
        lp = np.log(np.array([e.point for e in estimates])[usable])
        slope = np.polyfit(lx, lp, 1)[0]
        fitted = -float(slope)
    else:
        fitted = math.nan

    return TailAsymptoticsResult(
        levels=levels,
        estimates=estimates,
        hits=hits,
        references=references,
        ratios=ratios,
        flagged=flagged,
        fitted_tail_exponent=fitted,
        rho=rho,
        k_floor=k_floor,
        eta=eta,
        customers=customers,
        waits=waits if keep_waits else None,
    )
