"""Two stations, two heterogeneous exhaustive servers, and the random
piecewise-linear fluid limits of their queue lengths.

Stations 0 and 1 each receive Poisson(1) arrivals.  Server j serves
exponentially at rate mu[i][j] while assigned to station i, stays as
long as its station has an unserved customer, otherwise moves to the
other station if that one has work, otherwise turns passive until the
next arrival (which it joins).  Switchover is instantaneous.

The fluid model evolves levels x_i at net rate 1 - sum of the rates of
the servers assigned to station i, linearly between breakpoints.  When
a station's level hits zero, one server is freed and re-assigned by the
exhaustive rule; if both servers sit there, which one leaves first is
decided by the exponential race, server j winning with probability
mu[i][j] / (mu[i][0] + mu[i][1]).  That race is the only randomness in
the fluid path.  A station at level zero whose remaining server cannot
match the inflow regrows; when both levels are zero the path is
absorbed.  Cycle growth factors log(|x_end| / |x_start|) between
successive emptyings of station 1 drive the recurrence scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream
from .stats import EstimateWithCI, _t_quantile

CONTRACTING = "contracting"
EXPANDING = "expanding"
NULL_CANDIDATE = "null_candidate"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PollingConfig:
    """Service rates mu[station][server]; arrival rates are (1, 1)."""

    mu: tuple

    def __post_init__(self):
        mu = tuple(tuple(float(v) for v in row) for row in self.mu)
        object.__setattr__(self, "mu", mu)
        if len(mu) != 2 or any(len(r) != 2 for r in mu):
            raise ValueError("mu must be a 2x2 matrix mu[station][server]")
        if any(v <= 0 for row in mu for v in row):
            raise ValueError("service rates must be positive")

    @property
    def stability_prerequisite(self) -> bool:
        """All rates below the per-station arrival rate 1."""
        return all(v < 1.0 for row in self.mu for v in row)


# -- stochastic system ------------------------------------------------


@dataclass
class PollingRun:
    """Event-sampled queue-length trajectory of the stochastic system."""

    times: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    time_avg_q: tuple
    cycles: list  # completed busy cycles as (start, end, peak total queue)
    final_q: tuple
    horizon: float


def polling_simulate(
    cfg: PollingConfig,
    horizon: float,
    rng: RngStream,
    q0=(0, 0),
    initial_stations=None,
    sample_stride: int = 1,
) -> PollingRun:
    """Simulate the two-station system to the time horizon.

    initial_stations gives each server's preferred starting station;
    the exhaustive rule is applied to it, so an infeasible preference
    (no unserved customer there) falls through to the other station or
    to passivity.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if sample_stride < 1:
        raise ValueError("sample_stride must be >= 1")
    q = [int(q0[0]), int(q0[1])]
    if min(q) < 0:
        raise ValueError("initial queues must be non-negative")
    mu = cfg.mu
    stat = [None, None]  # station of each server, None = passive

    def unserved(i: int) -> int:
        return q[i] - sum(1 for s in stat if s == i)

    def decide(j: int, pref: int):
        # exhaustive rule: stay at pref if it has unserved work, else
        # move to the other station, else passive
        stat[j] = None
        if unserved(pref) > 0:
            stat[j] = pref
        elif unserved(1 - pref) > 0:
            stat[j] = 1 - pref

    prefs = initial_stations if initial_stations is not None else (0, 1)
    for j in (0, 1):
        decide(j, int(prefs[j]))

    now = 0.0
    times = [0.0]
    tr_q1 = [q[0]]
    tr_q2 = [q[1]]
    acc = [0.0, 0.0]
    cycles = []
    busy_start = None if stat == [None, None] else 0.0
    cycle_peak = q[0] + q[1]
    events = 0
    while True:
        rates = [1.0, 1.0]
        labels = [("arrival", 0), ("arrival", 1)]
        for j in (0, 1):
            if stat[j] is not None:
                rates.append(mu[stat[j]][j])
                labels.append(("service", j))
        total = sum(rates)
        dt = rng.exponential(total)
        if now + dt > horizon:
            acc[0] += q[0] * (horizon - now)
            acc[1] += q[1] * (horizon - now)
            now = horizon
            break
        acc[0] += q[0] * dt
        acc[1] += q[1] * dt
        now += dt
        u = rng.uniform() * total
        pick = 0
        for pick in range(len(rates)):
            u -= rates[pick]
            if u < 0.0:
                break
        kind, who = labels[pick]
        if kind == "arrival":
            q[who] += 1
            was_all_passive = stat == [None, None]
            for j in (0, 1):
                if stat[j] is None:
                    decide(j, who)
            if was_all_passive and busy_start is None:
                busy_start = now
                cycle_peak = q[0] + q[1]
        else:
            i = stat[who]
            q[i] -= 1
            if q[i] < 0:
                raise AssertionError("queue went negative")
            decide(who, i)
            if stat == [None, None] and busy_start is not None:
                cycles.append((busy_start, now, cycle_peak))
                busy_start = None
        cycle_peak = max(cycle_peak, q[0] + q[1])
        events += 1
        if events % sample_stride == 0:
            times.append(now)
            tr_q1.append(q[0])
            tr_q2.append(q[1])
    times.append(now)
    tr_q1.append(q[0])
    tr_q2.append(q[1])
    return PollingRun(
        times=np.asarray(times),
        q1=np.asarray(tr_q1, dtype=float),
        q2=np.asarray(tr_q2, dtype=float),
        time_avg_q=(acc[0] / horizon, acc[1] / horizon),
        cycles=cycles,
        final_q=(q[0], q[1]),
        horizon=horizon,
    )


# -- fluid model ------------------------------------------------------


@dataclass(frozen=True)
class FluidBreakpoint:
    """Path corner: a hit at level 0, an absorption, or a path end."""

    time: float
    levels: tuple
    assignment: tuple
    kind: str  # start | hit | end | absorbed


@dataclass
class FluidPath:
    """Piecewise-linear fluid path with its breakpoints."""

    breakpoints: list
    absorbed: bool
    degenerate_segments: int
    horizon: float

    def sample(self, ts) -> np.ndarray:
        """Levels at the given times, shape (len(ts), 2)."""
        bt = np.asarray([b.time for b in self.breakpoints])
        lv = np.asarray([b.levels for b in self.breakpoints])
        ts = np.asarray(ts, dtype=float)
        out = np.empty((len(ts), 2))
        out[:, 0] = np.interp(ts, bt, lv[:, 0])
        out[:, 1] = np.interp(ts, bt, lv[:, 1])
        return out


def _net_rates(mu, x, a):
    rates = []
    for i in (0, 1):
        r = 1.0 - sum(mu[i][j] for j in (0, 1) if a[j] == i)
        if x[i] == 0.0 and r < 0.0:
            r = 0.0  # station pinned at zero
        rates.append(r)
    return rates


def _fluid_run(mu, x, a, rng, t0, t_limit, on_break=None, section=None):
    """Advance levels/assignment until absorption, a section hit, or
    t_limit.  Mutates x and a; returns (status, time, degenerate_seen)
    with status in {'absorbed', 'section', 'limit'}.
    """
    now = t0
    degenerate = False
    while True:
        rates = _net_rates(mu, x, a)
        if any(x[i] > 0.0 and rates[i] == 0.0 for i in (0, 1)):
            degenerate = True
        hit_i = None
        hit_dt = math.inf
        for i in (0, 1):
            if x[i] > 0.0 and rates[i] < 0.0:
                dt = x[i] / -rates[i]
                if dt < hit_dt:
                    hit_i, hit_dt = i, dt
        if now + hit_dt >= t_limit:
            dt = t_limit - now
            for i in (0, 1):
                nxt = x[i] + rates[i] * dt
                x[i] = nxt if nxt > 0.0 else 0.0
            return "limit", t_limit, degenerate
        now += hit_dt
        o = 1 - hit_i
        nxt = x[o] + rates[o] * hit_dt
        x[o] = nxt if nxt > 0.0 else 0.0
        x[hit_i] = 0.0
        if x[o] == 0.0:
            if on_break:
                on_break(now, tuple(x), (None, None), "absorbed")
            return "absorbed", now, degenerate
        here = [j for j in (0, 1) if a[j] == hit_i]
        if len(here) == 2:
            p_first = mu[hit_i][here[0]] / (mu[hit_i][here[0]] + mu[hit_i][here[1]])
            leaver = here[0] if rng.uniform() < p_first else here[1]
        else:
            leaver = here[0]
        a[leaver] = o
        if on_break:
            on_break(now, tuple(x), tuple(a), "hit")
        if section is not None and hit_i == section:
            return "section", now, degenerate


def fluid_trajectory(
    cfg: PollingConfig,
    x0,
    assignment0,
    horizon: float,
    rng: RngStream,
) -> FluidPath:
    """Fluid path from levels x0 under the given server assignment.

    The race at a two-server emptying consumes one uniform.  Both
    levels reaching zero absorbs the path.  Every interior breakpoint
    has a level exactly zero; segments with a positive level and zero
    net drift are flagged degenerate.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    x = [float(x0[0]), float(x0[1])]
    if min(x) < 0:
        raise ValueError("levels must be non-negative")
    a = [int(assignment0[0]), int(assignment0[1])]
    if any(s not in (0, 1) for s in a):
        raise ValueError("assignment entries must be station 0 or 1")
    breaks = [FluidBreakpoint(0.0, tuple(x), tuple(a), "start")]
    degenerate = 0

    def record(t, levels, assignment, kind):
        breaks.append(FluidBreakpoint(t, levels, assignment, kind))

    status, t_end, degen = _fluid_run(
        cfg.mu, x, a, rng, 0.0, horizon, on_break=record
    )
    if degen:
        degenerate += 1
    absorbed = status == "absorbed"
    if not absorbed:
        breaks.append(FluidBreakpoint(t_end, tuple(x), tuple(a), "end"))
    return FluidPath(
        breakpoints=breaks,
        absorbed=absorbed,
        degenerate_segments=degenerate,
        horizon=horizon,
    )


@dataclass
class CycleGrowthResult:
    """Log growth factors across returns to the station-1-empty section."""

    factors: list
    mean_log_factor: float
    ci: EstimateWithCI | None
    n_complete: int
    n_capped: int
    n_degenerate_excluded: int
    absorbed: bool
    reached_section: bool
    classification: str
    pre_section_growth: float | None = None


def _classify(absorbed, reached, pre_growth, finite, ci) -> str:
    """Disclosed decision rule, in priority order: absorption is
    contraction; a path that never returns to the section is judged by
    the sign of its mass growth; two or more factors use the CI; a
    single factor falls back to its sign."""
    if absorbed:
        return CONTRACTING
    if not reached or not finite:
        if pre_growth is not None and pre_growth > 0.0:
            return EXPANDING
        return INCONCLUSIVE
    if ci is not None and len(finite) >= 2:
        if ci.hi < 0.0:
            return CONTRACTING
        if ci.lo > 0.0:
            return EXPANDING
        return NULL_CANDIDATE
    mean = float(np.mean(finite))
    if mean > 0.0:
        return EXPANDING
    if mean < 0.0:
        return CONTRACTING
    return INCONCLUSIVE


def cycle_growth_estimate(
    cfg: PollingConfig,
    x0,
    cycles: int,
    rng: RngStream,
    assignment0=(0, 0),
    cap_factor: float = 200.0,
) -> CycleGrowthResult:
    """Mean log growth of |x| per cycle between station-1 emptyings.

    Cycles that exceed cap_factor times their starting mass in time are
    recorded from the capped state and counted capped; cycles touching
    a degenerate zero-drift segment are excluded from the mean but
    counted.  Absorption ends the run and dominates the verdict.  All
    thresholds scale with the state, so doubling x0 with the same rng
    reproduces the factor sequence exactly.
    """
    if cycles < 100:
        raise ValueError("need cycles >= 100 for a usable factor sample")
    if cap_factor <= 0:
        raise ValueError("cap_factor must be positive")
    x = [float(x0[0]), float(x0[1])]
    if x[0] + x[1] <= 0:
        raise ValueError("x0 must have positive total mass")
    a = [int(assignment0[0]), int(assignment0[1])]
    mu = cfg.mu

    mass0 = x[0] + x[1]
    status, now, _ = _fluid_run(mu, x, a, rng, 0.0, cap_factor * mass0,
                                section=1)
    if status != "section":
        end_mass = x[0] + x[1]
        absorbed = status == "absorbed"
        pre_growth = None
        if not absorbed:
            pre_growth = (math.log(end_mass / mass0) if end_mass > 0
                          else -math.inf)
        return CycleGrowthResult(
            factors=[],
            mean_log_factor=-math.inf if absorbed else math.nan,
            ci=None,
            n_complete=0,
            n_capped=0 if absorbed else 1,
            n_degenerate_excluded=0,
            absorbed=absorbed,
            reached_section=False,
            classification=_classify(absorbed, False, pre_growth, [], None),
            pre_section_growth=pre_growth,
        )

    factors = []
    n_complete = n_capped = n_degenerate = 0
    absorbed = False
    for _ in range(cycles):
        start_mass = x[0] + x[1]
        status, now, degen = _fluid_run(
            mu, x, a, rng, now, now + cap_factor * start_mass, section=1
        )
        end_mass = x[0] + x[1]
        if status == "absorbed":
            absorbed = True
            factors.append(-math.inf)
            break
        factor = math.log(end_mass / start_mass) if end_mass > 0 else -math.inf
        if degen:
            n_degenerate += 1
            continue
        factors.append(factor)
        if status == "section":
            n_complete += 1
        else:
            n_capped += 1

    finite = [f for f in factors if math.isfinite(f)]
    if absorbed:
        mean = -math.inf
        ci = None
    elif finite:
        mean = float(np.mean(finite))
        if len(finite) >= 2:
            arr = np.asarray(finite)
            hw = _t_quantile(0.95, len(arr) - 1) * float(arr.std(ddof=1)) / math.sqrt(
                len(arr)
            )
        else:
            hw = math.inf
        ci = EstimateWithCI(
            point=mean, half_width=hw, n_eff=len(finite), method="batch_means"
        )
    else:
        mean = math.nan
        ci = None
    return CycleGrowthResult(
        factors=factors,
        mean_log_factor=mean,
        ci=ci,
        n_complete=n_complete,
        n_capped=n_capped,
        n_degenerate_excluded=n_degenerate,
        absorbed=absorbed,
        reached_section=True,
        classification=_classify(absorbed, True, None, finite, ci),
    )


@dataclass
class RecurrenceCell:
    mu: tuple
    mean_log_factor: float
    ci_lo: float
    ci_hi: float
    classification: str
    n_cycles: int
    n_capped: int
    absorbed: bool


@dataclass
class RecurrenceScanResult:
    cells: list
    null_fraction: float
    resolution: int
    cycles: int

    def null_fraction_within(self, delta: float) -> float:
        """Fraction of cells whose growth CI meets [-delta, delta];
        monotone in delta by construction."""
        if delta < 0:
            raise ValueError("delta must be non-negative")
        hits = 0
        for c in self.cells:
            if math.isnan(c.ci_lo) or math.isnan(c.ci_hi):
                continue
            if c.ci_lo <= delta and c.ci_hi >= -delta:
                hits += 1
        return hits / len(self.cells)


def recurrence_scan(
    resolution: int,
    cycles: int,
    rng: RngStream,
    x0=(1.0, 1.0),
    cap_factor: float = 200.0,
) -> RecurrenceScanResult:
    """Classify cycle growth over a grid of rate matrices in (0, 1)^4.

    Each axis takes the bin centers (i + 0.5) / resolution.  The
    reported null_fraction, the share of cells whose growth CI contains
    zero, is the volume proxy for the null-recurrence candidate set.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2 per axis")
    centers = [(i + 0.5) / resolution for i in range(resolution)]
    cells = []
    idx = 0
    for m11 in centers:
        for m12 in centers:
            for m21 in centers:
                for m22 in centers:
                    cfg = PollingConfig(mu=((m11, m12), (m21, m22)))
                    res = cycle_growth_estimate(
                        cfg, x0, cycles, rng.substream(idx),
                        cap_factor=cap_factor,
                    )
                    cells.append(
                        RecurrenceCell(
                            mu=cfg.mu,
                            mean_log_factor=res.mean_log_factor,
                            ci_lo=res.ci.lo if res.ci else math.nan,
                            ci_hi=res.ci.hi if res.ci else math.nan,
                            classification=res.classification,
                            n_cycles=res.n_complete,
                            n_capped=res.n_capped,
                            absorbed=res.absorbed,
                        )
                    )
                    idx += 1
    null = sum(1 for c in cells if c.classification == NULL_CANDIDATE)
    return RecurrenceScanResult(
        cells=cells,
        null_fraction=null / len(cells),
        resolution=resolution,
        cycles=cycles,
    )
