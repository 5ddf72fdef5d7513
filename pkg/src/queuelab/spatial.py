"""Spatial service on a circle: one greedy traveling server, and a
black/white particle annihilation field.

The greedy server model: particles land on a circle of circumference L
by a Poisson stream, the server travels at speed v, serves for exactly
one time unit, and picks its next target only when it finishes a
service (or sits idle and a particle lands).  Targets are never
reconsidered mid-travel.  Policies: greedy (nearest in circle metric),
always_left (nearest walking left), random_direction (coin, then
nearest in that direction).  On a one-site lattice every policy
degenerates to M/D/1.

The annihilation model: black particles arrive at rate lam and persist;
white particles arrive at rate 1 and instantly delete the closest black
within circular distance eps, if any.  For eps >= L/2 every white sees
every black and the count is a simple birth-death chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream
from .stats import StabilityVerdict, drift_classify

GREEDY = "greedy"
ALWAYS_LEFT = "always_left"
RANDOM_DIRECTION = "random_direction"
_POLICIES = (GREEDY, ALWAYS_LEFT, RANDOM_DIRECTION)


def circular_distance(a: float, b: float, L: float) -> float:
    """Shortest distance between two points on a circle of length L."""
    d = abs(a - b) % L
    return d if d <= L - d else L - d


def nearest_particle(pos: float, particles, L: float):
    """Closest particle position in the circle metric, or None.

    Exact distance ties resolve toward the clockwise candidate (the
    smaller displacement in the increasing-coordinate direction).
    """
    best = None
    best_key = None
    for p in particles:
        d = circular_distance(pos, p, L)
        cw = (p - pos) % L
        key = (d, cw)
        if best_key is None or key < best_key:
            best, best_key = p, key
    return best


@dataclass(frozen=True)
class CircleConfig:
    """Greedy-server model parameters."""

    lam: float
    L: float = 1.0
    v: float = 1.0
    policy: str = GREEDY
    lattice_sites: int = None  # None = continuous circle

    def __post_init__(self):
        if self.lam < 0 or self.L <= 0 or self.v <= 0:
            raise ValueError("need lam >= 0, L > 0, v > 0")
        if self.policy not in _POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.lattice_sites is not None and self.lattice_sites < 1:
            raise ValueError("lattice_sites must be >= 1")


@dataclass
class SpatialRun:
    """Trajectory of the particle count plus service accounting."""

    times: np.ndarray
    counts: np.ndarray
    arrivals: int
    served: int
    waits: np.ndarray
    horizon: float

    def verdict(self, **kw) -> StabilityVerdict:
        return drift_classify(self.times, self.counts, **kw)


def greedy_server_simulate(
    cfg: CircleConfig, horizon: float, rng: RngStream
) -> SpatialRun:
    """Run the traveling-server model to the time horizon.

    Gap, position and policy-coin draws come from separate substreams,
    so policies that consume coins see the same arrival process as
    those that do not.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    s_gap = rng.substream(0)
    s_pos = rng.substream(1)
    s_coin = rng.substream(2)
    lam, L, v = cfg.lam, cfg.L, cfg.v

    def draw_pos() -> float:
        if cfg.lattice_sites is None:
            return L * s_pos.uniform()
        return (L / cfg.lattice_sites) * s_pos.integers(0, cfg.lattice_sites)

    def pick_target(now: float):
        # returns (waiting index, travel time) under cfg.policy
        positions = [p for p, _ in waiting]
        if cfg.policy == GREEDY:
            tgt = nearest_particle(server_pos[0], positions, L)
            travel = circular_distance(server_pos[0], tgt, L) / v
        elif cfg.policy == ALWAYS_LEFT:
            disp = min((server_pos[0] - p) % L for p in positions)
            tgt = None
            for p in positions:
                if (server_pos[0] - p) % L == disp:
                    tgt = p
                    break
            travel = disp / v
        else:
            left = s_coin.coin()
            if left:
                disp = min((server_pos[0] - p) % L for p in positions)
                cands = [p for p in positions if (server_pos[0] - p) % L == disp]
            else:
                disp = min((p - server_pos[0]) % L for p in positions)
                cands = [p for p in positions if (p - server_pos[0]) % L == disp]
            tgt = cands[0]
            travel = disp / v
        for idx, (p, _) in enumerate(waiting):
            if p == tgt:
                return idx, travel  # oldest waiting particle at the spot
        raise AssertionError("target vanished from the waiting set")

    waiting = []  # (position, arrival time), append order = age order
    server_pos = [0.0]
    phase = "idle"  # or ("travel", waiting index, end time), ("serve", end)
    count = 0
    arrivals = 0
    served = 0
    waits = []
    times = [0.0]
    counts = [0]
    next_arrival = s_gap.exponential(lam) if lam > 0 else math.inf

    now = 0.0
    while True:
        phase_time = math.inf
        if phase != "idle":
            phase_time = phase[2] if phase[0] == "travel" else phase[1]
        t_next = min(next_arrival, phase_time)
        if t_next > horizon:
            break
        now = t_next
        if phase_time <= next_arrival and phase != "idle":
            if phase[0] == "travel":
                _, idx, _ = phase
                pos, born = waiting.pop(idx)
                server_pos[0] = pos
                waits.append(now - born)
                phase = ("serve", now + 1.0)
            else:
                served += 1
                count -= 1
                times.append(now)
                counts.append(count)
                if waiting:
                    idx, travel = pick_target(now)
                    phase = ("travel", idx, now + travel)
                else:
                    phase = "idle"
        else:
            arrivals += 1
            count += 1
            waiting.append((draw_pos(), now))
            times.append(now)
            counts.append(count)
            next_arrival = now + s_gap.exponential(lam)
            if phase == "idle":
                idx, travel = pick_target(now)
                phase = ("travel", idx, now + travel)
    if count != arrivals - served:
        raise AssertionError("particle bookkeeping broke")
    return SpatialRun(
        times=np.asarray(times),
        counts=np.asarray(counts, dtype=float),
        arrivals=arrivals,
        served=served,
        waits=np.asarray(waits),
        horizon=horizon,
    )


@dataclass(frozen=True)
class AnnihilationConfig:
    """Annihilation field parameters; white rate is fixed at 1."""

    lam: float
    epsilon: float
    L: float = 1.0

    def __post_init__(self):
        if self.lam < 0 or self.epsilon < 0 or self.L <= 0:
            raise ValueError("need lam >= 0, epsilon >= 0, L > 0")


@dataclass
class AnnihilationRun:
    """Black-count trajectory with exact birth/deletion bookkeeping."""

    times: np.ndarray
    counts: np.ndarray
    births: int
    deletions: int
    time_avg_count: float
    horizon: float

    def verdict(self, **kw) -> StabilityVerdict:
        return drift_classify(self.times, self.counts, **kw)


def annihilation_simulate(
    cfg: AnnihilationConfig, horizon: float, rng: RngStream
) -> AnnihilationRun:
    """Run the black/white annihilation field to the time horizon."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    s_bgap = rng.substream(0)
    s_bpos = rng.substream(1)
    s_wgap = rng.substream(2)
    s_wpos = rng.substream(3)
    L = cfg.L
    blacks = []
    births = 0
    deletions = 0
    times = [0.0]
    counts = [0]
    area = 0.0
    now = 0.0
    next_black = s_bgap.exponential(cfg.lam) if cfg.lam > 0 else math.inf
    next_white = s_wgap.exponential(1.0)
    while True:
        t_next = min(next_black, next_white)
        if t_next > horizon:
            break
        area += len(blacks) * (t_next - now)
        now = t_next
        if next_black <= next_white:
            blacks.append(L * s_bpos.uniform())
            births += 1
            next_black = now + s_bgap.exponential(cfg.lam)
        else:
            w = L * s_wpos.uniform()
            if blacks:
                tgt = nearest_particle(w, blacks, L)
                if circular_distance(w, tgt, L) <= cfg.epsilon:
                    blacks.remove(tgt)
                    deletions += 1
            next_white = now + s_wgap.exponential(1.0)
        times.append(now)
        counts.append(len(blacks))
    area += len(blacks) * (horizon - now)
    if len(blacks) != births - deletions:
        raise AssertionError("black-particle bookkeeping broke")
    return AnnihilationRun(
        times=np.asarray(times),
        counts=np.asarray(counts, dtype=float),
        births=births,
        deletions=deletions,
        time_avg_count=area / horizon,
        horizon=horizon,
    )


@dataclass
class ScanRow:
    """One cell of a stability scan."""

    lam: float
    L: float
    third: float  # v for the greedy server, epsilon for annihilation
    policy: str
    verdict: str
    slope: float
    slope_lo: float
    slope_hi: float
    reps: int


def stability_scan(
    model: str,
    lambdas,
    thirds,
    horizon: float,
    reps: int,
    rng: RngStream,
    L: float = 1.0,
    policy: str = GREEDY,
    lattice_sites: int = None,
) -> list:
    """Grid scan of drift verdicts.

    model 'greedy_circle' scans (lam, v); model 'annihilation' scans
    (lam, epsilon).  Each cell runs `reps` replications on dedicated
    substreams; the verdict is the majority class with ties reported
    inconclusive.
    """
    if model not in ("greedy_circle", "annihilation"):
        raise ValueError("model must be 'greedy_circle' or 'annihilation'")
    if reps < 1:
        raise ValueError("need reps >= 1")
    rows = []
    cell = 0
    for lam in lambdas:
        for third in thirds:
            slopes = []
            classes = []
            for r in range(reps):
                sub = rng.substream(cell, r)
                if model == "greedy_circle":
                    cfg = CircleConfig(
                        lam=lam, L=L, v=third, policy=policy,
                        lattice_sites=lattice_sites,
                    )
                    run = greedy_server_simulate(cfg, horizon, sub)
                else:
                    cfg = AnnihilationConfig(lam=lam, epsilon=third, L=L)
                    run = annihilation_simulate(cfg, horizon, sub)
                verdict = run.verdict()
                classes.append(verdict.klass)
                if not math.isnan(verdict.slope):
                    slopes.append(verdict.slope)
            best = max(set(classes), key=classes.count)
            if classes.count(best) * 2 <= len(classes):
                best = "inconclusive"
            if len(slopes) >= 2:
                arr = np.asarray(slopes)
                hw = 1.96 * arr.std(ddof=1) / math.sqrt(len(arr))
                slope, lo, hi = float(arr.mean()), float(arr.mean() - hw), float(arr.mean() + hw)
            elif slopes:
                slope = lo = hi = float(slopes[0])
            else:
                slope = lo = hi = math.nan
            rows.append(
                ScanRow(
                    lam=lam,
                    L=L,
                    third=third,
                    policy=policy if model == "greedy_circle" else "-",
                    verdict=best,
                    slope=slope,
                    slope_lo=lo,
                    slope_hi=hi,
                    reps=reps,
                )
            )
            cell += 1
    return rows
