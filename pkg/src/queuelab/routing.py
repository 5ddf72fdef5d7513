"""Workload-based routing models: join-the-shortest-queue and
partial-access routing on three servers.

Both models route an arriving customer to the less loaded of the
workloads it can see, breaking exact ties with a fair coin, then add
the service requirement to the chosen server and drain every workload
by the time to the next arrival.  The JSQ probe measures how fast two
copies started from different states forget their initial condition,
under common random numbers and under independent ones.  The
partial-access experiment classifies total-workload growth per initial
state and never merges verdicts across initials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec
from .inputs import InputProcess, traffic_intensity
from .rng import RngStream
from .stats import StabilityVerdict, drift_classify, ks_distance

_CHUNK = 1 << 16

# class -> (left server, right server), 0-indexed servers on a cycle
CLASS_SERVERS = {1: (0, 1), 2: (1, 2), 3: (2, 0)}


def jsq_step(state, sigma: float, t: float, rng: RngStream) -> tuple:
    """Route one customer to the strictly smaller workload, then drain.

    Consumes rng only on an exact tie (one uniform for the coin).
    """
    if sigma < 0 or t < 0:
        raise ValueError("sigma and t must be non-negative")
    v1, v2 = state
    if v1 < 0 or v2 < 0:
        raise ValueError("workloads must be non-negative")
    if v1 < v2:
        v1 += sigma
    elif v2 < v1:
        v2 += sigma
    elif rng.coin():
        v1 += sigma
    else:
        v2 += sigma
    v1 -= t
    v2 -= t
    return (v1 if v1 > 0.0 else 0.0, v2 if v2 > 0.0 else 0.0)


def _jsq_terminal(initial, sigmas, ts, coins) -> float:
    """Drive a JSQ path from pre-drawn sequences; return min workload."""
    v1, v2 = initial
    for k in range(len(sigmas)):
        s = sigmas[k]
        if v1 < v2:
            v1 += s
        elif v2 < v1:
            v2 += s
        elif coins[k] < 0.5:
            v1 += s
        else:
            v2 += s
        tk = ts[k]
        v1 -= tk
        v2 -= tk
        if v1 < 0.0:
            v1 = 0.0
        if v2 < 0.0:
            v2 = 0.0
    return v1 if v1 < v2 else v2


@dataclass
class JsqProbeResult:
    """Pairwise KS distances of terminal min workloads per initial state.

    ks_common[i, j] compares initials i and j after the same driving
    sequences; ks_independent after independent ones.  When the input
    is unstable the distances are meaningless and stable is False.
    """

    initials: tuple
    ks_common: np.ndarray
    ks_independent: np.ndarray
    mean_terminal_common: np.ndarray
    mean_terminal_independent: np.ndarray
    stable: bool
    customers: int
    reps: int


def jsq_stationarity_probe(
    proc: InputProcess,
    initials,
    customers: int,
    reps: int,
    rng: RngStream,
) -> JsqProbeResult:
    """Forgetting probe: run every initial state to the same horizon.

    Common-random-number mode reuses one driving realization (service,
    interarrival, tie coins) across all initials per replication, so
    identical initials give identical paths and distance exactly 0.
    """
    if reps < 2:
        raise ValueError("need reps >= 2")
    if customers < 1:
        raise ValueError("need customers >= 1")
    inits = tuple((float(a), float(b)) for a, b in initials)
    if any(a < 0 or b < 0 for a, b in inits):
        raise ValueError("initial workloads must be non-negative")
    n_init = len(inits)
    term_c = np.empty((n_init, reps))
    term_i = np.empty((n_init, reps))
    for r in range(reps):
        sig, t = proc.pairs(customers, rng.substream(0, r))
        coins = rng.substream(1, r).uniforms(customers)
        sl, tl, cl = sig.tolist(), t.tolist(), coins.tolist()
        for i, init in enumerate(inits):
            term_c[i, r] = _jsq_terminal(init, sl, tl, cl)
    for i in range(n_init):
        for r in range(reps):
            sig, t = proc.pairs(customers, rng.substream(2, i, r))
            coins = rng.substream(3, i, r).uniforms(customers)
            term_i[i, r] = _jsq_terminal(
                inits[i], sig.tolist(), t.tolist(), coins.tolist()
            )
    ks_c = np.zeros((n_init, n_init))
    ks_i = np.zeros((n_init, n_init))
    for i in range(n_init):
        for j in range(i + 1, n_init):
            ks_c[i, j] = ks_c[j, i] = ks_distance(term_c[i], term_c[j])
            ks_i[i, j] = ks_i[j, i] = ks_distance(term_i[i], term_i[j])
    return JsqProbeResult(
        initials=inits,
        ks_common=ks_c,
        ks_independent=ks_i,
        mean_terminal_common=term_c.mean(axis=1),
        mean_terminal_independent=term_i.mean(axis=1),
        stable=traffic_intensity(proc, 2).stable,
        customers=customers,
        reps=reps,
    )


def partial_access_step(
    state,
    cls: int,
    f_left: DistributionSpec,
    f_right: DistributionSpec,
    t: float,
    rng: RngStream,
) -> tuple:
    """Route a class-cls customer to its less loaded accessible server.

    The service requirement is drawn only after the routing decision,
    from f_left if the left accessible server won, else from f_right.
    The third, inaccessible server only drains.
    """
    if cls not in CLASS_SERVERS:
        raise ValueError("class must be 1, 2 or 3")
    if t < 0:
        raise ValueError("t must be non-negative")
    w = list(state)
    if len(w) != 3 or any(v < 0 for v in w):
        raise ValueError("state must be three non-negative workloads")
    li, ri = CLASS_SERVERS[cls]
    if w[li] < w[ri]:
        chosen, spec = li, f_left
    elif w[ri] < w[li]:
        chosen, spec = ri, f_right
    elif rng.coin():
        chosen, spec = li, f_left
    else:
        chosen, spec = ri, f_right
    w[chosen] += spec.sample(rng)
    out = []
    for v in w:
        d = v - t
        out.append(d if d > 0.0 else 0.0)
    return tuple(out)


@dataclass
class PartialAccessRow:
    initial_id: int
    rep: int
    growth_rate: float
    verdict: StabilityVerdict


@dataclass
class PartialAccessResult:
    """Per-initial growth rates and verdicts; initials never merged."""

    initials: tuple
    rows: list
    verdicts_by_initial: dict
    mean_growth_by_initial: dict
    arrivals: int
    reps: int


def partial_access_experiment(
    lam: float,
    f_left: DistributionSpec,
    f_right: DistributionSpec,
    initials,
    arrivals: int,
    reps: int,
    rng: RngStream,
) -> PartialAccessResult:
    """Simulate Poisson arrivals with uniform classes over three servers.

    Each (initial, replication) pair runs on its own substream for the
    given number of arrivals; the total workload at arrival epochs is
    drift-classified per path.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if arrivals < 10:
        raise ValueError("need at least 10 arrivals")
    if reps < 1:
        raise ValueError("need reps >= 1")
    inits = tuple(tuple(float(v) for v in init) for init in initials)
    if any(len(w) != 3 or min(w) < 0 for w in inits):
        raise ValueError("each initial must be three non-negative workloads")
    stride = max(1, arrivals // 800)
    rows = []
    verdicts = {i: [] for i in range(len(inits))}
    growth = {i: [] for i in range(len(inits))}
    for i, init in enumerate(inits):
        for r in range(reps):
            sub = rng.substream(i, r)
            state = init
            now = 0.0
            times = [0.0]
            totals = [sum(state)]
            for k in range(arrivals):
                dt = sub.exponential(lam)
                cls = 1 + sub.integers(0, 3)
                state = partial_access_step(state, cls, f_left, f_right, dt, sub)
                now += dt
                if (k + 1) % stride == 0:
                    times.append(now)
                    totals.append(sum(state))
            verdict = drift_classify(times, totals)
            rate = (totals[-1] - totals[0]) / times[-1] if times[-1] > 0 else math.nan
            rows.append(PartialAccessRow(i, r, rate, verdict))
            verdicts[i].append(verdict.klass)
            growth[i].append(rate)
    return PartialAccessResult(
        initials=inits,
        rows=rows,
        verdicts_by_initial=verdicts,
        mean_growth_by_initial={
            i: float(np.mean(v)) for i, v in growth.items()
        },
        arrivals=arrivals,
        reps=reps,
    )
