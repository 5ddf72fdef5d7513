"""Slotted multi-access channel with a shared transmission probability.

Each slot, every one of the W backlogged packets transmits
independently with probability p; the slot carries a packet out iff
exactly one transmits.  Arrivals are Poisson per slot.  A protocol
observes one binary fact about the slot (success, empty, or collision)
and maps (p, bit) to the next p.  (W_n, p_n) is then a Markov chain,
and the interesting question is which feedbacks and rules make it
positive recurrent, and up to what arrival rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream
from .stats import STABLE, drift_classify

SUCCESS = "success"
EMPTY = "empty"
COLLISION = "collision"
FEEDBACK_KINDS = (SUCCESS, EMPTY, COLLISION)

EVIDENCE_NOTE = (
    "simulation evidence about specific update rules only; no feedback "
    "class is proven to have, or to lack, a stabilizing protocol"
)


@dataclass(frozen=True)
class SlotState:
    """Backlog and the common transmission probability."""

    W: int
    p: float

    def __post_init__(self):
        if self.W < 0:
            raise ValueError("backlog must be non-negative")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")


@dataclass(frozen=True)
class Feedback:
    """One bit per slot: did this kind's event occur."""

    kind: str
    bit: int


@dataclass(frozen=True)
class Protocol:
    """Feedback kind plus a deterministic update map (p, bit) -> p'."""

    feedback: str
    update: object
    p0: float = 1.0
    p_min: float = 1e-9
    name: str = "custom"

    def __post_init__(self):
        if self.feedback not in FEEDBACK_KINDS:
            raise ValueError(f"feedback must be one of {FEEDBACK_KINDS}")
        if not 0.0 < self.p_min <= 1.0:
            raise ValueError("p_min must lie in (0, 1]")
        if not self.p_min <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [p_min, 1]")

    def apply(self, p: float, bit: int) -> float:
        """Next probability, clamped into [p_min, 1]."""
        nxt = float(self.update(p, bit))
        if math.isnan(nxt):
            raise ValueError("protocol update produced NaN")
        return min(1.0, max(self.p_min, nxt))


def multiplicative_rule(
    a: float, b: float, feedback: str = COLLISION,
    p0: float = 1.0, p_min: float = 1e-9,
) -> Protocol:
    """p' = a*p on bit 0, b*p on bit 1."""
    if a <= 0 or b <= 0:
        raise ValueError("multiplicative factors must be positive")
    return Protocol(
        feedback=feedback,
        update=lambda p, bit: (b if bit else a) * p,
        p0=p0,
        p_min=p_min,
        name=f"mult({a:g},{b:g})",
    )


def additive_rule(
    da: float, db: float, feedback: str = COLLISION,
    p0: float = 1.0, p_min: float = 1e-9,
) -> Protocol:
    """p' = p + da on bit 0, p + db on bit 1 (then clamped)."""
    return Protocol(
        feedback=feedback,
        update=lambda p, bit: p + (db if bit else da),
        p0=p0,
        p_min=p_min,
        name=f"add({da:g},{db:g})",
    )


def table_rule(
    rows, feedback: str = SUCCESS, p0: float = 1.0, p_min: float = 1e-9,
) -> Protocol:
    """Step-function rule: rows of (threshold, p_on_0, p_on_1).

    The row with the largest threshold <= p applies; the first
    threshold must be 0 so every p is covered.
    """
    rows = [(float(t), float(v0), float(v1)) for t, v0, v1 in rows]
    if not rows:
        raise ValueError("table needs at least one row")
    if rows[0][0] != 0.0:
        raise ValueError("first table threshold must be 0")
    for (t0, _, _), (t1, _, _) in zip(rows, rows[1:]):
        if t1 <= t0:
            raise ValueError("table thresholds must be strictly increasing")
    if any(v <= 0 for _, v0, v1 in rows for v in (v0, v1)):
        raise ValueError("table probabilities must be positive")
    thresholds = [t for t, _, _ in rows]

    def update(p, bit):
        i = 0
        for j, t in enumerate(thresholds):
            if t <= p:
                i = j
            else:
                break
        return rows[i][2] if bit else rows[i][1]

    return Protocol(
        feedback=feedback, update=update, p0=p0, p_min=p_min,
        name=f"table[{len(rows)}]",
    )


def slot_step(
    state: SlotState, lam: float, protocol: Protocol, rng: RngStream
):
    """Advance one slot: (new state, feedback, departures in {0, 1})."""
    if lam < 0:
        raise ValueError("arrival rate must be non-negative")
    k = rng.binomial(state.W, state.p) if state.W > 0 else 0
    departures = 1 if k == 1 else 0
    arrivals = rng.poisson(lam) if lam > 0 else 0
    if protocol.feedback == SUCCESS:
        bit = 1 if k == 1 else 0
    elif protocol.feedback == EMPTY:
        bit = 1 if k == 0 else 0
    else:
        bit = 1 if k >= 2 else 0
    new_p = protocol.apply(state.p, bit)
    new_state = SlotState(W=state.W - departures + arrivals, p=new_p)
    return new_state, Feedback(kind=protocol.feedback, bit=bit), departures


@dataclass
class ChannelRun:
    """Slot-by-slot trajectory; W and p have one extra terminal entry."""

    W: np.ndarray
    p: np.ndarray
    bits: np.ndarray
    departures: np.ndarray
    throughput: float
    arrivals: int
    slots: int

    def verdict(self, **kwargs):
        n = np.arange(len(self.W), dtype=float)
        return drift_classify(n, self.W.astype(float), **kwargs)


def run_protocol(
    lam: float,
    protocol: Protocol,
    slots: int,
    rng: RngStream,
    w0: int = 0,
) -> ChannelRun:
    """Run the chain for the given number of slots."""
    if slots < 1:
        raise ValueError("need at least one slot")
    if w0 < 0:
        raise ValueError("initial backlog must be non-negative")
    state = SlotState(W=int(w0), p=protocol.p0)
    ws = [state.W]
    ps = [state.p]
    bits = []
    deps = []
    total_arrivals = 0
    for _ in range(slots):
        prev_w = state.W
        state, fb, dep = slot_step(state, lam, protocol, rng)
        total_arrivals += state.W - prev_w + dep
        ws.append(state.W)
        ps.append(state.p)
        bits.append(fb.bit)
        deps.append(dep)
    deps = np.asarray(deps, dtype=np.int64)
    served = int(deps.sum())
    if served > total_arrivals + w0:
        raise AssertionError("served more packets than ever existed")
    return ChannelRun(
        W=np.asarray(ws, dtype=np.int64),
        p=np.asarray(ps),
        bits=np.asarray(bits, dtype=np.int64),
        departures=deps,
        throughput=served / slots,
        arrivals=total_arrivals,
        slots=slots,
    )


@dataclass
class ProbeRow:
    lam: float
    verdicts: list
    stable_fraction: float
    mean_slope: float
    mean_throughput: float


@dataclass
class ErgodicityProbe:
    """Per-rate verdicts and the largest rate judged stable."""

    rows: list
    empirical_capacity: float | None
    protocol_name: str
    feedback: str
    slots: int
    reps: int
    note: str = EVIDENCE_NOTE


def ergodicity_probe(
    lambdas,
    protocol: Protocol,
    slots: int,
    reps: int,
    rng: RngStream,
    w0: int = 0,
) -> ErgodicityProbe:
    """Drift-classify backlog paths on a rate grid.

    A rate counts as stable when a strict majority of its replications
    classify stable; the capacity estimate is the largest such rate.
    Whatever the feedback kind, the result is evidence about this one
    rule, never about the class of rules.
    """
    lambdas = [float(l) for l in lambdas]
    if any(not 0.0 < l < 1.0 for l in lambdas):
        raise ValueError("rates must lie in (0, 1)")
    if reps < 1:
        raise ValueError("need reps >= 1")
    rows = []
    for li, lam in enumerate(lambdas):
        verdicts = []
        slopes = []
        thr = []
        for r in range(reps):
            run = run_protocol(lam, protocol, slots, rng.substream(li, r), w0=w0)
            v = run.verdict()
            verdicts.append(v.klass)
            slopes.append(v.slope)
            thr.append(run.throughput)
        stable = sum(1 for v in verdicts if v == STABLE)
        rows.append(
            ProbeRow(
                lam=lam,
                verdicts=verdicts,
                stable_fraction=stable / reps,
                mean_slope=float(np.mean(slopes)),
                mean_throughput=float(np.mean(thr)),
            )
        )
    capacity = None
    for row in rows:
        if row.stable_fraction > 0.5:
            if capacity is None or row.lam > capacity:
                capacity = row.lam
    return ErgodicityProbe(
        rows=rows,
        empirical_capacity=capacity,
        protocol_name=protocol.name,
        feedback=protocol.feedback,
        slots=slots,
        reps=reps,
    )
