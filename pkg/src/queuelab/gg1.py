"""Single-server FCFS queue: Lindley recursion and the backward scheme.

The forward chain is the waiting-time recursion W_{n+1} = max(0, W_n +
sigma_n - t_n) started from W_1 = x >= 0.  The backward scheme realizes
one sequence of increments xi_{-1}, xi_{-2}, ... and tracks

    M_k = max(0, S_1, ..., S_{k-1}, x + S_k),   S_k = xi_{-1}+...+xi_{-k},

which equals the wait after k increments in distribution.  Along a
fixed realization, M_k with x = 0 is non-decreasing, and for every x
the sequence freezes at M = max(0, sup_k S_k) once k passes the
coupling index nu(x) = max{k >= 0 : x + S_k >= 0}.  Both facts are
checked on every simulated path, not just in tests.

nu(x) looks into the infinite future, so a finite run can only certify
a candidate: the last index with x + S_k >= 0, trusted once a
confirmation window of further steps brings no return.  The functions
below report "not yet" (coupling_time None) instead of silently
truncating when that window is not reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .inputs import InputProcess
from .rng import RngStream
from .stats import EstimateWithCI, wilson_interval

_CHUNK = 1 << 16


@dataclass
class Gg1Path:
    """Forward waiting-time path with its driving sequence retained."""

    initial_delay: float
    waits: np.ndarray  # W_1 .. W_n
    sigmas: np.ndarray  # sigma_1 .. sigma_{n-1}
    ts: np.ndarray  # t_1 .. t_{n-1}

    @property
    def partial_sums(self) -> np.ndarray:
        """S_0 = 0, S_k = sum of the first k increments sigma_i - t_i."""
        return np.concatenate([[0.0], np.cumsum(self.sigmas - self.ts)])


@dataclass
class LoynesRecord:
    """One realized backward path.

    backward_maxima[k-1] is M_k, built from k increments.
    coupling_time is the confirmed nu(x), or None when the horizon
    ended without a confirmation window after the last candidate.
    sup_value is M = max(0, sup S_k), meaningful when coupled.
    """

    initial_delay: float
    backward_maxima: np.ndarray
    coupling_time: int | None
    sup_value: float | None

    @property
    def coupled(self) -> bool:
        return self.coupling_time is not None


def lindley_step(w: float, sigma: float, t: float) -> float:
    """One waiting-time update: max(0, w + sigma - t)."""
    if w < 0 or sigma < 0 or t < 0:
        raise ValueError("lindley_step needs non-negative w, sigma, t")
    return max(0.0, w + sigma - t)


def simulate_forward(
    proc: InputProcess, x: float, n: int, rng: RngStream
) -> Gg1Path:
    """Waits of customers 1..n starting from W_1 = x."""
    if x < 0:
        raise ValueError("initial delay must be >= 0")
    if n < 1:
        raise ValueError("need at least one customer")
    sigmas = np.empty(n - 1)
    ts = np.empty(n - 1)
    out = [x]
    w = x
    filled = 0
    stream = proc.pair_stream(rng, chunk=min(_CHUNK, max(1, n - 1)))
    while filled < n - 1:
        sig, t = next(stream)
        take = min(len(sig), n - 1 - filled)
        sigmas[filled : filled + take] = sig[:take]
        ts[filled : filled + take] = t[:take]
        sl = sig[:take].tolist()
        tl = t[:take].tolist()
        for k in range(take):
            # left-associated w + sigma - t, bit-identical to lindley_step
            w = w + sl[k] - tl[k]
            if w < 0.0:
                w = 0.0
            out.append(w)
        filled += take
    return Gg1Path(
        initial_delay=x, waits=np.asarray(out), sigmas=sigmas, ts=ts
    )


def _check_backward_invariants(x: float, maxima: np.ndarray, candidate: int):
    # guaranteed by construction; violation means a broken implementation
    if x == 0.0 and np.any(np.diff(maxima) < 0.0):
        raise AssertionError("backward maxima decreased on a zero-start path")
    if candidate < len(maxima):
        frozen = maxima[candidate:]
        if np.any(frozen != frozen[0]):
            raise AssertionError("backward maxima moved past the coupling index")


def loynes_backward(
    proc: InputProcess,
    x: float,
    n: int,
    rng: RngStream,
    confirm: int = 1000,
) -> LoynesRecord:
    """Backward maxima M_1..M_n over one realized increment sequence.

    The coupling candidate is the last k with x + S_k >= 0 (k = 0
    always qualifies).  It is reported as coupling_time only when at
    least `confirm` further steps within the horizon brought no return
    above the level; otherwise coupling_time is None ("not yet").
    """
    if x < 0:
        raise ValueError("initial delay must be >= 0")
    if n < 1:
        raise ValueError("need horizon n >= 1")
    maxima = []
    s = 0.0
    run_max = 0.0  # max(0, S_1, ..., S_k)
    candidate = 0
    filled = 0
    stream = proc.pair_stream(rng, chunk=min(_CHUNK, n))
    while filled < n:
        sig, t = next(stream)
        take = min(len(sig), n - filled)
        sl = sig[:take].tolist()
        tl = t[:take].tolist()
        for k in range(take):
            s = s + sl[k] - tl[k]
            shifted = x + s
            maxima.append(run_max if run_max > shifted else shifted)
            if shifted >= 0.0:
                candidate = filled + k + 1
            if s > run_max:
                run_max = s
        filled += take
    maxima = np.asarray(maxima)
    _check_backward_invariants(x, maxima, candidate)
    coupled = n - candidate >= max(1, confirm)
    return LoynesRecord(
        initial_delay=x,
        backward_maxima=maxima,
        coupling_time=candidate if coupled else None,
        sup_value=run_max if coupled else None,
    )


def coupling_time(
    proc: InputProcess,
    x: float,
    rng: RngStream,
    confirm: int = 1000,
    cap: int = 10**8,
) -> int | None:
    """Run backward until the coupling candidate survives `confirm` steps.

    Returns the confirmed nu(x), or None if the cap was hit first.
    """
    if x < 0:
        raise ValueError("initial delay must be >= 0")
    s = 0.0
    candidate = 0
    k = 0
    chunk = min(_CHUNK, max(256, confirm + 16))
    stream = proc.pair_stream(rng, chunk=chunk)
    while k < cap:
        sig, t = next(stream)
        for v in (sig - t).tolist():
            s += v
            k += 1
            if x + s >= 0.0:
                candidate = k
            elif k - candidate >= confirm:
                return candidate
            if k >= cap:
                break
    return None


def tv_bound_estimate(
    proc: InputProcess,
    x: float,
    n: int,
    reps: int,
    rng: RngStream,
    confirm: int = 1000,
    cap: int = 10**6,
) -> EstimateWithCI:
    """Estimate P(nu(x) > n), the total-variation bound at horizon n.

    Each replication runs the backward walk on its own substream until
    its coupling candidate is confirmed.  Replications whose cap was
    hit count as nu > n (the conservative side).  Wilson interval.
    """
    if reps < 100:
        raise ValueError("need reps >= 100 for a meaningful interval")
    if n < 0:
        raise ValueError("n must be >= 0")
    exceed = 0
    for r in range(reps):
        nu = coupling_time(proc, x, rng.substream(r), confirm=confirm, cap=cap)
        if nu is None or nu > n:
            exceed += 1
    return wilson_interval(exceed, reps)
