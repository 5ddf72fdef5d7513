"""Input processes: (service, interarrival) pair sequences for queues.

An InputProcess produces the driving sequence (sigma_n, t_n) of service
times and interarrival times.  The iid mode draws two mutually
independent i.i.d. sequences.  The modulated mode runs a two-state
Markov chain started from its stationary law and draws each pair from
the state's own distributions, giving a stationary ergodic but
dependent input.

Uniform consumption is fixed per step (2 uniforms iid, 3 modulated,
plus 1 up front for the modulated initial state), so chunked generation
yields the same sequence as one-shot generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec
from .rng import RngStream


@dataclass(frozen=True)
class InputProcess:
    """Driving input for a queue.

    iid:  service, interarrival used for every customer.
    modulated: switch is a 2x2 row-stochastic matrix over hidden states
    {0, 1}; state i uses services[i] / interarrivals[i].
    """

    service: DistributionSpec = None
    interarrival: DistributionSpec = None
    switch: tuple = None
    services: tuple = None
    interarrivals: tuple = None

    def __post_init__(self):
        if self.switch is None:
            if self.service is None or self.interarrival is None:
                raise ValueError("iid process needs service and interarrival")
        else:
            sw = tuple(tuple(float(v) for v in row) for row in self.switch)
            object.__setattr__(self, "switch", sw)
            if len(sw) != 2 or any(len(r) != 2 for r in sw):
                raise ValueError("switch must be a 2x2 matrix")
            for row in sw:
                if any(v < 0 for v in row) or abs(sum(row) - 1.0) > 1e-12:
                    raise ValueError("switch rows must be probabilities summing to 1")
            if sw[0][1] + sw[1][0] <= 0:
                raise ValueError("switch matrix must leave both states reachable")
            if self.services is None or self.interarrivals is None:
                raise ValueError("modulated process needs per-state distributions")
            if len(self.services) != 2 or len(self.interarrivals) != 2:
                raise ValueError("modulated process needs 2 per-state distributions")

    @property
    def modulated(self) -> bool:
        return self.switch is not None

    def stationary_law(self) -> tuple:
        """Stationary distribution of the modulating chain."""
        p01, p10 = self.switch[0][1], self.switch[1][0]
        return (p10 / (p01 + p10), p01 / (p01 + p10))

    def mean_service(self) -> float:
        if not self.modulated:
            return self.service.mean()
        pi = self.stationary_law()
        return pi[0] * self.services[0].mean() + pi[1] * self.services[1].mean()

    def mean_interarrival(self) -> float:
        if not self.modulated:
            return self.interarrival.mean()
        pi = self.stationary_law()
        return (
            pi[0] * self.interarrivals[0].mean()
            + pi[1] * self.interarrivals[1].mean()
        )

    def pairs(self, n: int, rng: RngStream):
        """Draw (sigma, t) arrays of length n."""
        gen = self.pair_stream(rng, chunk=n)
        return next(gen) if n > 0 else (np.empty(0), np.empty(0))

    def pair_stream(self, rng: RngStream, chunk: int = 1 << 18):
        """Yield (sigma, t) array chunks forever; fixed uniform layout."""
        if not self.modulated:
            while True:
                u = rng.uniforms(2 * chunk)
                yield self.service.ppf(u[0::2]), self.interarrival.ppf(u[1::2])
        else:
            pi0 = self.stationary_law()[0]
            state = 0 if rng.uniform() < pi0 else 1
            stay0 = self.switch[0][0]
            stay1 = self.switch[1][1]
            while True:
                u = rng.uniforms(3 * chunk)
                states = np.empty(chunk, dtype=np.int64)
                uj = u[0::3]
                for k in range(chunk):
                    if state == 0:
                        state = 0 if uj[k] < stay0 else 1
                    else:
                        state = 1 if uj[k] < stay1 else 0
                    states[k] = state
                us, ut = u[1::3], u[2::3]
                sig = np.where(
                    states == 0, self.services[0].ppf(us), self.services[1].ppf(us)
                )
                t = np.where(
                    states == 0,
                    self.interarrivals[0].ppf(ut),
                    self.interarrivals[1].ppf(ut),
                )
                yield sig, t


def iid_process(
    service: DistributionSpec, interarrival: DistributionSpec
) -> InputProcess:
    return InputProcess(service=service, interarrival=interarrival)


def modulated_process(switch, services, interarrivals) -> InputProcess:
    return InputProcess(
        service=None,
        interarrival=None,
        switch=tuple(tuple(row) for row in switch),
        services=tuple(services),
        interarrivals=tuple(interarrivals),
    )


@dataclass(frozen=True)
class Intensity:
    """Traffic intensity report: rho may be math.inf, never a lie."""

    rho: float
    finite: bool
    stable: bool


def traffic_intensity(proc: InputProcess, m: int = 1) -> Intensity:
    """rho = E sigma / E t and stability of an m-server queue.

    Infinite-mean service yields rho = inf, finite = False.  The
    boundary rho == m is classified unstable.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    es = proc.mean_service()
    et = proc.mean_interarrival()
    if not math.isfinite(et) or et <= 0:
        raise ValueError("interarrival mean must be positive and finite")
    if not math.isfinite(es):
        return Intensity(rho=math.inf, finite=False, stable=False)
    rho = es / et
    return Intensity(rho=rho, finite=True, stable=rho < m)
