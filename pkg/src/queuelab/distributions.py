"""Service and interarrival distributions with exact tail machinery.

A DistributionSpec is a frozen value object: kind plus parameters.  It
knows its mean, its tail function P(X > x), its integrated tail
min(1, integral of the tail from x to infinity), and how to sample by
inverse transform.  Sampling always consumes exactly one uniform per
draw, for every kind, so sequences stay aligned under common random
numbers no matter which distributions are plugged in.

Text forms like exp(1.0), pareto(2.5,1.0), det(3), uniform(0,2),
weibull_tail(0.5) round-trip through parse_distribution / to_text and
are what config files and CSV metadata headers use.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import integrate

_KINDS = ("det", "exp", "uniform", "pareto", "weibull_tail", "empirical")


@dataclass(frozen=True)
class DistributionSpec:
    """A non-negative distribution identified by kind and parameters.

    kinds and parameters:
      det(c)            point mass at c >= 0
      exp(rate)         exponential with the given rate
      uniform(a, b)     uniform on [a, b], 0 <= a < b
      pareto(alpha, x_min)   P(X > x) = (x_min / x)^alpha for x >= x_min
      weibull_tail(beta)     P(X > x) = exp(-x^beta) with 0 < beta < 1
      empirical(samples)     uniform pick from a fixed sorted sample
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(self.params))
        p = self.params
        if self.kind == "det":
            if len(p) != 1 or p[0] < 0:
                raise ValueError("det(c) needs a single c >= 0")
        elif self.kind == "exp":
            if len(p) != 1 or p[0] <= 0:
                raise ValueError("exp(rate) needs rate > 0")
        elif self.kind == "uniform":
            if len(p) != 2 or not (0 <= p[0] < p[1]):
                raise ValueError("uniform(a,b) needs 0 <= a < b")
        elif self.kind == "pareto":
            if len(p) != 2 or p[0] <= 0 or p[1] <= 0:
                raise ValueError("pareto(alpha,x_min) needs alpha > 0, x_min > 0")
        elif self.kind == "weibull_tail":
            if len(p) != 1 or not (0 < p[0] < 1):
                raise ValueError("weibull_tail(beta) needs 0 < beta < 1")
        elif self.kind == "empirical":
            if len(p) < 1 or any(v < 0 for v in p):
                raise ValueError("empirical(...) needs non-negative samples")
            object.__setattr__(self, "params", tuple(sorted(p)))

    # -- moments ------------------------------------------------------

    def mean(self) -> float:
        """Exact mean; math.inf for infinite-mean specs."""
        p = self.params
        if self.kind == "det":
            return p[0]
        if self.kind == "exp":
            return 1.0 / p[0]
        if self.kind == "uniform":
            return 0.5 * (p[0] + p[1])
        if self.kind == "pareto":
            alpha, x_min = p
            if alpha <= 1:
                return math.inf
            return alpha * x_min / (alpha - 1)
        if self.kind == "weibull_tail":
            return math.gamma(1.0 + 1.0 / p[0])
        return float(np.mean(p))

    # -- tails --------------------------------------------------------

    def tail(self, x: float) -> float:
        """P(X > x).  Equals 1 for all x < 0."""
        if x < 0:
            return 1.0
        p = self.params
        if self.kind == "det":
            return 1.0 if x < p[0] else 0.0
        if self.kind == "exp":
            return math.exp(-p[0] * x)
        if self.kind == "uniform":
            a, b = p
            if x < a:
                return 1.0
            if x >= b:
                return 0.0
            return (b - x) / (b - a)
        if self.kind == "pareto":
            alpha, x_min = p
            if x < x_min:
                return 1.0
            return (x_min / x) ** alpha
        if self.kind == "weibull_tail":
            return math.exp(-(x ** p[0]))
        n = len(p)
        return float(np.sum(np.asarray(p) > x)) / n

    # -- sampling -----------------------------------------------------

    def ppf(self, u):
        """Inverse CDF, vectorized over u in [0, 1)."""
        u = np.asarray(u, dtype=float)
        p = self.params
        if self.kind == "det":
            return np.full_like(u, p[0])
        if self.kind == "exp":
            return -np.log1p(-u) / p[0]
        if self.kind == "uniform":
            a, b = p
            return a + (b - a) * u
        if self.kind == "pareto":
            alpha, x_min = p
            return x_min * (1.0 - u) ** (-1.0 / alpha)
        if self.kind == "weibull_tail":
            return (-np.log1p(-u)) ** (1.0 / p[0])
        s = np.asarray(p)
        idx = np.minimum((u * len(s)).astype(np.int64), len(s) - 1)
        return s[idx]

    def sample(self, rng) -> float:
        """One draw; consumes exactly one uniform from rng, every kind."""
        return float(self.ppf(rng.uniform()))

    def sample_n(self, n: int, rng) -> np.ndarray:
        """n draws; consumes exactly n uniforms from rng."""
        return self.ppf(rng.uniforms(n))

    def to_text(self) -> str:
        """Canonical text form, parse_distribution round-trips it."""
        args = ",".join(f"{v:g}" for v in self.params)
        return f"{self.kind}({args})"


# constructor helpers keep call sites readable

def det(c: float) -> DistributionSpec:
    return DistributionSpec("det", (float(c),))


def exponential(rate: float) -> DistributionSpec:
    return DistributionSpec("exp", (float(rate),))


def uniform(a: float, b: float) -> DistributionSpec:
    return DistributionSpec("uniform", (float(a), float(b)))


def pareto(alpha: float, x_min: float) -> DistributionSpec:
    return DistributionSpec("pareto", (float(alpha), float(x_min)))


def weibull_tail(beta: float) -> DistributionSpec:
    return DistributionSpec("weibull_tail", (float(beta),))


def empirical(samples) -> DistributionSpec:
    return DistributionSpec("empirical", tuple(float(v) for v in samples))


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*\(\s*([^()]*?)\s*\)\s*$")


def parse_distribution(text: str) -> DistributionSpec:
    """Parse a text form like 'pareto(2.5,1.0)' into a DistributionSpec."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse distribution {text!r}")
    kind, body = m.group(1), m.group(2)
    if kind not in _KINDS:
        raise ValueError(f"unknown distribution kind {kind!r} in {text!r}")
    try:
        params = tuple(float(tok) for tok in body.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"bad numeric parameter in {text!r}") from None
    return DistributionSpec(kind, params)


# -- integrated tail --------------------------------------------------

def integrated_tail(spec: DistributionSpec, x: float) -> float:
    """min(1, integral_x^inf P(X > y) dy), the integrated-tail tail.

    Closed form for every kind except weibull_tail, which is evaluated
    through the incomplete gamma function (relative error well under
    1e-8).  A Pareto with alpha <= 1 has a divergent tail integral, so
    the min() clamp makes the result identically 1.
    """
    if x < 0:
        x = 0.0
    p = spec.params
    if spec.kind == "det":
        raw = max(0.0, p[0] - x)
    elif spec.kind == "exp":
        raw = math.exp(-p[0] * x) / p[0]
    elif spec.kind == "uniform":
        a, b = p
        if x >= b:
            raw = 0.0
        elif x >= a:
            raw = (b - x) ** 2 / (2.0 * (b - a))
        else:
            raw = (a - x) + 0.5 * (b - a)
    elif spec.kind == "pareto":
        alpha, x_min = p
        if alpha <= 1:
            return 1.0
        if x <= x_min:
            raw = (x_min - x) + x_min / (alpha - 1.0)
        else:
            raw = x_min**alpha * x ** (1.0 - alpha) / (alpha - 1.0)
    elif spec.kind == "weibull_tail":
        beta = p[0]
        # integral_x^inf exp(-y^beta) dy = Gamma(1/beta, x^beta) / beta
        from scipy.special import gamma as _gamma, gammaincc

        a = 1.0 / beta
        raw = _gamma(a) * gammaincc(a, x**beta) / beta
    else:
        s = np.asarray(p)
        raw = float(np.mean(np.clip(s - x, 0.0, None)))
    return min(1.0, raw)


def integrated_tail_quadrature(spec: DistributionSpec, x: float) -> float:
    """Quadrature oracle for integrated_tail, used to cross-check it."""
    if x < 0:
        x = 0.0
    if spec.kind == "pareto" and spec.params[0] <= 1:
        return 1.0
    val, _ = integrate.quad(spec.tail, x, math.inf, limit=400)
    return min(1.0, val)
