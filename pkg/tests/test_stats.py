"""Estimators and the drift classifier on synthetic paths with known answers."""

import math

import numpy as np
import pytest

from queuelab import (
    EstimateWithCI,
    RngStream,
    batch_means_ci,
    drift_classify,
    ks_critical_value,
    ks_distance,
    pareto,
    regenerative_ci,
    tail_index_hill,
    wilson_interval,
)


def test_estimate_with_ci_bounds():
    e = EstimateWithCI(point=1.0, half_width=0.2, method="batch_means")
    assert e.lo == pytest.approx(0.8)
    assert e.hi == pytest.approx(1.2)
    assert e.contains(1.0) and not e.contains(1.3)
    with pytest.raises(ValueError):
        EstimateWithCI(point=0.0, half_width=0.1, method="bootstrap")


# drift classifier on canonical trajectories


def test_drift_linear_growth_is_transient():
    t = np.arange(1.0, 4001.0)
    g = np.random.default_rng(7)
    v = drift_classify(t, t + g.normal(0.0, 5.0, t.size))
    assert v.klass == "transient"
    assert v.slope_ci[0] > 0.0


def test_drift_constant_level_is_stable():
    t = np.arange(1.0, 4001.0)
    g = np.random.default_rng(8)
    v = drift_classify(t, 5.0 + g.normal(0.0, 1.0, t.size))
    assert v.klass == "stable"
    assert v.slope_ci[0] <= 0.0 <= v.slope_ci[1]


def test_drift_sqrt_growth_is_null_boundary_candidate():
    # slope CI straddles 0 at this noise level but the level keeps
    # climbing, the signature of boundary growth
    t = np.arange(1.0, 4001.0)
    g = np.random.default_rng(0)
    v = drift_classify(t, np.sqrt(t) + g.normal(0.0, 10.0, t.size))
    assert v.klass == "null_boundary_candidate"


def test_drift_draining_path_is_inconclusive():
    t = np.arange(1.0, 4001.0)
    g = np.random.default_rng(9)
    v = drift_classify(t, 4000.0 - 0.9 * t + g.normal(0.0, 5.0, t.size))
    assert v.klass == "inconclusive"
    assert v.slope_ci[1] < 0.0


def test_drift_flat_zero_path_is_stable():
    t = np.arange(1.0, 501.0)
    v = drift_classify(t, np.zeros(t.size))
    assert v.klass == "stable"


def test_drift_needs_matching_lengths():
    with pytest.raises(ValueError):
        drift_classify([1.0, 2.0], [1.0])


# Kolmogorov-Smirnov distance


def test_ks_identical_samples_zero():
    x = np.random.default_rng(1).normal(size=500)
    assert ks_distance(x, x) == 0.0


def test_ks_symmetry():
    g = np.random.default_rng(2)
    a, b = g.normal(size=400), g.normal(1.0, 1.0, size=300)
    assert ks_distance(a, b) == ks_distance(b, a)


def test_ks_disjoint_supports():
    assert ks_distance([1.0, 2.0, 3.0], [10.0, 11.0]) == 1.0


def test_ks_known_small_case():
    # ecdfs step at 1,2,3 vs 2,3,4; max gap is 1/3 just below 2... at
    # x=1: 1/3 vs 0; at x in [2,3): 2/3 vs 1/3; gap 1/3 throughout
    assert ks_distance([1.0, 2.0, 3.0], [2.0, 3.0, 4.0]) == pytest.approx(1.0 / 3.0)


def test_ks_critical_value_formula():
    # c(alpha) * sqrt((n1+n2)/(n1*n2)) with c(0.01) = 1.628
    got = ks_critical_value(10_000, 10_000, alpha=0.01)
    assert got == pytest.approx(1.628 * math.sqrt(2.0 / 10_000.0), rel=1e-3)
    assert ks_critical_value(100, 100, alpha=0.05) < ks_critical_value(100, 100, alpha=0.01)


# interval estimators


def test_batch_means_recovers_mean():
    g = np.random.default_rng(3)
    x = g.normal(2.0, 1.0, size=20_000)
    e = batch_means_ci(x, batches=20)
    assert e.method == "batch_means"
    assert e.n_eff == 20
    assert abs(e.point - 2.0) < 0.05
    assert e.contains(2.0)


def test_batch_means_rejects_tiny_input():
    with pytest.raises(ValueError):
        batch_means_ci([1.0, 2.0], batches=20)


def test_regenerative_ratio_estimator():
    # cycle sums exactly 3x lengths gives ratio 3 with zero variance
    lengths = np.array([2.0, 4.0, 3.0, 5.0, 6.0])
    e = regenerative_ci(3.0 * lengths, lengths)
    assert e.method == "regenerative"
    assert e.point == pytest.approx(3.0)
    assert e.half_width == pytest.approx(0.0, abs=1e-12)
    assert e.n_eff == 5


def test_regenerative_recovers_noisy_ratio():
    g = np.random.default_rng(4)
    lengths = g.uniform(1.0, 3.0, size=400)
    sums = 2.0 * lengths + g.normal(0.0, 0.1, size=400)
    e = regenerative_ci(sums, lengths)
    assert e.contains(2.0)
    assert e.half_width < 0.05


def test_regenerative_validation():
    with pytest.raises(ValueError):
        regenerative_ci([1.0], [1.0])
    with pytest.raises(ValueError):
        regenerative_ci([1.0, 2.0], [1.0, 0.0])


def test_wilson_interval_known_values():
    e = wilson_interval(50, 100)
    assert e.method == "binomial"
    assert e.point == pytest.approx(0.5)
    # z=1.96: half-width ~ 0.0955 around the adjusted centre
    assert e.contains(0.5)
    assert 0.08 < e.half_width < 0.11
    zero = wilson_interval(0, 100)
    assert zero.lo >= 0.0
    full = wilson_interval(100, 100)
    assert full.hi <= 1.0


# Hill estimator


def test_hill_recovers_pareto_index():
    rng = RngStream(77, 0)
    x = pareto(2.0, 1.0).sample_n(1_000_000, rng)
    e = tail_index_hill(x, k=10_000)
    assert e.method == "hill"
    assert abs(e.point - 2.0) < 0.06
    assert e.n_eff == 10_000


def test_hill_scale_equivariance():
    # multiplying the sample by a constant leaves the index unchanged
    rng = RngStream(78, 0)
    x = pareto(2.5, 1.0).sample_n(50_000, rng)
    a = tail_index_hill(x, k=2_000)
    b = tail_index_hill(7.0 * x, k=2_000)
    assert a.point == pytest.approx(b.point)


def test_hill_default_k_and_validation():
    rng = RngStream(79, 0)
    x = pareto(2.0, 1.0).sample_n(10_000, rng)
    e = tail_index_hill(x)
    assert e.n_eff > 0
    assert 1.0 < e.point < 3.0
    with pytest.raises(ValueError):
        tail_index_hill(x, k=len(x) + 5)
    with pytest.raises(ValueError):
        tail_index_hill([-1.0, 2.0, 3.0], k=2)
