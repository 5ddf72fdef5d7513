"""Single-server recursion, backward construction, and stationary estimates."""

import math

import numpy as np
import pytest

from queuelab import (
    RngStream,
    coupling_time,
    det,
    exponential,
    estimate_stationary_wait,
    iid_process,
    ks_critical_value,
    ks_distance,
    lindley_step,
    loynes_backward,
    simulate_forward,
    tv_bound_estimate,
    uniform,
)


def _mm1(lam=0.5, mu=1.0):
    return iid_process(exponential(mu), exponential(lam))


def test_lindley_step_algebra():
    assert lindley_step(0.0, 1.0, 2.0) == 0.0
    assert lindley_step(3.0, 1.0, 2.0) == 2.0
    assert lindley_step(0.0, 0.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        lindley_step(-1.0, 1.0, 1.0)


def test_forward_path_matches_step_by_step():
    proc = _mm1()
    path = simulate_forward(proc, 2.0, 50, RngStream(1, 0))
    w = 2.0
    for k in range(49):
        w = lindley_step(w, float(path.sigmas[k]), float(path.ts[k]))
        assert path.waits[k + 1] == w
    assert path.waits[0] == 2.0


def test_forward_deterministic_drain():
    # sigma - t = -1 each step drains one unit per customer
    proc = iid_process(det(1.0), det(2.0))
    path = simulate_forward(proc, 5.0, 10, RngStream(0, 0))
    assert path.waits.tolist() == [5.0, 4.0, 3.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]


def test_backward_maxima_monotone_from_zero():
    proc = _mm1()
    for rep in range(50):
        rec = loynes_backward(proc, 0.0, 400, RngStream(2, rep))
        assert np.all(np.diff(rec.backward_maxima) >= 0.0)


def test_backward_constant_after_coupling():
    proc = _mm1()
    found = 0
    for rep in range(50):
        rec = loynes_backward(proc, 0.0, 3000, RngStream(3, rep), confirm=500)
        if rec.coupling_time is None:
            continue
        found += 1
        frozen = rec.backward_maxima[rec.coupling_time :]
        assert np.all(frozen == frozen[0])
        assert rec.sup_value == pytest.approx(float(frozen[0]))
    assert found >= 45


def test_backward_forward_same_law():
    # W after n increments from W_0=x has the law of M_n^(x); the
    # forward path stores W_0 as its first entry, hence n+1 entries
    proc = _mm1()
    n, reps = 20, 4000
    for x in (0.0, 5.0):
        fwd = np.array(
            [
                simulate_forward(proc, x, n + 1, RngStream(100 + r, 0)).waits[-1]
                for r in range(reps)
            ]
        )
        bwd = np.array(
            [
                loynes_backward(proc, x, n, RngStream(900_000 + r, 0)).backward_maxima[-1]
                for r in range(reps)
            ]
        )
        assert ks_distance(fwd, bwd) < ks_critical_value(reps, reps, alpha=0.01)


def test_coupling_time_deterministic_drift():
    # increments are exactly -1, so x + S_k >= 0 iff k <= x
    proc = iid_process(det(1.0), det(2.0))
    assert coupling_time(proc, 3.0, RngStream(4, 0), confirm=10, cap=1000) == 3
    assert coupling_time(proc, 0.0, RngStream(4, 1), confirm=10, cap=1000) == 0


def test_coupling_time_cap_returns_none():
    # unstable input never confirms
    proc = iid_process(det(2.0), det(1.0))
    assert coupling_time(proc, 0.0, RngStream(4, 2), confirm=10, cap=500) is None


def test_tv_bound_decreases_in_horizon():
    proc = _mm1()
    rng = RngStream(5, 0)
    early = tv_bound_estimate(proc, 0.0, 5, 400, rng, confirm=300)
    late = tv_bound_estimate(proc, 0.0, 200, 400, rng.substream(1), confirm=300)
    assert early.method == "binomial"
    assert late.point <= early.point
    assert late.point < 0.2


def test_stationary_mean_mm1():
    # E W = rho/(mu - lam) at lam=.5, mu=1 gives 1.0
    res = estimate_stationary_wait(_mm1(), m=1, customers=200_000, rng=RngStream(6, 0))
    assert res.method == "regenerative"
    assert not res.low_confidence
    assert abs(res.mean.point - 1.0) < 0.05


def test_stationary_tail_mm1():
    res = estimate_stationary_wait(
        _mm1(), m=1, customers=200_000, rng=RngStream(7, 0), levels=(0.0, 2.0)
    )
    assert abs(res.tails[0.0].point - 0.5) < 0.02
    assert abs(res.tails[2.0].point - 0.5 * math.exp(-1.0)) < 0.02


def test_stationary_md1_mean():
    # M/D/1, lam=.5, sigma=1: E W = lam E(s^2) / (2 (1-rho)) = 0.5
    proc = iid_process(det(1.0), exponential(0.5))
    res = estimate_stationary_wait(proc, m=1, customers=200_000, rng=RngStream(8, 0))
    assert abs(res.mean.point - 0.5) < 0.03


def test_stationary_flags_low_confidence_when_few_cycles():
    # near-critical load rarely empties over a short run
    proc = iid_process(exponential(1.0), exponential(0.98))
    res = estimate_stationary_wait(proc, m=1, customers=2_000, rng=RngStream(9, 0))
    assert res.low_confidence or res.cycles < 100


def test_uniform_inputs_stable_run():
    proc = iid_process(uniform(0.0, 1.0), uniform(0.0, 1.5))
    res = estimate_stationary_wait(proc, m=1, customers=50_000, rng=RngStream(10, 0))
    assert res.mean.point > 0.0
