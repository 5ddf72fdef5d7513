"""Driving sequences: iid and modulated inputs, chunk invariance, intensity."""

import numpy as np
import pytest

from queuelab import (
    InputProcess,
    RngStream,
    det,
    exponential,
    iid_process,
    modulated_process,
    pareto,
    traffic_intensity,
    uniform,
)


def _proc():
    return iid_process(exponential(1.0), exponential(0.5))


def test_pairs_shapes_and_determinism():
    proc = _proc()
    s1, t1 = proc.pairs(100, RngStream(1, 0))
    s2, t2 = proc.pairs(100, RngStream(1, 0))
    assert s1.shape == t1.shape == (100,)
    assert np.array_equal(s1, s2) and np.array_equal(t1, t2)


def test_chunked_stream_equals_one_shot():
    # fixed uniforms per step, so chunk size cannot change the sequence
    proc = _proc()
    s_all, t_all = proc.pairs(1000, RngStream(2, 0))
    gen = proc.pair_stream(RngStream(2, 0), chunk=64)
    got_s, got_t = [], []
    while len(got_s) < 1000:
        s, t = next(gen)
        got_s.extend(s.tolist())
        got_t.extend(t.tolist())
    assert got_s[:1000] == s_all.tolist()
    assert got_t[:1000] == t_all.tolist()


def test_modulated_chunk_invariance():
    proc = modulated_process(
        switch=((0.9, 0.1), (0.2, 0.8)),
        services=(exponential(1.0), det(2.0)),
        interarrivals=(exponential(0.5), uniform(1.0, 3.0)),
    )
    s_all, t_all = proc.pairs(500, RngStream(3, 0))
    gen = proc.pair_stream(RngStream(3, 0), chunk=37)
    got_s, got_t = [], []
    while len(got_s) < 500:
        s, t = next(gen)
        got_s.extend(s.tolist())
        got_t.extend(t.tolist())
    assert got_s[:500] == s_all.tolist()
    assert got_t[:500] == t_all.tolist()


def test_stationary_law():
    proc = modulated_process(
        switch=((0.9, 0.1), (0.2, 0.8)),
        services=(exponential(1.0), exponential(1.0)),
        interarrivals=(exponential(1.0), exponential(1.0)),
    )
    pi = proc.stationary_law()
    assert pi[0] == pytest.approx(2.0 / 3.0)
    assert pi[1] == pytest.approx(1.0 / 3.0)


def test_modulated_state_mix_matches_stationary_law():
    # state 1 uses det(5) services, so the empirical share of 5s
    # estimates the stationary weight pi[1] = 1/3
    proc = modulated_process(
        switch=((0.9, 0.1), (0.2, 0.8)),
        services=(exponential(1.0), det(5.0)),
        interarrivals=(exponential(1.0), exponential(1.0)),
    )
    s, _ = proc.pairs(200_000, RngStream(4, 0))
    share = float(np.mean(s == 5.0))
    assert abs(share - 1.0 / 3.0) < 0.01


def test_mean_service_weights_states():
    proc = modulated_process(
        switch=((0.5, 0.5), (0.5, 0.5)),
        services=(det(1.0), det(3.0)),
        interarrivals=(det(2.0), det(4.0)),
    )
    assert proc.mean_service() == 2.0
    assert proc.mean_interarrival() == 3.0


def test_traffic_intensity():
    # rho = E sigma / E t; stable iff rho < m
    proc = iid_process(exponential(1.0), exponential(0.5))
    one = traffic_intensity(proc, m=1)
    assert one.rho == pytest.approx(0.5)
    assert one.finite and one.stable
    two = traffic_intensity(iid_process(det(3.0), det(2.0)), m=1)
    assert two.rho == pytest.approx(1.5)
    assert not two.stable
    assert traffic_intensity(iid_process(det(3.0), det(2.0)), m=2).stable


def test_traffic_intensity_infinite_mean():
    heavy = iid_process(pareto(0.8, 1.0), det(1.0))
    res = traffic_intensity(heavy, m=1)
    assert not res.finite
    assert not res.stable


def test_validation():
    with pytest.raises(ValueError):
        InputProcess()
    with pytest.raises(ValueError):
        modulated_process(
            switch=((0.5, 0.4), (0.5, 0.5)),
            services=(det(1.0), det(1.0)),
            interarrivals=(det(1.0), det(1.0)),
        )
    with pytest.raises(ValueError):
        modulated_process(
            switch=((1.0, 0.0), (0.0, 1.0)),
            services=(det(1.0), det(1.0)),
            interarrivals=(det(1.0), det(1.0)),
        )
