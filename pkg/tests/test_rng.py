"""Reproducibility and substream independence of the seeded streams."""

import numpy as np

from queuelab import RngStream


def test_same_seed_same_draws():
    a = RngStream(42, 0)
    b = RngStream(42, 0)
    assert a.uniforms(100).tolist() == b.uniforms(100).tolist()


def test_different_stream_ids_differ():
    a = RngStream(42, 0).uniforms(64)
    b = RngStream(42, 1).uniforms(64)
    assert not np.array_equal(a, b)


def test_different_seeds_differ():
    a = RngStream(1, 0).uniforms(64)
    b = RngStream(2, 0).uniforms(64)
    assert not np.array_equal(a, b)


def test_substream_is_deterministic_function_of_key():
    root = RngStream(7, 3)
    a = root.substream(4, 9).uniforms(32)
    b = RngStream(7, 3).substream(4, 9).uniforms(32)
    assert a.tolist() == b.tolist()


def test_substream_independent_of_parent_consumption():
    # spawning must not depend on how many draws the parent made
    fresh = RngStream(7, 0)
    burned = RngStream(7, 0)
    burned.uniforms(1000)
    a = fresh.substream(5).uniforms(32)
    b = burned.substream(5).uniforms(32)
    assert a.tolist() == b.tolist()


def test_sibling_substreams_differ():
    root = RngStream(7, 0)
    a = root.substream(0).uniforms(64)
    b = root.substream(1).uniforms(64)
    assert not np.array_equal(a, b)


def test_clone_restarts_same_sequence():
    a = RngStream(9, 2)
    head = a.uniforms(17)
    b = a.clone()
    assert b.uniforms(17).tolist() == head.tolist()


def test_uniform_range_and_moments():
    u = RngStream(3, 0).uniforms(200_000)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1.0 / 12.0) < 0.002


def test_exponential_consumes_one_uniform():
    # rate r via inversion: -log(1-u)/r from the same single draw
    a = RngStream(11, 0)
    b = RngStream(11, 0)
    x = a.exponential(2.0)
    u = b.uniform()
    assert x == -np.log1p(-u) / 2.0
    # streams stay aligned afterwards
    assert a.uniform() == b.uniform()


def test_exponential_mean():
    r = RngStream(5, 0)
    x = np.array([r.exponential(4.0) for _ in range(100_000)])
    assert abs(x.mean() - 0.25) < 0.01


def test_integers_bounds():
    r = RngStream(6, 0)
    draws = [r.integers(2, 5) for _ in range(500)]
    assert set(draws) <= {2, 3, 4}
    assert set(draws) == {2, 3, 4}


def test_binomial_and_poisson_sane():
    r = RngStream(8, 0)
    b = np.array([r.binomial(10, 0.3) for _ in range(20_000)])
    assert abs(b.mean() - 3.0) < 0.05
    p = np.array([r.poisson(2.5) for _ in range(20_000)])
    assert abs(p.mean() - 2.5) < 0.05


def test_coin_is_fair():
    r = RngStream(4, 0)
    heads = sum(r.coin() for _ in range(40_000))
    assert abs(heads / 40_000 - 0.5) < 0.01
