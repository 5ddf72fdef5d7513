"""Workload routing: shortest-queue steps, common-random-number probes,
and the three-server partial accessibility experiment."""

import numpy as np
import pytest

from queuelab import (
    RngStream,
    det,
    exponential,
    iid_process,
    jsq_step,
    jsq_stationarity_probe,
    partial_access_experiment,
    partial_access_step,
)


def test_jsq_routes_to_smaller_workload():
    rng = RngStream(0, 0)
    assert jsq_step((1.0, 5.0), 2.0, 0.5, rng) == (2.5, 4.5)
    assert jsq_step((5.0, 1.0), 2.0, 0.5, rng) == (4.5, 2.5)


def test_jsq_drains_to_zero_floor():
    rng = RngStream(0, 1)
    assert jsq_step((1.0, 0.5), 0.0, 3.0, rng) == (0.0, 0.0)


def test_jsq_tie_consumes_one_uniform_only():
    a = RngStream(1, 0)
    b = RngStream(1, 0)
    out = jsq_step((2.0, 2.0), 1.0, 0.0, a)
    took = b.coin()
    assert out == ((3.0, 2.0) if took else (2.0, 3.0))
    # aligned afterwards
    assert a.uniform() == b.uniform()


def test_jsq_no_tie_consumes_nothing():
    a = RngStream(2, 0)
    b = RngStream(2, 0)
    jsq_step((1.0, 2.0), 1.0, 0.5, a)
    assert a.uniform() == b.uniform()


def test_jsq_probe_couples_under_common_numbers():
    # with shared driving sequences the two initial conditions merge
    # once both paths have emptied, so the terminal laws coincide
    proc = iid_process(exponential(1.0), exponential(0.6))
    res = jsq_stationarity_probe(
        proc,
        initials=((0.0, 0.0), (30.0, 30.0)),
        customers=3_000,
        reps=60,
        rng=RngStream(3, 0),
    )
    assert res.stable
    assert float(res.ks_common[0, 1]) == 0.0
    assert res.mean_terminal_common[0] == pytest.approx(res.mean_terminal_common[-1])
    assert np.all(np.diag(res.ks_common) == 0.0)


def test_jsq_probe_independent_streams_agree_in_law():
    proc = iid_process(exponential(1.0), exponential(0.6))
    res = jsq_stationarity_probe(
        proc,
        initials=((0.0, 0.0), (30.0, 30.0)),
        customers=3_000,
        reps=120,
        rng=RngStream(4, 0),
    )
    # independent-stream distance is noisy but should clear mixing
    assert float(res.ks_independent[0, 1]) < 0.25


def test_partial_access_step_prefers_less_loaded():
    left = det(2.0)
    right = det(5.0)
    rng = RngStream(5, 0)
    # class 1 reaches servers (0, 1); server 0 is lighter
    out = partial_access_step((1.0, 4.0, 9.0), 1, left, right, 0.5, rng)
    assert out == (2.5, 3.5, 8.5)
    # server 1 lighter: right distribution used
    out = partial_access_step((4.0, 1.0, 9.0), 1, left, right, 0.0, rng)
    assert out == (4.0, 6.0, 9.0)


def test_partial_access_step_inaccessible_server_only_drains():
    out = partial_access_step((1.0, 2.0, 9.0), 1, det(1.0), det(1.0), 1.0, RngStream(6, 0))
    assert out[2] == 8.0


def test_partial_access_step_tie_uses_coin():
    a = RngStream(7, 0)
    b = RngStream(7, 0)
    out = partial_access_step((2.0, 2.0, 0.0), 1, det(1.0), det(1.0), 0.0, a)
    took_left = b.coin()
    assert out == ((3.0, 2.0, 0.0) if took_left else (2.0, 3.0, 0.0))


def test_partial_access_class_server_map():
    # class c reaches servers (c-1, c mod 3); all three pairs distinct
    seen = set()
    for cls in (1, 2, 3):
        out = partial_access_step((0.0, 0.0, 0.0), cls, det(3.0), det(3.0), 0.0, RngStream(8, cls))
        seen.add(tuple(v > 0 for v in out).index(True))
    # each class can load a different first server
    assert len(seen) >= 2


def test_partial_access_experiment_stable_regime():
    exp = exponential(1.0)
    res = partial_access_experiment(
        lam=1.0,
        f_left=exp,
        f_right=exp,
        initials=[(0.0, 0.0, 0.0)],
        arrivals=5_000,
        reps=2,
        rng=RngStream(9, 0),
    )
    assert all(row.verdict.klass == "stable" for row in res.rows)
    assert res.verdicts_by_initial[0] == ["stable", "stable"]


def test_partial_access_experiment_transient_regime():
    # three unit-rate servers saturate at lam=3
    exp = exponential(1.0)
    res = partial_access_experiment(
        lam=3.6,
        f_left=exp,
        f_right=exp,
        initials=[(0.0, 0.0, 0.0)],
        arrivals=5_000,
        reps=2,
        rng=RngStream(10, 0),
    )
    assert all(row.verdict.klass == "transient" for row in res.rows)
    assert all(g > 0 for g in res.mean_growth_by_initial.values())


def test_partial_access_initial_condition_forgotten():
    exp = exponential(1.0)
    res = partial_access_experiment(
        lam=1.0,
        f_left=exp,
        f_right=exp,
        initials=[(0.0, 0.0, 0.0), (40.0, 40.0, 40.0)],
        arrivals=8_000,
        reps=1,
        rng=RngStream(11, 0),
    )
    assert set(res.verdicts_by_initial) == {0, 1}
    assert res.verdicts_by_initial[1] == ["stable"]


def test_partial_access_validation():
    exp = exponential(1.0)
    with pytest.raises(ValueError):
        partial_access_experiment(
            lam=0.0, f_left=exp, f_right=exp,
            initials=[(0.0, 0.0, 0.0)], arrivals=100, reps=1, rng=RngStream(0, 0),
        )
    with pytest.raises(ValueError):
        partial_access_experiment(
            lam=1.0, f_left=exp, f_right=exp,
            initials=[(0.0, 0.0)], arrivals=100, reps=1, rng=RngStream(0, 0),
        )
