"""Traveling server on a circle and the two-species annihilation model."""

import numpy as np
import pytest

from queuelab import (
    AnnihilationConfig,
    CircleConfig,
    RngStream,
    annihilation_simulate,
    circular_distance,
    greedy_server_simulate,
    nearest_particle,
    stability_scan,
)


def test_circular_distance_wraps():
    assert circular_distance(0.1, 0.9, 1.0) == pytest.approx(0.2)
    assert circular_distance(0.2, 0.6, 1.0) == pytest.approx(0.4)
    assert circular_distance(0.0, 0.5, 1.0) == pytest.approx(0.5)
    assert circular_distance(0.3, 0.3, 1.0) == 0.0


def test_nearest_particle_circle_metric():
    # 0.95 is distance 0.1 from 0.05 across the seam, closer than 0.3
    assert nearest_particle(0.05, [0.3, 0.95], 1.0) == 0.95
    assert nearest_particle(0.5, [0.3, 0.95], 1.0) == 0.3
    assert nearest_particle(0.5, [], 1.0) is None


def test_nearest_particle_tie_breaks_clockwise():
    # both candidates at distance 0.25; clockwise (increasing) wins
    assert nearest_particle(0.5, [0.25, 0.75], 1.0) == 0.75


def test_greedy_run_bookkeeping():
    cfg = CircleConfig(lam=0.8)
    run = greedy_server_simulate(cfg, 2_000.0, RngStream(1, 0))
    assert run.horizon == 2_000.0
    assert run.served <= run.arrivals
    assert len(run.waits) <= run.served + 1
    assert np.all(np.asarray(run.waits) >= 0.0)
    assert np.all(np.diff(run.times) >= 0.0)
    final_waiting = run.arrivals - run.served
    assert run.counts[-1] == final_waiting


def test_greedy_subcritical_is_stable():
    cfg = CircleConfig(lam=0.5)
    for rep in range(3):
        run = greedy_server_simulate(cfg, 4_000.0, RngStream(2, rep))
        assert run.verdict().klass == "stable"


def test_greedy_supercritical_is_transient():
    # service cost includes travel, so load 1.3 overwhelms the server
    cfg = CircleConfig(lam=1.3)
    run = greedy_server_simulate(cfg, 4_000.0, RngStream(3, 0))
    v = run.verdict()
    assert v.klass == "transient"
    assert 0.2 < v.slope < 0.4


def test_single_site_lattice_mean_wait():
    # all arrivals at one point: no travel after the first visit, unit
    # wait in heavy traffic terms; mean wait 0.5 at lam=0.5 (M/D/1-like
    # value, service time 0 once the server parks on the site)
    cfg = CircleConfig(lam=0.5, lattice_sites=1)
    waits = []
    for rep in range(4):
        run = greedy_server_simulate(cfg, 20_000.0, RngStream(4, rep))
        waits.extend(run.waits)
    assert abs(np.mean(waits) - 0.5) < 0.05


def test_policy_equivalence_single_site():
    # with one lattice site every policy targets the same point
    runs = {}
    for policy in ("greedy", "always_left", "random_direction"):
        cfg = CircleConfig(lam=0.5, lattice_sites=1, policy=policy)
        run = greedy_server_simulate(cfg, 2_000.0, RngStream(5, 0))
        runs[policy] = (run.arrivals, run.served, float(np.sum(run.waits)))
    assert runs["greedy"] == runs["always_left"] == runs["random_direction"]


def test_stability_scan_rows():
    rows = stability_scan(
        "greedy_circle",
        lambdas=(0.5, 1.3),
        thirds=(1,),
        horizon=2_000.0,
        reps=2,
        rng=RngStream(6, 0),
    )
    assert len(rows) == 2
    verdicts = {row.lam: row.verdict for row in rows}
    assert verdicts[0.5] == "stable"
    assert verdicts[1.3] == "transient"
    for row in rows:
        assert row.reps == 2
        assert row.slope_lo <= row.slope <= row.slope_hi


def test_annihilation_bookkeeping():
    cfg = AnnihilationConfig(lam=0.5, epsilon=0.5)
    run = annihilation_simulate(cfg, 2_000.0, RngStream(7, 0))
    assert run.counts[-1] == run.births - run.deletions
    assert np.all(np.asarray(run.counts) >= 0)
    assert run.time_avg_count > 0.0


def test_annihilation_halfwidth_matches_birth_death_oracle():
    # deletion reach L/2 covers the whole circle, so the count is a
    # birth-death chain whose stationary mean is 1 at lam=0.5
    cfg = AnnihilationConfig(lam=0.5, epsilon=0.5)
    avgs = []
    for rep in range(4):
        run = annihilation_simulate(cfg, 10_000.0, RngStream(8, rep))
        avgs.append(run.time_avg_count)
    assert abs(np.mean(avgs) - 1.0) < 0.1


def test_annihilation_narrow_reach_grows():
    # tiny reach rarely deletes, so the population piles up
    cfg = AnnihilationConfig(lam=2.0, epsilon=0.01)
    run = annihilation_simulate(cfg, 3_000.0, RngStream(9, 0))
    assert run.verdict().klass == "transient"


def test_annihilation_validation():
    # reach past L/2 is legal (circle distance never exceeds L/2)
    AnnihilationConfig(lam=0.5, epsilon=0.6, L=1.0)
    with pytest.raises(ValueError):
        AnnihilationConfig(lam=-0.5, epsilon=0.2)
    with pytest.raises(ValueError):
        AnnihilationConfig(lam=0.5, epsilon=-0.1)
