"""Extinction runs, coupling statuses, survival estimation, lit checks,
and the right-edge diagnostic."""

import math

import numpy as np
import pytest

from contactlab.graphs import Graph, make_line, make_star, random_tree
from contactlab.harris import HarrisError, sample_harris
from contactlab.process import (
    CouplingStatus,
    coupling_status,
    coupling_statuses,
    crossing_time,
    extinction_time,
    is_lit,
    right_edge_trace,
    run_trajectory,
    survival_probability,
)
from contactlab.oracle import exact_transient_survival


def test_single_vertex_tau_is_first_recovery():
    g = Graph(1, ())
    for seed in range(25):
        tau = extinction_time(g, 1.0, seed, 100.0)
        h = sample_harris(g, 1.0, max(1.0, tau * 2), seed)
        assert tau == h.recovery_times(0)[0]


def test_single_vertex_mean_exp1():
    taus = [extinction_time(Graph(1, ()), 1.0, s, 200.0) for s in range(10_000)]
    assert abs(np.mean(taus) - 1.0) < 0.03


def test_k2_mean_matches_hand_solution():
    taus = [extinction_time(make_line(2), 2.0, s, 1e5) for s in range(100_000)]
    se = np.std(taus, ddof=1) / math.sqrt(len(taus))
    assert abs(np.mean(taus) - 2.5) < 3 * se


def test_censoring_returns_none():
    # cap far below typical extinction: full star at high rate
    out = [extinction_time(make_star(10), 4.0, s, 0.05) for s in range(50)]
    assert any(v is None for v in out)
    for v in out:
        assert v is None or v <= 0.05


def test_tau_deterministic_and_schedule_invariant():
    from contactlab import process

    g = make_star(6)
    base = [extinction_time(g, 2.0, s, 1e5) for s in range(40)]
    orig = process._initial_horizon
    try:
        process._initial_horizon = lambda g: 0.61
        alt = [extinction_time(g, 2.0, s, 1e5) for s in range(40)]
    finally:
        process._initial_horizon = orig
    assert base == alt


def test_trajectory_checkpoints_sorted_and_empty_after_extinction():
    g = make_star(5)
    traj = run_trajectory(g, 1.0, 3, 200.0, checkpoint_dt=0.5)
    times = [t for t, _ in traj.checkpoints]
    assert times == sorted(times)
    if traj.extinction_time is not None:
        for t, conf in traj.checkpoints:
            if t >= traj.extinction_time:
                assert conf == frozenset()


def test_trajectory_checkpoint_granularity_does_not_change_tau():
    g = make_star(5)
    t1 = run_trajectory(g, 1.5, 11, 1e4, checkpoint_dt=0.25)
    t2 = run_trajectory(g, 1.5, 11, 1e4, checkpoint_dt=7.3)
    t3 = extinction_time(g, 1.5, 11, 1e4)
    assert t1.extinction_time == t2.extinction_time == t3


def test_trajectory_csv_dump():
    traj = run_trajectory(make_line(3), 1.0, 5, 50.0, checkpoint_dt=1.0)
    csv = traj.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "time,infected_count,infected_bitmask_hex"
    assert lines[1] == "0.0,3,7"
    big = Graph(65, tuple((i, i + 1) for i in range(64)))
    with pytest.raises(ValueError):
        run_trajectory(big, 1.0, 5, 1.0, checkpoint_dt=1.0).to_csv()


# -- coupling -----------------------------------------------------------------


def test_full_start_is_coupled_until_extinct():
    g = make_line(4)
    grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
    for seed in range(20):
        statuses = coupling_statuses(g, 1.0, frozenset(range(4)), grid, seed)
        assert statuses[0] is CouplingStatus.COUPLED
        for a, b in zip(statuses, statuses[1:]):
            if a is CouplingStatus.EXTINCT:
                assert b is CouplingStatus.EXTINCT


def test_singleton_start_decoupled_at_zero():
    assert coupling_status(make_line(2), 1.0, {0}, 0.0, 3) is CouplingStatus.DECOUPLED


def test_status_transitions_absorbing_along_grid():
    g = random_tree(8, 4)
    grid = [0.25 * k for k in range(1, 40)]
    for seed in range(50):
        statuses = coupling_statuses(g, 2.0, {0}, grid, seed)
        resolved = False
        for st in statuses:
            if resolved:
                assert st is not CouplingStatus.DECOUPLED
            if st is not CouplingStatus.DECOUPLED:
                resolved = True


def test_empty_start_rejected():
    with pytest.raises(HarrisError):
        coupling_status(make_line(2), 1.0, frozenset(), 1.0, 0)


def test_coupled_agrees_with_direct_evolution():
    # statuses computed on the shared system must match brute evolve
    g = random_tree(6, 2)
    for seed in range(30):
        t = 3.0
        st = coupling_status(g, 1.5, {0}, t, seed)
        feed_horizon = 16.0
        h = sample_harris(g, 1.5, feed_horizon, seed)
        a = h.evolve({0}, 0.0, t)
        f = h.evolve(range(6), 0.0, t)
        if not a:
            want = CouplingStatus.EXTINCT
        elif a == f:
            want = CouplingStatus.COUPLED
        else:
            want = CouplingStatus.DECOUPLED
        assert st is want


# -- survival -----------------------------------------------------------------


def test_survival_at_zero_exactly_one():
    rep = survival_probability(make_line(3), 1.0, {0}, 0.0, 500, 1)
    assert rep.estimate == 1.0 and rep.se == 0.0


def test_single_vertex_survival_exp_tail():
    rep = survival_probability(Graph(1, ()), 1.0, {0}, 1.0, 10_000, 5)
    lo, hi = rep.config["ci95"]
    assert lo <= math.exp(-1) <= hi


def test_survival_matches_oracle_small():
    g = random_tree(5, 8)
    for lam, t in ((0.8, 1.2), (2.0, 2.5)):
        want = exact_transient_survival(g, lam, {0, 2}, t)
        rep = survival_probability(g, lam, {0, 2}, t, 20_000, 17)
        assert abs(rep.estimate - want) < 3 * max(rep.se, 1e-4)


def test_survival_monotone_in_time_per_path():
    # same base seed => same Harris realizations; survivorship can only drop
    g = make_star(6)
    r1 = survival_probability(g, 1.0, {1}, 1.0, 2000, 123)
    r2 = survival_probability(g, 1.0, {1}, 3.0, 2000, 123)
    assert r2.estimate <= r1.estimate


def test_survival_dominated_by_larger_start_per_path():
    g = make_star(6)
    small = survival_probability(g, 1.0, {1}, 2.0, 2000, 5)
    full = survival_probability(g, 1.0, frozenset(range(6)), 2.0, 2000, 5)
    assert full.estimate >= small.estimate


# -- lit configurations -------------------------------------------------------


def test_lit_empty_configuration_false():
    check = is_lit(make_star(6), frozenset(), 2.0, 0.05, 200, 0)
    assert check.report.estimate == 0.0
    assert not check.lit and check.decisive


def test_lit_full_star_true_at_calibrated_scale():
    check = is_lit(make_star(6), frozenset(range(6)), 2.0, 0.05, 2000, 1)
    assert check.lit
    assert check.threshold == pytest.approx(1.0 - math.exp(-0.3))
    assert check.time_horizon == pytest.approx(math.exp(0.3))


def test_lit_estimate_matches_oracle():
    f = make_line(5)
    c0 = 0.06
    horizon = math.exp(c0 * 5)
    want = exact_transient_survival(f, 2.0, {0, 1, 2, 3, 4}, horizon)
    check = is_lit(f, frozenset(range(5)), 2.0, c0, 20_000, 3)
    assert abs(check.report.estimate - want) < 3 * max(check.report.se, 1e-4)


def test_lit_rejects_non_line_non_star():
    t_shape = Graph(5, ((0, 1), (1, 2), (1, 3), (3, 4)))
    with pytest.raises(HarrisError):
        is_lit(t_shape, {0}, 2.0, 0.05, 10, 0)


# -- right edge ---------------------------------------------------------------


def test_right_edge_trace_in_range():
    for seed in range(20):
        trace = right_edge_trace(12, 2.0, seed, 30.0)
        for t, r in trace.points:
            assert 0 <= r <= 11
        times = [t for t, _ in trace.points]
        assert times == sorted(times)


def test_right_edge_crossing_frequency_supercritical():
    n, lam, c = 20, 2.0, 0.25
    deadline = n / c
    hits = sum(crossing_time(n, lam, s, deadline) is not None for s in range(400))
    assert hits / 400 > 0.05


def test_right_edge_crossing_rare_subcritical():
    n, lam = 30, 0.1
    deadline = n / 0.25
    hits = sum(crossing_time(n, lam, s, deadline) is not None for s in range(400))
    assert hits / 400 < 0.02


def test_crossing_time_matches_trace():
    n, lam = 10, 2.0
    for seed in range(40):
        ct = crossing_time(n, lam, seed, 40.0)
        trace = right_edge_trace(n, lam, seed, 40.0)
        hit_times = [t for t, r in trace.points if r == n - 1]
        if ct is None:
            assert not hit_times
        else:
            assert hit_times and hit_times[0] == ct
