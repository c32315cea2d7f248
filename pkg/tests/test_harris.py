"""Graphical-construction semantics: stream laws, prefix stability,
infection paths, forward/dual sweeps."""

import math

import numpy as np
import pytest

from contactlab import rng
from contactlab.graphs import Graph, make_line, make_star, random_tree
from contactlab.harris import HarrisError, HarrisSystem, SpaceTimePoint, sample_harris


def fixture_system(graph, lam, horizon, rec, tx):
    return HarrisSystem.from_events(graph, lam, horizon, rec, tx)


# -- sampling and laws --------------------------------------------------------


def test_zero_horizon_streams_empty():
    h = sample_harris(make_line(3), 1.0, 0.0, 1)
    for v in range(3):
        assert h.recovery_times(v).size == 0
    assert h.events_between(0.0, 0.0)[0].size == 0


def test_nonpositive_lambda_rejected():
    with pytest.raises(HarrisError):
        sample_harris(make_line(2), 0.0, 1.0, 1)
    with pytest.raises(HarrisError):
        sample_harris(make_line(2), -2.0, 1.0, 1)


def test_identical_inputs_identical_systems():
    a = sample_harris(make_star(4), 1.5, 6.0, 11)
    b = sample_harris(make_star(4), 1.5, 6.0, 11)
    for v in range(4):
        assert np.array_equal(a.recovery_times(v), b.recovery_times(v))
    for e in a.graph.directed_edges:
        assert np.array_equal(a.transmission_times(*e), b.transmission_times(*e))


def test_recovery_count_mean_rate1():
    counts = [
        len(sample_harris(Graph(1, ()), 1.0, 10.0, s).recovery_times(0))
        for s in range(10_000)
    ]
    mean = np.mean(counts)
    assert abs(mean - 10.0) < 4 * math.sqrt(10.0 / 10_000)


def test_transmission_count_mean_lambda():
    lam, horizon = 2.0, 7.0
    counts = [
        len(sample_harris(make_line(2), lam, horizon, s).transmission_times(0, 1))
        for s in range(10_000)
    ]
    mean = np.mean(counts)
    assert abs(mean - lam * horizon) < 4 * math.sqrt(lam * horizon / 10_000)


def test_streams_strictly_increasing():
    h = sample_harris(make_star(6), 2.5, 50.0, 3)
    for v in range(6):
        arr = h.recovery_times(v)
        assert (np.diff(arr) > 0).all()
    for e in h.graph.directed_edges:
        arr = h.transmission_times(*e)
        assert (np.diff(arr) > 0).all()


def test_distinct_clocks_differ():
    h = sample_harris(make_star(6), 1.0, 20.0, 3)
    assert not np.array_equal(h.recovery_times(0), h.recovery_times(1))
    assert not np.array_equal(h.transmission_times(0, 1), h.transmission_times(1, 0))


# -- extension ----------------------------------------------------------------


def test_extend_same_horizon_is_identity():
    h = sample_harris(make_line(3), 1.0, 4.0, 5)
    assert h.extend(4.0) is h


def test_extend_shrink_rejected():
    h = sample_harris(make_line(3), 1.0, 4.0, 5)
    with pytest.raises(HarrisError):
        h.extend(3.0)


def test_prefix_stability_vs_fresh_sample():
    g = make_star(5)
    h1 = sample_harris(g, 1.5, 3.0, 99)
    h2 = h1.extend(10.0)
    h3 = sample_harris(g, 1.5, 10.0, 99)
    for v in range(5):
        assert np.array_equal(h2.recovery_times(v), h3.recovery_times(v))
        a = h1.recovery_times(v)
        assert np.array_equal(a, h2.recovery_times(v)[: a.size])
    for e in g.directed_edges:
        assert np.array_equal(h2.transmission_times(*e), h3.transmission_times(*e))


def test_repeated_doubling_stays_sorted_and_prefix_stable():
    g = make_line(4)
    h = sample_harris(g, 1.0, 1.0, 17)
    prev = {v: h.recovery_times(v).copy() for v in range(4)}
    for _ in range(10):
        h = h.extend(h.horizon * 2)
        for v in range(4):
            arr = h.recovery_times(v)
            assert (np.diff(arr) > 0).all()
            assert np.array_equal(prev[v], arr[: prev[v].size])
            prev[v] = arr.copy()
    assert h.horizon == 1024.0


# -- reaches ------------------------------------------------------------------


def test_reaches_point_to_itself():
    h = sample_harris(make_line(2), 1.0, 1.0, 0)
    p = SpaceTimePoint(0, 0.5)
    assert h.reaches(p, p)


def test_reaches_constant_path_without_recovery():
    g = make_line(2)
    h = fixture_system(g, 1.0, 10.0, {0: [8.0]}, {})
    assert h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(0, 7.9))
    assert not h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(0, 8.0))
    assert not h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(0, 9.0))


def test_reaches_blocked_by_recovery_before_transmission():
    g = make_line(2)
    h = fixture_system(g, 1.0, 10.0, {0: [1.0]}, {(0, 1): [2.0]})
    assert not h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(1, 3.0))
    h2 = fixture_system(g, 1.0, 10.0, {0: [3.0]}, {(0, 1): [2.0]})
    assert h2.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(1, 3.0))


def test_reaches_multi_hop_chain():
    g = make_line(3)
    h = fixture_system(
        g, 1.0, 10.0,
        {0: [2.0], 1: [4.0]},
        {(0, 1): [1.0], (1, 2): [3.0]},
    )
    assert h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(2, 5.0))
    # the 1->2 hop happens at 3.0; vertex 1 recovered at 4.0, so 1 is dead at 5
    assert not h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(1, 5.0))


def test_reaches_restrict_blocks_detours():
    # 0-1-2 path plus shortcut 0-2; only route to 2 uses vertex 1
    g = Graph(3, ((0, 1), (1, 2), (0, 2)))
    h = fixture_system(g, 1.0, 10.0, {}, {(0, 1): [1.0], (1, 2): [2.0]})
    assert h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(2, 3.0))
    assert not h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(2, 3.0), restrict={0, 2})


def test_reaches_restrict_must_contain_endpoints():
    h = sample_harris(make_line(3), 1.0, 2.0, 0)
    with pytest.raises(HarrisError):
        h.reaches(SpaceTimePoint(0, 0.0), SpaceTimePoint(2, 1.0), restrict={0, 1})


def test_reaches_time_order_enforced():
    h = sample_harris(make_line(2), 1.0, 2.0, 0)
    with pytest.raises(HarrisError):
        h.reaches(SpaceTimePoint(0, 1.5), SpaceTimePoint(1, 0.5))


# -- evolve -------------------------------------------------------------------


def test_evolve_empty_is_absorbing():
    h = sample_harris(make_star(5), 2.0, 8.0, 21)
    assert h.evolve(frozenset(), 0.0, 8.0) == frozenset()


def test_evolve_no_events_identity():
    h = fixture_system(make_line(3), 1.0, 5.0, {}, {})
    assert h.evolve({0, 2}, 0.0, 5.0) == frozenset({0, 2})


def test_evolve_requires_materialized_horizon():
    h = sample_harris(make_line(3), 1.0, 2.0, 0)
    with pytest.raises(HarrisError, match="extend"):
        h.evolve({0}, 0.0, 3.0)


def test_evolve_manual_fixture():
    g = make_line(3)
    h = fixture_system(
        g, 1.0, 10.0,
        {0: [2.5], 2: [0.5]},
        {(0, 1): [1.0], (1, 2): [2.0]},
    )
    assert h.evolve({0}, 0.0, 0.75) == frozenset({0})
    assert h.evolve({0}, 0.0, 1.5) == frozenset({0, 1})
    assert h.evolve({0}, 0.0, 2.25) == frozenset({0, 1, 2})
    assert h.evolve({0}, 0.0, 3.0) == frozenset({1, 2})


def test_evolve_matches_reaches_on_random_fixtures():
    gen = np.random.default_rng(42)
    for _ in range(1000):
        n = int(gen.integers(2, 9))
        g = random_tree(n, int(gen.integers(0, 2**31)))
        lam = float(gen.uniform(0.2, 3.0))
        t = float(gen.uniform(0.1, 3.0))
        h = sample_harris(g, lam, t, int(gen.integers(0, 2**31)))
        size = int(gen.integers(1, n + 1))
        conf = frozenset(int(v) for v in gen.permutation(n)[:size])
        ev = h.evolve(conf, 0.0, t)
        via_paths = frozenset(
            y
            for y in range(n)
            if any(h.reaches(SpaceTimePoint(x, 0.0), SpaceTimePoint(y, t)) for x in conf)
        )
        assert ev == via_paths


def test_evolve_attractive_in_initial_condition():
    gen = np.random.default_rng(7)
    for _ in range(1000):
        n = int(gen.integers(2, 9))
        g = random_tree(n, int(gen.integers(0, 2**31)))
        t = float(gen.uniform(0.1, 3.0))
        h = sample_harris(g, float(gen.uniform(0.2, 3.0)), t, int(gen.integers(0, 2**31)))
        a = frozenset(int(v) for v in gen.permutation(n)[: int(gen.integers(1, n + 1))])
        b = a | frozenset(int(v) for v in gen.permutation(n)[: int(gen.integers(0, n + 1))])
        assert h.evolve(a, 0.0, t) <= h.evolve(b, 0.0, t)


# -- dual ---------------------------------------------------------------------


def test_dual_zero_duration():
    h = sample_harris(make_line(3), 1.0, 2.0, 0)
    assert h.dual_evolve(SpaceTimePoint(1, 1.5), 0.0) == frozenset({1})


def test_dual_constant_without_events():
    h = fixture_system(make_line(3), 1.0, 5.0, {}, {})
    assert h.dual_evolve(SpaceTimePoint(2, 5.0), 5.0) == frozenset({2})


def test_dual_duration_bounds():
    h = sample_harris(make_line(2), 1.0, 2.0, 0)
    with pytest.raises(HarrisError):
        h.dual_evolve(SpaceTimePoint(0, 1.0), 1.5)


def test_dual_manual_fixture():
    g = make_line(3)
    h = fixture_system(
        g, 1.0, 10.0,
        {0: [2.5]},
        {(0, 1): [1.0], (1, 2): [2.0]},
    )
    # who reaches (2, 3)? vertex 2 always; 1 via hop at 2.0; 0 via both hops
    assert h.dual_evolve(SpaceTimePoint(2, 3.0), 3.0) == frozenset({0, 1, 2})
    # after 0's recovery at 2.5 nothing new: dual of (0, 3) back to time 2.6
    assert h.dual_evolve(SpaceTimePoint(0, 3.0), 0.4) == frozenset({0})


def test_duality_identity_exact():
    gen = np.random.default_rng(11)
    for _ in range(500):
        n = int(gen.integers(2, 9))
        g = random_tree(n, int(gen.integers(0, 2**31)))
        t = float(gen.uniform(0.1, 3.0))
        h = sample_harris(g, float(gen.uniform(0.2, 3.0)), t, int(gen.integers(0, 2**31)))
        conf = frozenset(int(v) for v in gen.permutation(n)[: int(gen.integers(1, n + 1))])
        ev = h.evolve(conf, 0.0, t)
        for x in range(n):
            dual = h.dual_evolve(SpaceTimePoint(x, t), t)
            assert (x in ev) == bool(conf & dual)


# -- event dump ---------------------------------------------------------------


def test_dump_events_csv_roundtrip_order():
    g = make_line(2)
    h = fixture_system(g, 1.0, 5.0, {0: [1.5], 1: [2.5]}, {(0, 1): [1.5, 3.0]})
    csv = h.dump_events_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "time,kind,vertex,target"
    assert lines[1] == "1.5,R,0,"      # recovery sorts before the tied transmission
    assert lines[2] == "1.5,T,0,1"
    assert lines[3] == "2.5,R,1,"
    assert lines[4] == "3.0,T,0,1"


def test_fixture_systems_cannot_extend():
    h = fixture_system(make_line(2), 1.0, 5.0, {}, {})
    with pytest.raises(HarrisError):
        h.extend(10.0)


def test_tie_rule_recovery_before_transmission():
    # transmission and recovery at the same instant at the source: the
    # recovery is processed first, so the transmission finds it healthy
    g = make_line(2)
    h = fixture_system(g, 1.0, 5.0, {0: [1.0]}, {(0, 1): [1.0]})
    assert h.evolve({0}, 0.0, 2.0) == frozenset()
    # on the target side: recovery at the target, then reinfection
    h2 = fixture_system(g, 1.0, 5.0, {1: [1.0]}, {(0, 1): [1.0]})
    assert h2.evolve({0, 1}, 0.0, 2.0) == frozenset({0, 1})


# -- seed derivation ----------------------------------------------------------


def test_derive_key_vector_matches_scalar():
    ks = [rng.derive_key(42, rng.KIND_RECOVERY, x) for x in range(6)]
    kv = rng.derive_keys(42, np.uint64(rng.KIND_RECOVERY), np.arange(6, dtype=np.uint64))
    assert [int(v) for v in np.atleast_1d(kv)] == ks
    kf = rng.derive_keys_from(np.array([42], dtype=np.uint64),
                              np.uint64(rng.KIND_TRANSMISSION),
                              np.array([3], dtype=np.uint64),
                              np.array([5], dtype=np.uint64))
    assert int(np.atleast_1d(kf)[0]) == rng.derive_key(42, rng.KIND_TRANSMISSION, 3, 5)


def test_uniforms_are_in_open_interval():
    u = rng.uniforms(np.uint64(123), np.arange(10_000, dtype=np.uint64))
    assert (u > 0).all() and (u < 1).all()
    assert abs(u.mean() - 0.5) < 4 * (1 / math.sqrt(12 * 10_000))
