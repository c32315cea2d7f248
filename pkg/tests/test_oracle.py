"""Exact chain solver against hand-solved systems, closed forms, and
Monte Carlo cross-checks."""

import math

import numpy as np
import pytest

from contactlab.graphs import Graph, make_line, make_star, random_tree
from contactlab.oracle import (
    CapacityError,
    build_chain,
    exact_cdf_extinction,
    exact_expected_extinction,
    exact_transient_survival,
)
from contactlab.process import extinction_time


def dense_mean_extinction_oracle(g: Graph, lam: float) -> float:
    """Independent dense construction and solve (numpy only)."""
    n = g.n_vertices
    size = 1 << n
    q = np.zeros((size, size))
    for s in range(1, size):
        for x in range(n):
            if s & (1 << x):
                q[s, s ^ (1 << x)] += 1.0
                for y in g.adjacency[x]:
                    if not s & (1 << y):
                        q[s, s | (1 << y)] += lam
    out = q.sum(axis=1)
    a = np.diag(out[1:]) - q[1:, 1:]
    h = np.linalg.solve(a, np.ones(size - 1))
    return float(h[-1])


def test_single_vertex_exact_one():
    assert exact_expected_extinction(Graph(1, ()), 1.0) == pytest.approx(1.0, abs=1e-12)
    assert exact_expected_extinction(Graph(1, ()), 5.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_k2_hand_solved(lam):
    # from one infected: a = 1 + lam/2; from both: b = 3/2 + lam/2
    expected = 1.5 + lam / 2.0
    assert exact_expected_extinction(make_line(2), lam) == pytest.approx(expected, abs=1e-9)


def test_k2_lambda2_is_2p5():
    assert exact_expected_extinction(make_line(2), 2.0) == pytest.approx(2.5, abs=1e-9)


def test_path3_matches_independent_dense_solve():
    got = exact_expected_extinction(make_line(3), 1.0)
    want = dense_mean_extinction_oracle(make_line(3), 1.0)
    assert got == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_trees_match_dense_solve(seed):
    g = random_tree(6, seed)
    for lam in (0.7, 1.8):
        assert exact_expected_extinction(g, lam) == pytest.approx(
            dense_mean_extinction_oracle(g, lam), rel=1e-9
        )


def test_capacity_errors():
    with pytest.raises(CapacityError):
        exact_expected_extinction(make_line(15), 1.0)
    with pytest.raises(CapacityError):
        exact_transient_survival(make_line(13), 1.0, {0}, 1.0)


def test_generator_rows_sum_to_zero():
    chain = build_chain(random_tree(5, 3), 1.3)
    q = chain.generator().toarray()
    assert np.allclose(q.sum(axis=1), 0.0, atol=1e-12)
    assert (q - np.diag(np.diag(q)) >= 0).all()
    assert np.allclose(q[0], 0.0)  # empty state absorbing


def test_path3_mc_cross_check():
    g = make_line(3)
    want = exact_expected_extinction(g, 1.0)
    taus = [extinction_time(g, 1.0, s, 1e5) for s in range(20_000)]
    mean = np.mean(taus)
    se = np.std(taus, ddof=1) / math.sqrt(len(taus))
    assert abs(mean - want) < 3 * se


# -- transient survival -------------------------------------------------------


def test_survival_at_zero_is_one():
    assert exact_transient_survival(make_line(3), 1.0, {1}, 0.0) == pytest.approx(1.0)


def test_survival_empty_start_zero():
    assert exact_transient_survival(make_line(3), 1.0, frozenset(), 5.0) == 0.0


@pytest.mark.parametrize("t", [0.3, 1.0, 2.7])
def test_single_vertex_survival_closed_form(t):
    got = exact_transient_survival(Graph(1, ()), 1.0, {0}, t, tol=1e-12)
    assert got == pytest.approx(math.exp(-t), abs=1e-10)


def test_k2_survival_mc_cross_check():
    g = make_line(2)
    want = exact_transient_survival(g, 2.0, {0, 1}, 1.0)
    from contactlab.process import survival_probability

    rep = survival_probability(g, 2.0, {0, 1}, 1.0, 100_000, 99)
    assert abs(rep.estimate - want) < 3 * rep.se


# -- extinction CDF -----------------------------------------------------------


def test_cdf_starts_at_zero_and_is_monotone():
    grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
    cdf = exact_cdf_extinction(make_star(4), 1.5, grid)
    assert cdf[0] == pytest.approx(0.0, abs=1e-12)
    assert all(b >= a - 1e-12 for a, b in zip(cdf, cdf[1:]))
    assert cdf[-1] <= 1.0 + 1e-12


def test_attract_inequality_exact_vs_exact():
    for g in (make_star(6), make_line(6)):
        for lam in (1.0, 2.0):
            mean = exact_expected_extinction(g, lam)
            grid = [mean * k / 10 for k in range(11)]
            cdf = exact_cdf_extinction(g, lam, grid)
            for t, p in zip(grid, cdf):
                assert p <= t / mean + 1e-8


def test_mean_bound_exp_n_plus_2_lam_m():
    for seed in range(6):
        g = random_tree(7, seed)
        for lam in (0.5, 1.0, 2.0):
            val = exact_expected_extinction(g, lam)
            assert math.log(val) <= g.n_vertices + 2 * lam * g.n_edges


def test_mean_monotone_in_lambda():
    g = random_tree(6, 9)
    vals = [exact_expected_extinction(g, lam) for lam in (0.25, 0.5, 1.0, 1.5, 2.0, 3.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_mean_tau_ge_one():
    # the last infected vertex must still flip an Exp(1) clock
    for seed in range(4):
        g = random_tree(5, seed)
        assert exact_expected_extinction(g, 0.3) >= 1.0


def test_cdf_consistent_with_survival():
    g = make_line(4)
    t = 2.0
    cdf = exact_cdf_extinction(g, 1.2, [t])[0]
    surv = exact_transient_survival(g, 1.2, frozenset(range(4)), t)
    assert cdf == pytest.approx(1.0 - surv, abs=1e-10)
