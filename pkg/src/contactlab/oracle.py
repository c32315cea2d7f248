"""Exact ground truth on small graphs: the full continuous-time Markov
chain over infection subsets, solved directly.

States are bitmasks over vertices; the empty mask is absorbing. Capacity
caps keep the state space at most 2^14 (expected times) or 2^12
(transient probabilities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from scipy.stats import poisson

from .graphs import Graph

MEAN_CAP = 14
TRANSIENT_CAP = 12


class CapacityError(ValueError):
    """State space would exceed the supported size."""


@dataclass(frozen=True)
class ChainModel:
    """Rate matrix of the infection chain, bitmask-indexed."""

    graph: Graph
    lam: float
    rates: scipy.sparse.csr_matrix  # off-diagonal rates, shape (2^n, 2^n)

    @property
    def n_states(self) -> int:
        return self.rates.shape[0]

    def out_rates(self) -> np.ndarray:
        return np.asarray(self.rates.sum(axis=1)).ravel()

    def generator(self) -> scipy.sparse.csr_matrix:
        """Q = rates - diag(out); rows sum to zero, empty row is zero."""
        return (self.rates - scipy.sparse.diags(self.out_rates())).tocsr()


def build_chain(g: Graph, lam: float, cap: int = MEAN_CAP) -> ChainModel:
    if lam <= 0:
        raise ValueError("lambda must be positive")
    n = g.n_vertices
    if n < 1:
        raise ValueError("graph must be nonempty")
    if n > cap:
        raise CapacityError(f"{n} vertices exceed the {cap}-vertex oracle cap")
    masks = np.arange(1 << n, dtype=np.int64)
    rows, cols, vals = [], [], []
    for x in range(n):
        bit = 1 << x
        sel = masks[(masks & bit) != 0]
        rows.append(sel)
        cols.append(sel ^ bit)
        vals.append(np.ones(sel.size))
    for x, y in g.directed_edges:
        bx, by = 1 << x, 1 << y
        sel = masks[((masks & bx) != 0) & ((masks & by) == 0)]
        rows.append(sel)
        cols.append(sel | by)
        vals.append(np.full(sel.size, lam))
    coo = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(1 << n, 1 << n),
    )
    return ChainModel(g, lam, coo.tocsr())


def exact_expected_extinction(g: Graph, lam: float) -> float:
    """E[tau] from full occupancy by solving the expected-absorption-time
    linear system over the 2^n - 1 transient states."""
    chain = build_chain(g, lam, cap=MEAN_CAP)
    n = g.n_vertices
    m = g.n_edges
    # A h = 1 with A = diag(out) - rates, restricted to nonempty states
    rates_tt = chain.rates[1:, 1:]
    a_mat = (scipy.sparse.diags(chain.out_rates()[1:]) - rates_tt).tocsc()
    b = np.ones(a_mat.shape[0])
    h = scipy.sparse.linalg.spsolve(a_mat, b)
    residual = np.abs(a_mat @ h - b).max()
    scale = max(1.0, np.abs(h).max())
    if residual / scale > 1e-10:
        raise RuntimeError(f"absorption solve residual {residual:.3e} too large")
    value = float(h[-1])  # full-occupancy state is mask 2^n - 1
    if value <= 0:
        raise RuntimeError("expected extinction time must be positive")
    if math.log(value) > n + 2 * lam * m + 1e-9:
        raise RuntimeError("expected extinction time exceeds the e^(n+2*lam*m) bound")
    return value


def _uniformized(g: Graph, lam: float):
    chain = build_chain(g, lam, cap=TRANSIENT_CAP)
    rate = g.n_vertices + 2.0 * lam * g.n_edges
    n_states = chain.n_states
    p_mat = (
        scipy.sparse.identity(n_states, format="csr")
        + chain.generator() / rate
    ).tocsr()
    return chain, rate, p_mat


def _truncation(mu: float, tol: float) -> int:
    if mu == 0:
        return 0
    k = int(poisson.isf(tol, mu))
    while poisson.sf(k, mu) >= tol:
        k += 1
    return k


def _absorbed_probabilities(g: Graph, lam: float, start_mask: int,
                            t_grid: Sequence[float], tol: float) -> list[float]:
    """P[state = empty at t] for each grid time, by uniformization with
    Poisson truncation error below tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if any(t < 0 for t in t_grid):
        raise ValueError("times must be nonnegative")
    _, rate, p_mat = _uniformized(g, lam)
    mus = [rate * t for t in t_grid]
    k_max = max((_truncation(mu, tol) for mu in mus), default=0)
    v = np.zeros(p_mat.shape[0])
    v[start_mask] = 1.0
    out = np.zeros(len(t_grid))
    for k in range(k_max + 1):
        weights = poisson.pmf(k, mus)
        out += weights * v[0]
        if k < k_max:
            v = v @ p_mat
    return [float(x) for x in out]


def exact_transient_survival(g: Graph, lam: float, start: Iterable[int], t: float,
                             tol: float = 1e-10) -> float:
    """P[xi^start_t != empty], exact up to the uniformization truncation tol."""
    conf = frozenset(start)
    for v in conf:
        if not (0 <= v < g.n_vertices):
            raise ValueError(f"vertex {v} is outside the graph")
    if not conf:
        return 0.0
    mask = 0
    for v in conf:
        mask |= 1 << v
    absorbed = _absorbed_probabilities(g, lam, mask, [t], tol)[0]
    return 1.0 - absorbed


def exact_cdf_extinction(g: Graph, lam: float, t_grid: Sequence[float],
                         tol: float = 1e-10) -> list[float]:
    """P[tau <= t] from full occupancy on each grid time."""
    full = (1 << g.n_vertices) - 1
    return _absorbed_probabilities(g, lam, full, list(t_grid), tol)
