"""Contact-process runs on Harris systems: extinction times, coupled
multi-start trajectories, survival estimation, lit-configuration checks,
and the right-edge diagnostic on line segments.

Every run is windowed: the Harris system starts at horizon max(1, n) and
doubles whenever the process outlives it. Arrival streams are counter
based, so the realized trajectory (and tau in particular) is bit-exactly
independent of the doubling schedule and of checkpoint granularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from . import rng
from ._sweep import sweep_final, sweep_hit
from .graphs import Graph, graph_descriptor, is_tree, make_line
from .harris import HarrisError, sample_harris
from .reporting import ExperimentReport, wilson_interval


class CouplingStatus(str, Enum):
    EXTINCT = "Extinct"
    COUPLED = "Coupled"
    DECOUPLED = "Decoupled"


@dataclass(frozen=True)
class Trajectory:
    """One realization: checkpointed configurations plus extinction data."""

    graph: Graph
    seed: int
    checkpoints: tuple[tuple[float, frozenset[int]], ...]
    extinction_time: Optional[float]
    time_cap: float

    def to_csv(self) -> str:
        """Checkpoint dump `time,infected_count,infected_bitmask_hex`
        (bitmask only representable for graphs with at most 64 vertices)."""
        if self.graph.n_vertices > 64:
            raise ValueError("bitmask dump is limited to 64 vertices; use JSON")
        lines = ["time,infected_count,infected_bitmask_hex"]
        for t, conf in self.checkpoints:
            mask = 0
            for v in conf:
                mask |= 1 << v
            lines.append(f"{t!r},{len(conf)},{mask:x}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "n_vertices": self.graph.n_vertices,
            "seed": self.seed,
            "time_cap": self.time_cap,
            "extinction_time": self.extinction_time,
            "checkpoints": [
                {"time": t, "infected": sorted(conf)} for t, conf in self.checkpoints
            ],
        }


def _initial_horizon(g: Graph) -> float:
    return max(1.0, float(g.n_vertices))


class _Feed:
    """A Harris system extended geometrically on demand."""

    def __init__(self, g: Graph, lam: float, seed: int, time_cap: float):
        self.system = sample_harris(g, lam, min(_initial_horizon(g), time_cap), seed)

    def window(self, t0: float, t1: float):
        while self.system.horizon < t1:
            self.system = self.system.extend(self.system.horizon * 2.0)
        return self.system.events_between(t0, t1)

    def boundaries(self, t_end: float):
        """Successive (t0, t1] windows covering (0, t_end] along horizon
        doublings; consuming lazily keeps dead runs from materializing more."""
        t = 0.0
        while t < t_end:
            while self.system.horizon <= t:
                self.system = self.system.extend(self.system.horizon * 2.0)
            t_next = min(self.system.horizon, t_end)
            yield t, t_next
            t = t_next


def _as_state(g: Graph, conf: Iterable[int]) -> np.ndarray:
    state = np.zeros(g.n_vertices, np.uint8)
    for v in conf:
        if not (0 <= v < g.n_vertices):
            raise HarrisError(f"vertex {v} is outside the graph")
        state[v] = 1
    return state


def extinction_time(g: Graph, lam: float, seed: int, time_cap: float) -> Optional[float]:
    """Extinction time of the process started from full occupancy, or None
    if it outlives time_cap (right-censored)."""
    if g.n_vertices < 1:
        raise HarrisError("graph must be nonempty")
    if lam <= 0 or time_cap <= 0:
        raise HarrisError("lambda and time_cap must be positive")
    feed = _Feed(g, lam, seed, time_cap)
    state = np.ones(g.n_vertices, np.uint8)
    for t0, t1 in feed.boundaries(time_cap):
        times, kind, a, b = feed.window(t0, t1)
        tau = sweep_final(times, kind, a, b, state, t1)
        if tau >= 0.0:
            return float(tau)
    return None


def run_trajectory(g: Graph, lam: float, seed: int, time_cap: float,
                   start: Optional[Iterable[int]] = None,
                   checkpoint_dt: Optional[float] = None) -> Trajectory:
    """Simulate one realization, recording configurations on a checkpoint
    grid (default: 32 checkpoints across time_cap) until extinction or cap."""
    if g.n_vertices < 1:
        raise HarrisError("graph must be nonempty")
    if lam <= 0 or time_cap <= 0:
        raise HarrisError("lambda and time_cap must be positive")
    conf = frozenset(range(g.n_vertices)) if start is None else frozenset(start)
    if not conf:
        return Trajectory(g, seed, ((0.0, frozenset()),), 0.0, time_cap)
    dt = checkpoint_dt if checkpoint_dt is not None else time_cap / 32.0
    if dt <= 0:
        raise HarrisError("checkpoint_dt must be positive")
    feed = _Feed(g, lam, seed, time_cap)
    state = _as_state(g, conf)
    checkpoints: list[tuple[float, frozenset[int]]] = [(0.0, conf)]
    tau: Optional[float] = None
    next_cp = dt
    for t0, t1 in feed.boundaries(time_cap):
        times, kind, a, b = feed.window(t0, t1)
        lo = 0
        t_prev = t0
        while t_prev < t1:
            seg_end = min(next_cp, t1)
            hi = int(np.searchsorted(times, seg_end, side="right"))
            got = sweep_final(times[lo:hi], kind[lo:hi], a[lo:hi], b[lo:hi], state, seg_end)
            if got >= 0.0:
                tau = float(got)
                break
            lo = hi
            t_prev = seg_end
            if seg_end == next_cp:
                checkpoints.append(
                    (seg_end, frozenset(int(v) for v in np.nonzero(state)[0]))
                )
                next_cp += dt
        if tau is not None:
            break
    if tau is not None:
        checkpoints.append((next_cp, frozenset()))
    return Trajectory(g, seed, tuple(checkpoints), tau, time_cap)


def coupling_statuses(g: Graph, lam: float, start: Iterable[int], t_grid: Sequence[float],
                      seed: int) -> list[CouplingStatus]:
    """Statuses of (xi^start vs xi^full) on one shared Harris system at the
    given times. Coupled and Extinct are absorbing along the trajectory."""
    conf = frozenset(start)
    if not conf:
        raise HarrisError("start configuration must be nonempty")
    grid = sorted(t_grid)
    if grid and grid[0] < 0:
        raise HarrisError("grid times must be nonnegative")
    t_end = grid[-1] if grid else 0.0
    feed = _Feed(g, lam, seed, max(t_end, 1.0))
    s_a = _as_state(g, conf)
    s_f = np.ones(g.n_vertices, np.uint8)
    coupled = bool((s_a == s_f).all())
    dead = not s_a.any()
    out: list[CouplingStatus] = []
    t_prev = 0.0
    for tg in grid:
        if tg > t_prev and not dead:
            times, kind, a, b = feed.window(t_prev, tg)
            if coupled:
                sweep_final(times, kind, a, b, s_f, tg)
                s_a = s_f
            else:
                sweep_final(times, kind, a, b, s_a, tg)
                sweep_final(times, kind, a, b, s_f, tg)
                coupled = bool((s_a == s_f).all())
            dead = not s_a.any()
            t_prev = tg
        if dead:
            out.append(CouplingStatus.EXTINCT)
        elif coupled:
            out.append(CouplingStatus.COUPLED)
        else:
            out.append(CouplingStatus.DECOUPLED)
    return out


def coupling_status(g: Graph, lam: float, start: Iterable[int], t: float,
                    seed: int) -> CouplingStatus:
    """Status of the coupling at a single time."""
    return coupling_statuses(g, lam, start, [t], seed)[0]


def _survives_to(g: Graph, lam: float, seed: int, start: frozenset[int], t: float) -> bool:
    """Whether xi^start is nonempty at time t (early exit on extinction)."""
    if not start:
        return False
    if t == 0:
        return True
    feed = _Feed(g, lam, seed, t)
    state = _as_state(g, start)
    for t0, t1 in feed.boundaries(t):
        times, kind, a, b = feed.window(t0, t1)
        tau = sweep_final(times, kind, a, b, state, t1)
        if tau >= 0.0:
            return False
    return True


def survival_probability(g: Graph, lam: float, start: Iterable[int], t: float,
                         replicas: int, base_seed: int,
                         graph_spec: Optional[str] = None,
                         quantity: Optional[str] = None) -> ExperimentReport:
    """Monte Carlo estimate of P[xi^start_t != empty] with a 95% score interval."""
    conf = frozenset(start)
    if replicas < 1:
        raise HarrisError("replicas must be >= 1")
    if t < 0:
        raise HarrisError("t must be nonnegative")
    hits = 0
    for i in range(replicas):
        seed_i = rng.derive_key(base_seed, rng.KIND_REPLICA, i)
        if _survives_to(g, lam, seed_i, conf, t):
            hits += 1
    p = hits / replicas
    se = math.sqrt(p * (1.0 - p) / replicas)
    lo, hi = wilson_interval(hits, replicas)
    return ExperimentReport(
        quantity=quantity or f"survival_probability@t={t!r}",
        estimate=p,
        se=se,
        replicas=replicas,
        censored=0,
        base_seed=base_seed,
        config={
            "lambda": lam,
            "graph": graph_descriptor(g, graph_spec),
            "start": sorted(conf),
            "t": t,
            "ci95": [lo, hi],
        },
    )


def _is_path_graph(g: Graph) -> bool:
    return is_tree(g) and g.max_degree() <= 2


def _is_star_graph(g: Graph) -> bool:
    return is_tree(g) and (g.n_vertices <= 2 or g.max_degree() == g.n_vertices - 1)


@dataclass(frozen=True)
class LitCheck:
    """Survival estimate against the lit threshold 1 - exp(-c0 n)."""

    report: ExperimentReport
    threshold: float
    time_horizon: float
    lit: bool
    decisive: bool

    def to_json_dict(self) -> dict:
        return {
            "report": self.report.to_json_dict(),
            "threshold": self.threshold,
            "time_horizon": self.time_horizon,
            "lit": self.lit,
            "decisive": self.decisive,
        }


def is_lit(f: Graph, xi: Iterable[int], lam: float, c0: float, replicas: int,
           base_seed: int, graph_spec: Optional[str] = None) -> LitCheck:
    """Estimate whether configuration xi on a line segment or star F is lit:
    survival to exp(c0 n) with probability above 1 - exp(-c0 n).

    The verdict carries the 95% interval; `decisive` says whether the
    interval clears the threshold entirely.
    """
    if not (_is_path_graph(f) or _is_star_graph(f)):
        raise HarrisError("is_lit requires a line segment or a star graph")
    if c0 <= 0:
        raise HarrisError("c0 must be positive")
    n = f.n_vertices
    horizon = math.exp(c0 * n)
    threshold = 1.0 - math.exp(-c0 * n)
    conf = frozenset(xi)
    if not conf:
        report = ExperimentReport(
            quantity="lit_survival",
            estimate=0.0,
            se=0.0,
            replicas=replicas,
            censored=0,
            base_seed=base_seed,
            config={"lambda": lam, "graph": graph_descriptor(f, graph_spec),
                    "start": [], "t": horizon, "ci95": [0.0, 0.0]},
        )
        return LitCheck(report, threshold, horizon, lit=False, decisive=True)
    report = survival_probability(f, lam, conf, horizon, replicas, base_seed,
                                  graph_spec, quantity="lit_survival")
    lo, hi = report.config["ci95"]
    lit = report.estimate > threshold
    decisive = lo > threshold or hi < threshold
    return LitCheck(report, threshold, horizon, lit=lit, decisive=decisive)


@dataclass(frozen=True)
class RightEdgeTrace:
    """Piecewise-constant trace of the rightmost infected site of a line
    segment started from {0}."""

    points: tuple[tuple[float, int], ...]
    extinction_time: Optional[float]
    t_max: float

    def crossed_by(self, n: int, deadline: float) -> bool:
        return any(r == n - 1 and t <= deadline for t, r in self.points)

    def to_json_dict(self) -> dict:
        return {
            "points": [{"time": t, "right_edge": r} for t, r in self.points],
            "extinction_time": self.extinction_time,
            "t_max": self.t_max,
        }


def right_edge_trace(n: int, lam: float, seed: int, t_max: float) -> RightEdgeTrace:
    """Track max{x : xi^{0}_t(x) = 1} on the n-vertex segment until
    extinction or t_max."""
    if n < 1:
        raise HarrisError("segment needs at least one vertex")
    g = make_line(n)
    feed = _Feed(g, lam, seed, t_max)
    infected = {0}
    right = 0
    points: list[tuple[float, int]] = [(0.0, 0)]
    tau: Optional[float] = None
    for t0, t1 in feed.boundaries(t_max):
        times, kind, a, b = feed.window(t0, t1)
        for i in range(times.size):
            t = float(times[i])
            if kind[i] == 0:
                v = int(a[i])
                if v in infected:
                    infected.discard(v)
                    if not infected:
                        tau = t
                        break
                    if v == right:
                        right = max(infected)
                        points.append((t, right))
            else:
                x, y = int(a[i]), int(b[i])
                if x in infected and y not in infected:
                    infected.add(y)
                    if y > right:
                        right = y
                        points.append((t, right))
        if tau is not None:
            break
    return RightEdgeTrace(tuple(points), tau, t_max)


def crossing_time(n: int, lam: float, seed: int, t_limit: float) -> Optional[float]:
    """First time the segment's right end {n-1} is reached from (0, 0),
    or None if the process dies or the limit passes first."""
    if n < 1:
        raise HarrisError("segment needs at least one vertex")
    if n == 1:
        return 0.0
    g = make_line(n)
    feed = _Feed(g, lam, seed, t_limit)
    state = np.zeros(n, np.uint8)
    state[0] = 1
    for t0, t1 in feed.boundaries(t_limit):
        times, kind, a, b = feed.window(t0, t1)
        tau, hit = sweep_hit(times, kind, a, b, state, t1, n - 1)
        if hit >= 0.0:
            return float(hit)
        if tau >= 0.0:
            return None
    return None
