"""The graphical construction: per-vertex recovery clocks (rate 1) and
per-directed-edge transmission clocks (rate lambda), materialized lazily
on [0, horizon] from counter-based streams.

A HarrisSystem is logically immutable; extend() returns a new value whose
arrival times on the old window are bit-identical (prefix stability).
Because the k-th arrival gap of a clock is a pure function of the clock
key and k, every quantity read off a system is a deterministic function
of (graph, lambda, base_seed) alone, never of the materialization
schedule.
"""

from __future__ import annotations

import heapq
import math
from typing import Iterable, NamedTuple, Optional

import numpy as np

from . import rng
from ._sweep import empty_events, sweep_final
from .graphs import Graph

Configuration = frozenset[int]

_EMPTY = empty_events()


class HarrisError(ValueError):
    """Violated precondition on a Harris-system operation."""


class SpaceTimePoint(NamedTuple):
    vertex: int
    time: float


def _batch_size(rate: float, span: float) -> int:
    mean = rate * max(span, 0.0)
    return int(mean + 6.0 * math.sqrt(mean + 1.0)) + 8


class _ClockGroup:
    """All clocks of one rate: per-clock draw counts and last arrivals.

    extend_to() returns the freshly drawn (times, clock-id) arrays; the
    k-th gap of a clock is a pure function of (key, k), so appending never
    disturbs what was already drawn.
    """

    def __init__(self, keys: np.ndarray, rate: float,
                 counts: Optional[np.ndarray] = None,
                 last: Optional[np.ndarray] = None):
        self.keys = keys
        self.rate = rate
        self.counts = np.zeros(keys.size, np.int64) if counts is None else counts
        self.last = np.zeros(keys.size, np.float64) if last is None else last

    def snapshot(self) -> "_ClockGroup":
        return _ClockGroup(self.keys, self.rate, self.counts.copy(), self.last.copy())

    def extend_to(self, target: float) -> tuple[np.ndarray, np.ndarray]:
        new_t, new_c = [], []
        need = np.nonzero(self.last <= target)[0] if self.keys.size else np.empty(0, np.int64)
        while need.size:
            span = float(target - self.last[need].min())
            batch = _batch_size(self.rate, span)
            counters = self.counts[need][:, None].astype(np.uint64) + np.arange(
                batch, dtype=np.uint64
            )
            gaps = rng.exponential_gaps(self.keys[need][:, None], counters, self.rate)
            # prepend the last arrival so accumulation stays strictly
            # sequential (one rounding per gap) across batch boundaries
            seeded = np.concatenate([self.last[need][:, None], gaps], axis=1)
            arrivals = np.cumsum(seeded, axis=1)[:, 1:]
            new_t.append(arrivals.ravel())
            new_c.append(np.repeat(need.astype(np.int32), batch))
            self.counts[need] += batch
            self.last[need] = arrivals[:, -1]
            need = need[self.last[need] <= target]
        if not new_t:
            return np.empty(0), np.empty(0, np.int32)
        return np.concatenate(new_t), np.concatenate(new_c)


def _make_block(rec_times, rec_clock, tx_times, tx_clock, src, dst):
    """One sorted event block: (times, kind, a, b) ordered by
    (time, recoveries first, clock id)."""
    n_rec = rec_times.size
    n_tx = tx_times.size
    if n_rec + n_tx == 0:
        return _EMPTY
    times = np.concatenate([rec_times, tx_times])
    kind = np.concatenate([np.zeros(n_rec, np.uint8), np.ones(n_tx, np.uint8)])
    if n_tx:
        a = np.concatenate([rec_clock, src[tx_clock]])
        b = np.concatenate([np.full(n_rec, -1, np.int32), dst[tx_clock]])
    else:
        a = rec_clock
        b = np.full(n_rec, -1, np.int32)
    order = np.lexsort((b, a, kind, times))
    return times[order], kind[order], a[order], b[order]


class HarrisSystem:
    """Seeded family of Poisson event streams over a graph.

    Events live in sorted blocks, one per materialization step; block time
    ranges may overlap slightly (each clock keeps its first arrival beyond
    the horizon), so windowed queries merge the few overlapping slices.
    """

    def __init__(self, graph: Graph, lam: float, horizon: float, base_seed: Optional[int],
                 rec_group: Optional[_ClockGroup], tx_group: Optional[_ClockGroup],
                 blocks: tuple):
        self.graph = graph
        self.lam = lam
        self.horizon = horizon
        self.base_seed = base_seed
        self._rec_group = rec_group
        self._tx_group = tx_group
        self._blocks = blocks
        self._clock_cache: Optional[tuple[list, dict]] = None

    # -- construction ------------------------------------------------------

    @classmethod
    def sample(cls, graph: Graph, lam: float, horizon: float, base_seed: int) -> "HarrisSystem":
        if lam <= 0:
            raise HarrisError(f"infection rate must be positive, got {lam}")
        if horizon < 0:
            raise HarrisError("horizon must be nonnegative")
        n = graph.n_vertices
        keys_rec = rng.derive_keys(
            base_seed, np.uint64(rng.KIND_RECOVERY), np.arange(n, dtype=np.uint64)
        )
        src, dst = _directed_arrays(graph)
        if src.size:
            keys_tx = rng.derive_keys(base_seed, np.uint64(rng.KIND_TRANSMISSION), src, dst)
        else:
            keys_tx = np.empty(0, np.uint64)
        rec_group = _ClockGroup(np.atleast_1d(keys_rec), 1.0)
        tx_group = _ClockGroup(np.atleast_1d(keys_tx), lam)
        rt, rc = rec_group.extend_to(horizon)
        tt, tc = tx_group.extend_to(horizon)
        block = _make_block(rt, rc.astype(np.int32), tt, tc, src, dst)
        return cls(graph, lam, horizon, base_seed, rec_group, tx_group, (block,))

    @classmethod
    def from_events(cls, graph: Graph, lam: float, horizon: float,
                    recoveries: dict[int, Iterable[float]],
                    transmissions: dict[tuple[int, int], Iterable[float]]) -> "HarrisSystem":
        """Fixture constructor with explicit event times; cannot be extended."""
        rec_t, rec_c = [], []
        for v, ts in recoveries.items():
            if not (0 <= v < graph.n_vertices):
                raise HarrisError(f"vertex {v} is outside the graph")
            arr = np.asarray(sorted(ts), dtype=np.float64)
            if arr.size and (np.diff(arr) <= 0).any():
                raise HarrisError(f"recovery times at vertex {v} are not strictly increasing")
            rec_t.append(arr)
            rec_c.append(np.full(arr.size, v, np.int32))
        dir_index = {e: i for i, e in enumerate(graph.directed_edges)}
        tx_t, tx_c = [], []
        for e, ts in transmissions.items():
            if e not in dir_index:
                raise HarrisError(f"{e} is not a directed edge of the graph")
            arr = np.asarray(sorted(ts), dtype=np.float64)
            tx_t.append(arr)
            tx_c.append(np.full(arr.size, dir_index[e], np.int32))
        src, dst = _directed_arrays(graph)
        block = _make_block(
            np.concatenate(rec_t) if rec_t else np.empty(0),
            np.concatenate(rec_c) if rec_c else np.empty(0, np.int32),
            np.concatenate(tx_t) if tx_t else np.empty(0),
            np.concatenate(tx_c) if tx_c else np.empty(0, np.int32),
            src, dst,
        )
        return cls(graph, lam, horizon, None, None, None, (block,))

    def extend(self, new_horizon: float) -> "HarrisSystem":
        if new_horizon < self.horizon:
            raise HarrisError(
                f"cannot shrink horizon from {self.horizon} to {new_horizon}"
            )
        if new_horizon == self.horizon:
            return self
        if self.base_seed is None:
            raise HarrisError("a fixture system has no seed and cannot be extended")
        rec_group = self._rec_group.snapshot()
        tx_group = self._tx_group.snapshot()
        rt, rc = rec_group.extend_to(new_horizon)
        tt, tc = tx_group.extend_to(new_horizon)
        src, dst = _directed_arrays(self.graph)
        block = _make_block(rt, rc.astype(np.int32), tt, tc, src, dst)
        blocks = self._blocks + ((block,) if block[0].size else ())
        return HarrisSystem(self.graph, self.lam, new_horizon, self.base_seed,
                            rec_group, tx_group, blocks)

    # -- event access ------------------------------------------------------

    def events_between(self, t0: float, t1: float):
        """All events with time in (t0, t1], sorted by (time, recoveries
        first, then clock id). Returns (times, kind, a, b) arrays."""
        if t1 > self.horizon:
            raise HarrisError(
                f"window end {t1} exceeds materialized horizon {self.horizon}; extend first"
            )
        found = []
        for times, kind, a, b in self._blocks:
            lo = int(np.searchsorted(times, t0, side="right"))
            hi = int(np.searchsorted(times, t1, side="right"))
            if hi > lo:
                found.append((times[lo:hi], kind[lo:hi], a[lo:hi], b[lo:hi]))
        if not found:
            return _EMPTY
        if len(found) == 1:
            return found[0]
        times = np.concatenate([f[0] for f in found])
        kind = np.concatenate([f[1] for f in found])
        a = np.concatenate([f[2] for f in found])
        b = np.concatenate([f[3] for f in found])
        order = np.lexsort((b, a, kind, times))
        return times[order], kind[order], a[order], b[order]

    def _clocks(self):
        """Per-clock sorted arrival arrays (built on demand; feeds the path
        search)."""
        if self._clock_cache is None:
            n = self.graph.n_vertices
            rec: list[list[np.ndarray]] = [[] for _ in range(n)]
            tx: dict[tuple[int, int], list[np.ndarray]] = {
                e: [] for e in self.graph.directed_edges
            }
            for times, kind, a, b in self._blocks:
                mask_rec = kind == 0
                for v in range(n):
                    rec[v].append(times[mask_rec & (a == v)])
                for (x, y) in self.graph.directed_edges:
                    tx[(x, y)].append(times[~mask_rec & (a == x) & (b == y)])
            rec_flat = [np.concatenate(r) if r else np.empty(0) for r in rec]
            tx_flat = {e: (np.concatenate(v) if v else np.empty(0)) for e, v in tx.items()}
            self._clock_cache = (rec_flat, tx_flat)
        return self._clock_cache

    def recovery_times(self, v: int) -> np.ndarray:
        """Recovery marks of vertex v within [0, horizon]."""
        arr = self._clocks()[0][v]
        return arr[: int(np.searchsorted(arr, self.horizon, side="right"))]

    def transmission_times(self, x: int, y: int) -> np.ndarray:
        """Transmission arrivals on the directed edge (x, y) within [0, horizon]."""
        arr = self._clocks()[1][(x, y)]
        return arr[: int(np.searchsorted(arr, self.horizon, side="right"))]

    def dump_events_csv(self, t_max: Optional[float] = None) -> str:
        """Debug dump: `time,kind(R|T),vertex[,target]`, in sweep order."""
        t1 = self.horizon if t_max is None else min(t_max, self.horizon)
        times, kind, a, b = self.events_between(0.0, t1)
        lines = ["time,kind,vertex,target"]
        for i in range(times.size):
            if kind[i] == 0:
                lines.append(f"{float(times[i])!r},R,{a[i]},")
            else:
                lines.append(f"{float(times[i])!r},T,{a[i]},{b[i]}")
        return "\n".join(lines) + "\n"

    # -- configuration dynamics --------------------------------------------

    def _check_config(self, conf: Iterable[int]) -> frozenset[int]:
        out = frozenset(conf)
        for v in out:
            if not (0 <= v < self.graph.n_vertices):
                raise HarrisError(f"vertex {v} is outside the graph")
        return out

    def evolve(self, initial: Iterable[int], t0: float, t1: float) -> Configuration:
        """Configuration at t1 of the process equal to `initial` at t0,
        read off this Harris system by an event sweep over (t0, t1]."""
        if not (0 <= t0 <= t1):
            raise HarrisError(f"need 0 <= t0 <= t1, got ({t0}, {t1})")
        conf = self._check_config(initial)
        times, kind, a, b = self.events_between(t0, t1)
        state = np.zeros(self.graph.n_vertices, np.uint8)
        for v in conf:
            state[v] = 1
        sweep_final(times, kind, a, b, state, t1)
        return frozenset(int(v) for v in np.nonzero(state)[0])

    def reaches(self, frm: SpaceTimePoint, to: SpaceTimePoint,
                restrict: Optional[Iterable[int]] = None) -> bool:
        """True iff an infection path connects frm to to: piecewise-constant
        in space, avoiding recovery marks while sitting at a vertex and
        jumping only at transmission arrivals (within `restrict` if given).

        This is an explicit search over occupancy segments, independent of
        evolve()'s event sweep.
        """
        if frm.time > to.time:
            raise HarrisError("path endpoints out of time order")
        if to.time > self.horizon:
            raise HarrisError("target time beyond materialized horizon; extend first")
        allowed = None
        if restrict is not None:
            allowed = frozenset(restrict)
            if frm.vertex not in allowed or to.vertex not in allowed:
                raise HarrisError("restrict must contain both endpoints")
        for v in (frm.vertex, to.vertex):
            if not (0 <= v < self.graph.n_vertices):
                raise HarrisError(f"vertex {v} is outside the graph")
        if frm.vertex == to.vertex and frm.time == to.time:
            return True  # (x,s) <-> (x,s) by convention

        rec, tx = self._clocks()
        t_target = to.time
        # Dijkstra over (vertex, occupancy segment) keyed by earliest entry:
        # once a vertex is occupied it stays so until its next recovery mark.
        best: dict[tuple[int, int], float] = {}
        heap: list[tuple[float, int]] = []

        def push(vertex: int, entry: float):
            seg = int(np.searchsorted(rec[vertex], entry, side="right"))
            key = (vertex, seg)
            if key not in best or entry < best[key]:
                best[key] = entry
                heapq.heappush(heap, (entry, vertex))

        push(frm.vertex, frm.time)
        while heap:
            entry, v = heapq.heappop(heap)
            seg = int(np.searchsorted(rec[v], entry, side="right"))
            if best.get((v, seg), math.inf) < entry:
                continue
            seg_end = rec[v][seg] if seg < rec[v].size else math.inf
            if v == to.vertex and entry <= t_target < seg_end:
                return True
            cap = min(seg_end, t_target)
            for w in self.graph.adjacency[v]:
                if allowed is not None and w not in allowed:
                    continue
                arr = tx[(v, w)]
                lo = int(np.searchsorted(arr, entry, side="right"))
                hi = int(np.searchsorted(arr, cap, side="right"))
                for u in arr[lo:hi]:
                    if u < seg_end:
                        push(w, float(u))
        return False

    def dual_evolve(self, anchor: SpaceTimePoint, s: float) -> Configuration:
        """The set of y with (y, t-s) connected to (x, t) by an infection
        path; computed by sweeping the events of (t-s, t] backward with
        reversed transmission roles."""
        if s < 0 or s > anchor.time:
            raise HarrisError(f"dual duration {s} must lie in [0, {anchor.time}]")
        if anchor.time > self.horizon:
            raise HarrisError("anchor beyond materialized horizon; extend first")
        if not (0 <= anchor.vertex < self.graph.n_vertices):
            raise HarrisError(f"vertex {anchor.vertex} is outside the graph")
        times, kind, a, b = self.events_between(anchor.time - s, anchor.time)
        state = np.zeros(self.graph.n_vertices, np.uint8)
        state[anchor.vertex] = 1
        for i in range(times.size - 1, -1, -1):
            if kind[i] == 1:
                if state[b[i]]:
                    state[a[i]] = 1
            else:
                state[a[i]] = 0
        return frozenset(int(v) for v in np.nonzero(state)[0])


def _directed_arrays(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    if not graph.directed_edges:
        return np.empty(0, np.int32), np.empty(0, np.int32)
    arr = np.asarray(graph.directed_edges, dtype=np.int32)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def sample_harris(graph: Graph, lam: float, horizon: float, base_seed: int) -> HarrisSystem:
    """Materialize a Harris system for `graph` on [0, horizon]."""
    return HarrisSystem.sample(graph, lam, horizon, base_seed)
