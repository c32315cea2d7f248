"""Finite simple graphs: data model, generators, edge-list IO, and the
tree-decomposition algorithms used by the splitting experiments.

All operations are pure functions of their inputs (plus an explicit seed
where present). Ties are always broken by smallest vertex or edge id so
that every algorithm has a unique, reproducible output.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

from . import rng


class GraphError(ValueError):
    """Invalid graph construction or a violated operation precondition."""


class EdgeListError(GraphError):
    """Malformed edge-list text; message names the offending line."""


class SplitInfeasibleError(GraphError):
    """iterated_split cannot honor the requested part count/size."""

    def __init__(self, message: str, achieved: int):
        super().__init__(message)
        self.achieved = achieved


class DecompositionDefect(RuntimeError):
    """classify_tree failed to produce a witness it is guaranteed to find."""


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on vertices 0..n_vertices-1."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n_vertices < 0:
            raise GraphError("vertex count must be nonnegative")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise GraphError(f"edge ({u},{v}) references a vertex outside 0..{self.n_vertices - 1}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"parallel edge ({key[0]},{key[1]})")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def directed_edges(self) -> tuple[tuple[int, int], ...]:
        """Both orientations of every edge, sorted; indexes transmission clocks."""
        out = []
        for u, v in self.edges:
            out.append((u, v))
            out.append((v, u))
        return tuple(sorted(out))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def vertices(self) -> range:
        return range(self.n_vertices)

    def describe(self) -> str:
        return f"graph(n={self.n_vertices},m={self.n_edges})"


# ---------------------------------------------------------------------------
# generators


def make_line(n: int) -> Graph:
    """Path graph on n vertices with edges {i, i+1}."""
    if n < 1:
        raise GraphError("a line needs at least 1 vertex")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def make_star(n: int) -> Graph:
    """Star on n vertices; vertex 0 is the center."""
    if n < 2:
        raise GraphError("a star needs at least 2 vertices")
    return Graph(n, tuple((0, i) for i in range(1, n)))


def random_tree(n: int, seed: int) -> Graph:
    """Uniform random labeled tree on n vertices via a random Pruefer sequence."""
    if n < 1:
        raise GraphError("a tree needs at least 1 vertex")
    if n == 1:
        return Graph(1, ())
    if n == 2:
        return Graph(2, ((0, 1),))
    gen = rng.np_generator(rng.derive_key(seed, rng.KIND_TREE, n))
    seq = [int(x) for x in gen.integers(0, n, size=n - 2)]
    return Graph(n, tuple(_prufer_decode(seq, n)))


def _prufer_decode(seq: Sequence[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    # smallest-leaf elimination
    import heapq

    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u = heapq.heappop(leaves)
    w = heapq.heappop(leaves)
    edges.append((u, w))
    return edges


# ---------------------------------------------------------------------------
# edge-list IO

_HEADER_PREFIX = "# n="


def load_edge_list(text: str) -> Graph:
    """Parse edge-list text: one "u v" pair per line.

    Blank lines and '#' comments are ignored, except that a leading
    "# n=N" comment (as written by save_edge_list) pins the vertex count,
    which is otherwise inferred as max id + 1.
    """
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    pinned_n: Optional[int] = None
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith(_HEADER_PREFIX) and pinned_n is None:
                try:
                    pinned_n = int(line[len(_HEADER_PREFIX):].strip())
                except ValueError:
                    raise EdgeListError(f"line {lineno}: bad vertex-count header {line!r}")
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"line {lineno}: expected two vertex ids, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer token in {line!r}")
        if u < 0 or v < 0:
            raise EdgeListError(f"line {lineno}: negative vertex id in {line!r}")
        if u == v:
            raise EdgeListError(f"line {lineno}: self-loop {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise EdgeListError(f"line {lineno}: duplicate edge {key[0]} {key[1]}")
        seen.add(key)
        edges.append(key)
        max_id = max(max_id, u, v)
    n = pinned_n if pinned_n is not None else max_id + 1
    if n < max_id + 1:
        raise EdgeListError(f"vertex-count header n={pinned_n} smaller than largest edge id {max_id}")
    return Graph(n, tuple(edges))


def save_edge_list(g: Graph) -> str:
    """Canonical edge-list text: vertex-count header, sorted edges, u < v."""
    lines = [f"{_HEADER_PREFIX}{g.n_vertices}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# traversal helpers


def bfs_distances(g: Graph, source: int, within: Optional[frozenset[int]] = None) -> dict[int, int]:
    """BFS distance map from source, optionally restricted to a vertex set."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if w in dist or (within is not None and w not in within):
                continue
            dist[w] = dist[u] + 1
            queue.append(w)
    return dist


def connected_components(g: Graph, within: Optional[Iterable[int]] = None) -> list[frozenset[int]]:
    """Connected components (of the induced subgraph when within is given),
    ordered by smallest contained vertex."""
    verts = sorted(within) if within is not None else list(range(g.n_vertices))
    vset = set(verts)
    unseen = set(verts)
    comps = []
    for v in verts:
        if v not in unseen:
            continue
        comp = {v}
        unseen.discard(v)
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if w in vset and w in unseen:
                    unseen.discard(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(frozenset(comp))
    return comps


def is_connected(g: Graph) -> bool:
    if g.n_vertices == 0:
        return True
    return len(bfs_distances(g, 0)) == g.n_vertices


def is_tree(g: Graph) -> bool:
    return g.n_edges == g.n_vertices - 1 and is_connected(g)


def _require_tree(g: Graph, who: str):
    if not is_tree(g):
        raise GraphError(f"{who} requires a tree; got {g.describe()}")


def diameter_path(g: Graph) -> list[int]:
    """A longest shortest path, deterministic (double BFS, smallest-id ties)."""
    if g.n_vertices == 0:
        return []

    def farthest(src: int) -> tuple[int, dict[int, int]]:
        dist = bfs_distances(g, src)
        dmax = max(dist.values())
        v = min(u for u, d in dist.items() if d == dmax)
        return v, dist

    a, _ = farthest(0)
    b, dist_a = farthest(a)
    # walk back from b picking the smallest-id predecessor
    path = [b]
    cur = b
    while cur != a:
        cur = min(w for w in g.adjacency[cur] if dist_a.get(w, -1) == dist_a[cur] - 1)
        path.append(cur)
    path.reverse()
    return path


def induced_subgraph(g: Graph, verts: Iterable[int]) -> tuple[Graph, list[int]]:
    """Induced subgraph relabeled to 0..k-1 by ascending original id.

    Returns (subgraph, original_ids) with original_ids[new] == old.
    """
    orig = sorted(set(verts))
    index = {v: i for i, v in enumerate(orig)}
    edges = tuple(
        (index[u], index[v]) for u, v in g.edges if u in index and v in index
    )
    return Graph(len(orig), edges), orig


def spanning_tree(g: Graph) -> Graph:
    """Deterministic BFS spanning tree from vertex 0 (ascending neighbor ids)."""
    if g.n_vertices == 0:
        raise GraphError("spanning_tree requires a nonempty graph")
    comps = connected_components(g)
    if len(comps) > 1:
        a = sorted(comps[0])
        b = sorted(comps[1])
        raise GraphError(
            f"graph is disconnected: component {a[:8]} does not reach component {b[:8]}"
        )
    parent: dict[int, int] = {0: -1}
    queue = deque([0])
    edges = []
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if w not in parent:
                parent[w] = u
                edges.append((min(u, w), max(u, w)))
                queue.append(w)
    return Graph(g.n_vertices, tuple(edges))


# ---------------------------------------------------------------------------
# tree splitting


@dataclass(frozen=True)
class TreeSplit:
    """One balanced-edge split: removing removed_edge leaves side_a and side_b."""

    removed_edge: tuple[int, int]
    side_a: frozenset[int]
    side_b: frozenset[int]


def _subtree_sizes(g: Graph) -> tuple[list[int], list[int], list[int]]:
    """Root the tree at 0; return (order, parent, size) with size[v] = |subtree(v)|."""
    n = g.n_vertices
    parent = [-1] * n
    order = [0]
    seen = [False] * n
    seen[0] = True
    for u in order:
        for w in g.adjacency[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                order.append(w)
    size = [1] * n
    for u in reversed(order):
        if parent[u] >= 0:
            size[parent[u]] += size[u]
    return order, parent, size


def split_edge_balanced(t: Graph, d: int) -> TreeSplit:
    """Remove the edge whose larger side is smallest; both sides are
    guaranteed at least floor(n/d) vertices when all degrees are <= d < n.

    Ties are broken by the lexicographically smallest edge.
    """
    _require_tree(t, "split_edge_balanced")
    n = t.n_vertices
    if n < 2:
        raise GraphError("split_edge_balanced requires at least 2 vertices")
    if d < 2:
        # with d = 1 the only admissible tree is a single edge, whose sides
        # of size 1 cannot meet the floor(n/d) = 2 guarantee
        raise GraphError("degree bound d must be at least 2")
    if d >= n:
        raise GraphError(f"degree bound d={d} must be smaller than n={n}")
    if t.max_degree() > d:
        raise GraphError(f"tree has a vertex of degree {t.max_degree()} > d={d}")
    floor_bound = n // d
    _, parent, size = _subtree_sizes(t)
    best = None
    for u, v in t.edges:  # already sorted lexicographically
        child = v if parent[v] == u else u
        s = size[child]
        small, large = min(s, n - s), max(s, n - s)
        if small < floor_bound:
            continue
        if best is None or large < best[0]:
            best = (large, (u, v), child)
    if best is None:
        raise DecompositionDefect(
            f"no edge satisfies the floor(n/d)={floor_bound} guarantee on {t.describe()}"
        )
    _, (u, v), child = best
    child_side = frozenset(_collect_subtree(t, child, parent))
    other_side = frozenset(range(n)) - child_side
    if u in child_side:
        return TreeSplit((u, v), child_side, other_side)
    return TreeSplit((u, v), other_side, child_side)


def _collect_subtree(t: Graph, root: int, parent: list[int]) -> list[int]:
    out = [root]
    for u in out:
        for w in t.adjacency[u]:
            if w != parent[u] and parent[w] == u:
                out.append(w)
    return out


def centroid_vertex(t: Graph) -> int:
    """Vertex whose removal leaves components of size at most floor(n/2);
    smallest id among qualifying vertices."""
    _require_tree(t, "centroid_vertex")
    n = t.n_vertices
    if n == 1:
        return 0
    _, parent, size = _subtree_sizes(t)
    half = n // 2
    for v in range(n):
        worst = n - size[v]
        for w in t.adjacency[v]:
            if parent[w] == v:
                worst = max(worst, size[w])
        if worst <= half:
            return v
    raise DecompositionDefect("tree has no centroid; impossible")


def attached_subtrees(t: Graph, x: int) -> list[frozenset[int]]:
    """Components of t with x removed, ordered by smallest vertex id."""
    rest = [v for v in range(t.n_vertices) if v != x]
    return connected_components(t, rest)


def iterated_split(t: Graph, n_parts: int, min_size: int, degree_bound: int) -> list[frozenset[int]]:
    """Split a tree into n_parts connected pieces of size >= min_size by
    repeatedly applying split_edge_balanced to the largest remaining piece.

    Raises SplitInfeasibleError (carrying the achieved part count) as soon
    as the floor(|piece|/degree_bound) guarantee can no longer meet min_size.
    """
    _require_tree(t, "iterated_split")
    if n_parts < 1:
        raise GraphError("n_parts must be >= 1")
    if t.max_degree() > degree_bound:
        raise GraphError(
            f"tree has max degree {t.max_degree()} > degree_bound={degree_bound}"
        )
    if t.n_vertices < min_size:
        raise SplitInfeasibleError("whole tree is below min_size", achieved=0)
    parts: list[frozenset[int]] = [frozenset(range(t.n_vertices))]
    while len(parts) < n_parts:
        idx = max(range(len(parts)), key=lambda i: (len(parts[i]), -min(parts[i])))
        piece = parts[idx]
        guarantee = len(piece) // degree_bound
        if len(piece) <= degree_bound or guarantee < min_size:
            raise SplitInfeasibleError(
                f"cannot split a piece of {len(piece)} vertices into sides of >= "
                f"{min_size} under degree bound {degree_bound} "
                f"(guarantee floor(n/d)={guarantee})",
                achieved=len(parts),
            )
        sub, orig = induced_subgraph(t, piece)
        split = split_edge_balanced(sub, degree_bound)
        side_a = frozenset(orig[v] for v in split.side_a)
        side_b = frozenset(orig[v] for v in split.side_b)
        parts[idx:idx + 1] = [side_a, side_b]
    return sorted(parts, key=min)


# ---------------------------------------------------------------------------
# three-case classification of trees


class DecompositionKind(str, Enum):
    HIGH_DEGREE_VERTEX = "HighDegreeVertex"
    MANY_MEDIUM_SUBTREES = "ManyMediumSubtrees"
    FEW_PIECES = "FewPieces"


@dataclass(frozen=True)
class Decomposition:
    """Outcome of classify_tree: disjoint connected parts plus the witness
    data needed to re-check the advertised inequality."""

    parts: tuple[frozenset[int], ...]
    kind: DecompositionKind
    witness: Optional[int] = None
    level_k: Optional[int] = None
    branch: str = ""


def classify_tree(t: Graph, a_const: float, exponent_eps: float, mode: str) -> Decomposition:
    """Classify a tree into exactly one of the three decomposition cases.

    mode "level3" uses the (log n)^10 / (log n)^13 exponent family; mode
    "level4" uses the (log n)^(1+eps) .. (log n)^(4+eps) family with the
    medium case stratified by level_k in {1,2,3}. Thresholds use natural
    logarithms. The high-degree case is checked first; otherwise the
    centroid construction applies and the returned witness is re-verified
    against the case inequality before being returned.
    """
    if mode not in ("level3", "level4"):
        raise GraphError(f"mode must be level3 or level4, got {mode!r}")
    if a_const <= 0 or exponent_eps <= 0:
        raise GraphError("a_const and exponent_eps must be positive")
    _require_tree(t, "classify_tree")
    n = t.n_vertices
    if n < 2:
        raise GraphError("classify_tree requires at least 2 vertices")
    logn = math.log(n)
    eps = exponent_eps
    p = 10.0 if mode == "level3" else 1.0 + eps

    deg_threshold = n / logn**p
    degs = [t.degree(v) for v in range(n)]
    dmax = max(degs)
    if dmax >= deg_threshold:
        v = degs.index(dmax)
        star = frozenset({v} | set(t.adjacency[v]))
        return Decomposition(parts=(star,), kind=DecompositionKind.HIGH_DEGREE_VERTEX,
                             witness=v, branch="degree")

    x = centroid_vertex(t)
    comps = attached_subtrees(t, x)
    sizes = [len(c) for c in comps]

    if mode == "level3":
        big = a_const * logn**13
        medium_lo = 0.25 * logn**10
        count_many = n / (4.0 * a_const * logn**13)
        count_few = n / (a_const * logn**13) + 1.0
        idx_i = [i for i, s in enumerate(sizes) if s >= big]
        idx_j = [i for i, s in enumerate(sizes) if medium_lo <= s < big]
        if sum(sizes[i] for i in idx_j) > n / 4.0 and len(idx_j) >= count_many:
            return Decomposition(parts=tuple(comps[i] for i in idx_j),
                                 kind=DecompositionKind.MANY_MEDIUM_SUBTREES,
                                 witness=x, branch="hypJ")
        cand = _few_pieces(comps, idx_i, x, n)
        if cand is not None and len(cand) <= count_few:
            return Decomposition(parts=cand, kind=DecompositionKind.FEW_PIECES,
                                 witness=x, branch="hypI")
        single = _few_pieces_singletons(comps, x, n)
        if single is not None and len(single) <= count_few:
            return Decomposition(parts=single, kind=DecompositionKind.FEW_PIECES,
                                 witness=x, branch="hypI-singletons")
        raise DecompositionDefect(
            f"level3 classification found no valid witness on {t.describe()} (A={a_const})"
        )

    # level4
    big = a_const * logn ** (4 + eps)
    lo = [0.25 * logn ** (1 + eps), logn ** (2 + eps), logn ** (3 + eps)]
    hi = [logn ** (2 + eps), logn ** (3 + eps), big]
    idx_i = [i for i, s in enumerate(sizes) if s >= big]
    idx_jk = [
        [i for i, s in enumerate(sizes) if lo[k] <= s < hi[k]] for k in range(3)
    ]
    count_few = n / (a_const * logn ** (4 + eps)) + 1.0
    if sum(sizes[i] for i in idx_i) >= n / 2.0:
        cand = _few_pieces(comps, idx_i, x, n)
        if cand is not None and len(cand) <= count_few:
            return Decomposition(parts=cand, kind=DecompositionKind.FEW_PIECES,
                                 witness=x, branch="case_i")
    for k in range(3):
        needed = n / (12.0 * a_const * logn ** (k + 2 + eps))
        if sum(sizes[i] for i in idx_jk[k]) >= n / 12.0 and len(idx_jk[k]) >= needed:
            return Decomposition(parts=tuple(comps[i] for i in idx_jk[k]),
                                 kind=DecompositionKind.MANY_MEDIUM_SUBTREES,
                                 witness=x, level_k=k + 1,
                                 branch=f"case_{('ii', 'iii', 'iv')[k]}")
    single = _few_pieces_singletons(comps, x, n)
    if single is not None and len(single) <= count_few:
        return Decomposition(parts=single, kind=DecompositionKind.FEW_PIECES,
                             witness=x, branch="fallback-singletons")
    raise DecompositionDefect(
        f"level4 classification found no valid witness on {t.describe()} "
        f"(A={a_const}, eps={eps})"
    )


def _few_pieces(comps: list[frozenset[int]], idx_big: list[int], x: int, n: int):
    """Big components as their own parts; the centroid absorbs the rest.
    Returns None when the absorbed part would exceed n/2."""
    rest = {x}
    for i, c in enumerate(comps):
        if i not in idx_big:
            rest |= c
    if len(rest) > n / 2.0:
        return None
    parts = [comps[i] for i in idx_big] + [frozenset(rest)]
    return tuple(sorted(parts, key=min))


def _few_pieces_singletons(comps: list[frozenset[int]], x: int, n: int):
    """Every attached subtree as its own part plus the bare centroid."""
    parts = list(comps) + [frozenset({x})]
    if any(len(p) > n / 2.0 for p in parts):
        return None
    return tuple(sorted(parts, key=min))


def verify_decomposition(t: Graph, dec: Decomposition, a_const: float,
                         exponent_eps: float, mode: str) -> None:
    """Independently re-check the advertised case inequality; raises on failure."""
    n = t.n_vertices
    logn = math.log(n)
    eps = exponent_eps
    seen: set[int] = set()
    for part in dec.parts:
        if seen & part:
            raise DecompositionDefect("parts overlap")
        seen |= part
        if len(connected_components(t, part)) != 1:
            raise DecompositionDefect("a part is not connected")
    if dec.kind is DecompositionKind.HIGH_DEGREE_VERTEX:
        p = 10.0 if mode == "level3" else 1.0 + eps
        if t.degree(dec.witness) < n / logn**p:
            raise DecompositionDefect("high-degree witness below threshold")
        return
    if dec.kind is DecompositionKind.MANY_MEDIUM_SUBTREES:
        for part in dec.parts:
            if dec.witness in part:
                raise DecompositionDefect("witness inside a medium part")
            if not any(dec.witness in t.adjacency[v] for v in part):
                raise DecompositionDefect("part not attached to the witness vertex")
        if mode == "level3":
            size_lo = 0.25 * logn**10
            count_lo = n / (4.0 * a_const * logn**13)
        else:
            k = dec.level_k
            size_lo = 0.25 * logn ** (k + eps)
            count_lo = n / (12.0 * a_const * logn ** (k + 1 + eps))
        if any(len(p_) < size_lo for p_ in dec.parts):
            raise DecompositionDefect("medium part below size floor")
        if len(dec.parts) < count_lo:
            raise DecompositionDefect("too few medium parts")
        return
    # FEW_PIECES
    if seen != set(range(n)):
        raise DecompositionDefect("FewPieces parts do not cover the tree")
    if any(len(p_) > n / 2.0 for p_ in dec.parts):
        raise DecompositionDefect("a piece exceeds half the tree")
    exponent = 13 if mode == "level3" else 4 + eps
    if len(dec.parts) > n / (a_const * logn**exponent) + 1.0:
        raise DecompositionDefect("too many pieces")


# ---------------------------------------------------------------------------
# bridges and star-or-segment extraction


def bridge_subgraph(g: Graph, part_i: frozenset[int], part_j: frozenset[int]) -> tuple[Graph, int]:
    """Union of two disjoint connected parts of a tree with the shortest
    path between them; returns the induced (relabeled) subgraph and its
    size sigma = |part_i| + |part_j| + dist - 1."""
    _require_tree(g, "bridge_subgraph")
    pi, pj = frozenset(part_i), frozenset(part_j)
    if pi & pj:
        raise GraphError("parts overlap")
    if not pi or not pj:
        raise GraphError("parts must be nonempty")
    for p in (pi, pj):
        if len(connected_components(g, p)) != 1:
            raise GraphError("each part must induce a connected subtree")
    # multi-source BFS out of part_i until part_j is hit
    parent: dict[int, int] = {v: -1 for v in pi}
    queue = deque(sorted(pi))
    hit = None
    while queue:
        u = queue.popleft()
        if u in pj:
            hit = u
            break
        for w in g.adjacency[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    if hit is None:
        raise GraphError("parts are not connected through the graph")
    path = []
    cur = hit
    while cur != -1:
        path.append(cur)
        cur = parent[cur]
    dist = len(path) - 1
    union = pi | pj | set(path)
    sigma = len(pi) + len(pj) + dist - 1
    if len(union) != sigma:
        raise DecompositionDefect(
            f"bridge size {len(union)} != sigma {sigma}; tree invariant broken"
        )
    sub, _ = induced_subgraph(g, union)
    if not is_connected(sub):
        raise DecompositionDefect("bridge subgraph is not connected")
    return sub, sigma


def find_star_or_segment(g: Graph, k: int) -> Optional[frozenset[int]]:
    """A vertex set of size k inducing a star (around a max-degree vertex)
    or a path (prefix of a diameter path), or None if neither exists."""
    if k < 1:
        raise GraphError("k must be >= 1")
    if not is_connected(g) or g.n_vertices == 0:
        raise GraphError("find_star_or_segment requires a connected nonempty graph")
    dmax = g.max_degree()
    if dmax >= k - 1 and k <= g.n_vertices:
        center = min(v for v in range(g.n_vertices) if g.degree(v) == dmax)
        if k == 1:
            return frozenset({center})
        leaves = g.adjacency[center][: k - 1]
        return frozenset({center, *leaves})
    path = diameter_path(g)
    if len(path) >= k:
        return frozenset(path[:k])
    return None


# ---------------------------------------------------------------------------
# graph-spec grammar used by the CLI and the service


def parse_graph_spec(spec: str, allow_file: bool = True) -> Graph:
    """Parse the compact grammar line:N | star:N | tree:N:SEED | file:PATH."""
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "line" and len(parts) == 2:
            return make_line(int(parts[1]))
        if kind == "star" and len(parts) == 2:
            return make_star(int(parts[1]))
        if kind == "tree" and len(parts) == 3:
            return random_tree(int(parts[1]), int(parts[2]))
        if kind == "file" and len(parts) >= 2:
            if not allow_file:
                raise GraphError("file: specs are not accepted here; inline the edge list")
            path = spec[len("file:"):]
            with open(path, "r", encoding="utf-8") as fh:
                return load_edge_list(fh.read())
    except ValueError as exc:
        if isinstance(exc, GraphError):
            raise
        raise GraphError(f"bad graph spec {spec!r}: {exc}") from exc
    raise GraphError(
        f"bad graph spec {spec!r}; expected line:N, star:N, tree:N:SEED or file:PATH"
    )


def graph_descriptor(g: Graph, spec: Optional[str] = None) -> str:
    """Short reproducible descriptor for config echoes."""
    if spec and not spec.startswith("file:"):
        return spec
    import hashlib

    digest = hashlib.sha256(save_edge_list(g).encode()).hexdigest()[:12]
    return f"edges:n={g.n_vertices}:m={g.n_edges}:{digest}"
