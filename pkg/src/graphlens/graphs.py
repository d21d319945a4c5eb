"""Undirected simple graphs with dense node indices, plus the walk sampler.

The graph is stored in CSR form (indptr/indices) with each neighbor list
sorted ascending. Graphs are immutable after construction; every operation
here either reads the graph or builds a new one.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .seeds import child_rng

logger = logging.getLogger(__name__)


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ComponentTooSmall(RuntimeError):
    """The start node's connected component has fewer nodes than requested."""


class WalkExhausted(RuntimeError):
    """The walk hit its step cap before collecting enough distinct nodes."""


# Step budget per walk, as a multiple of the distinct-node target.
WALK_STEP_CAP_FACTOR = 1000


@dataclass
class Graph:
    """Immutable undirected simple graph.

    indptr/indices form a CSR adjacency: the neighbors of node v are
    ``indices[indptr[v]:indptr[v+1]]``, sorted ascending. ``original_ids``
    maps dense index -> source-file id when the graph came from an edge list.
    """

    indptr: np.ndarray
    indices: np.ndarray
    original_ids: np.ndarray | None = None
    _component_ids: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return i < len(nbrs) and nbrs[i] == v

    def edges(self) -> Iterable[tuple[int, int]]:
        """Yield each undirected edge once, as (u, v) with u < v."""
        for u in range(self.node_count):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)

    def component_ids(self) -> np.ndarray:
        """Per-node connected-component label (computed once, then cached)."""
        if self._component_ids is None:
            self._component_ids = _label_components(self)
        return self._component_ids

    def component_size(self, v: int) -> int:
        ids = self.component_ids()
        return int(np.count_nonzero(ids == ids[v]))

    def adjacency_matrix(self) -> np.ndarray:
        """Dense 0/1 adjacency (uint8). Intended for small graphs only."""
        n = self.node_count
        a = np.zeros((n, n), dtype=np.uint8)
        for u in range(n):
            a[u, self.neighbors(u)] = 1
        return a


@dataclass(frozen=True)
class WalkSample:
    """Distinct nodes collected by one random walk; members[0] is the start."""

    start: int
    members: tuple[int, ...]
    lens_size: int


def graph_from_edges(edges: Iterable[tuple[int, int]], node_count: int,
                     original_ids: np.ndarray | None = None) -> Graph:
    """Build a Graph from an iterable of undirected edges over dense indices.

    Self-loops and duplicates must already be resolved by the caller; use
    parse_edge_list for raw input.
    """
    src: list[int] = []
    dst: list[int] = []
    for u, v in edges:
        src.append(u)
        dst.append(v)
        src.append(v)
        dst.append(u)
    src_arr = np.asarray(src, dtype=np.int64)
    dst_arr = np.asarray(dst, dtype=np.int64)
    order = np.lexsort((dst_arr, src_arr))
    indptr = np.zeros(node_count + 1, dtype=np.int64)
    counts = np.bincount(src_arr, minlength=node_count) if len(src_arr) else np.zeros(node_count, dtype=np.int64)
    indptr[1:] = np.cumsum(counts)
    return Graph(indptr=indptr, indices=dst_arr[order], original_ids=original_ids)


def parse_edge_list(text: str | Iterable[str]) -> Graph:
    """Parse whitespace-separated "u v" lines into a Graph.

    Lines starting with '#' are comments. Source ids are remapped to dense
    indices in first-appearance order; reverse duplicates collapse to one
    undirected edge; self-loops are dropped. Extra tokens after the first two
    are ignored (SNAP files sometimes carry weights or timestamps).
    """
    lines = text.splitlines() if isinstance(text, str) else text
    id_map: dict[int, int] = {}
    edge_set: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0

    def dense(raw: int) -> int:
        idx = id_map.get(raw)
        if idx is None:
            idx = len(id_map)
            id_map[raw] = idx
        return idx

    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) < 2:
            raise EdgeListParseError(lineno, f"expected at least 2 tokens, got {len(tokens)}")
        try:
            raw_u, raw_v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(lineno, f"non-integer node id in {tokens[:2]!r}") from None
        if raw_u < 0 or raw_v < 0:
            raise EdgeListParseError(lineno, "node ids must be nonnegative")
        u, v = dense(raw_u), dense(raw_v)
        if u == v:
            self_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in edge_set:
            duplicates += 1
        else:
            edge_set.add(key)

    if self_loops or duplicates:
        logger.warning("edge list cleanup: dropped %d self-loop(s), %d duplicate edge(s)",
                       self_loops, duplicates)

    original = np.empty(len(id_map), dtype=np.int64)
    for raw, idx in id_map.items():
        original[idx] = raw
    return graph_from_edges(sorted(edge_set), len(id_map), original_ids=original)


def load_edge_list(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh)


def write_edge_list(g: Graph, path: str) -> None:
    """Write the graph as dense-index "u v" lines (one per undirected edge).

    Files written here are normalized: node ids are exactly 0..N-1. Loading
    the file back renumbers nodes in first-appearance order, which usually
    differs from 0..N-1, but the loaded graph's original_ids maps each new
    position back to the id written here. Companion files keyed by node id
    (truth, tallies) therefore always speak this file's ids, and consumers
    translate through original_ids. A graph's own original_ids, if any, are
    not written; the ingest subcommand's ids.tsv records that mapping.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    """Subgraph on the given nodes, reindexed densely in iteration order.

    Keeps exactly the edges of g with both endpoints in the node set.
    """
    node_list = list(nodes)
    remap: dict[int, int] = {}
    for v in node_list:
        if not 0 <= v < g.node_count:
            raise IndexError(f"node {v} out of range for graph with {g.node_count} nodes")
        if v in remap:
            raise ValueError(f"duplicate node {v} in selection")
        remap[v] = len(remap)
    edges = []
    for v in node_list:
        for u in g.neighbors(v):
            u = int(u)
            if u in remap and remap[v] < remap[u]:
                edges.append((remap[v], remap[u]))
    return graph_from_edges(edges, len(node_list))


def random_walk_sample(g: Graph, start: int, target: int, seed: int) -> WalkSample:
    """Collect `target` distinct nodes by a simple random walk from `start`.

    Each step moves to a uniformly random neighbor of the current node. The
    walk fails with ComponentTooSmall if start's component cannot supply
    enough nodes, or WalkExhausted if the step cap (WALK_STEP_CAP_FACTOR x
    target) is reached first. Deterministic for a fixed (graph, start,
    target, seed).
    """
    if target < 2:
        raise ValueError("walk target must be at least 2")
    if not 0 <= start < g.node_count:
        raise IndexError(f"start node {start} out of range")
    if g.component_size(start) < target:
        raise ComponentTooSmall(
            f"component of node {start} has {g.component_size(start)} < {target} nodes")

    rng = child_rng(seed)
    members: list[int] = [start]
    seen = {start}
    current = start
    cap = WALK_STEP_CAP_FACTOR * target
    for _ in range(cap):
        nbrs = g.neighbors(current)
        current = int(nbrs[rng.randrange(len(nbrs))])
        if current not in seen:
            seen.add(current)
            members.append(current)
            if len(members) == target:
                return WalkSample(start=start, members=tuple(members), lens_size=target)
    raise WalkExhausted(f"walk from {start} collected {len(members)}/{target} nodes "
                        f"in {cap} steps")


def _label_components(g: Graph) -> np.ndarray:
    labels = np.full(g.node_count, -1, dtype=np.int64)
    current = 0
    for root in range(g.node_count):
        if labels[root] != -1:
            continue
        stack = [root]
        labels[root] = current
        while stack:
            v = stack.pop()
            for u in g.neighbors(v):
                if labels[u] == -1:
                    labels[u] = current
                    stack.append(int(u))
        current += 1
    return labels
