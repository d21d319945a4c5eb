"""Synthetic testbeds: graph families, corpus extraction, and splicing.

A heterogeneous test network is synthesized by generating many small labeled
subgraphs (star, wheel, ladder, ...), taking their disjoint union, and adding
random splice edges between randomly chosen parts. Ground truth is the class
of the part each node came from. The same module extracts node-disjoint
training subgraphs from a host network with blocked random walks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .classifier import ClassCatalog
from .graphs import Graph, WALK_STEP_CAP_FACTOR, graph_from_edges, induced_subgraph
from .seeds import child_rng

logger = logging.getLogger(__name__)

FAMILY_KINDS = ("star", "wheel", "ladder", "ring", "clique", "grid")

# stage tags folded into derived seeds so distinct stages never share streams
_STREAM_CORPUS = 11
_STREAM_SPLICE = 12
_STREAM_REPAIR = 13


@dataclass(frozen=True)
class LabeledSubgraph:
    """A connected part destined for splicing, with its class and identity."""

    graph: Graph
    class_index: int
    subgraph_id: int
    size_class: int

    def __post_init__(self) -> None:
        n = self.graph.node_count
        if n != self.size_class:
            raise ValueError(f"part has {n} nodes but size class {self.size_class}")
        if n > 0 and self.graph.component_size(0) != n:
            raise ValueError("part must be connected")


@dataclass
class HeterogeneousNetwork:
    """Spliced disjoint union of labeled parts.

    truth[v] is the class index of v's source part and provenance[v] its
    subgraph id. splice_edges are the randomly drawn cross-part edges;
    repair_edges were added afterwards to make the network connected and are
    tracked separately.
    """

    graph: Graph
    truth: np.ndarray
    provenance: np.ndarray
    splice_edges: list[tuple[int, int]]
    repair_edges: list[tuple[int, int]]


def generate_family(kind: str, n: int, seed: int = 0) -> Graph:
    """Standard graph of the named family on n nodes.

    seed is reserved for families with randomized variants; none of the
    current kinds use it. grid requires a composite n and uses the most
    nearly square factorization.
    """
    if kind == "star":
        if n < 2:
            raise ValueError("star needs n >= 2")
        edges = [(0, i) for i in range(1, n)]
    elif kind == "wheel":
        if n < 4:
            raise ValueError("wheel needs n >= 4")
        edges = [(0, i) for i in range(1, n)]
        edges += [(1 + i, 1 + (i + 1) % (n - 1)) for i in range(n - 1)]
    elif kind == "ladder":
        if n < 4 or n % 2:
            raise ValueError("ladder needs an even n >= 4")
        half = n // 2
        edges = [(i, i + 1) for i in range(half - 1)]
        edges += [(half + i, half + i + 1) for i in range(half - 1)]
        edges += [(i, half + i) for i in range(half)]
    elif kind == "ring":
        if n < 3:
            raise ValueError("ring needs n >= 3")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "clique":
        if n < 2:
            raise ValueError("clique needs n >= 2")
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    elif kind == "grid":
        rows = _near_square_factor(n)
        if rows < 2:
            raise ValueError(f"grid needs a composite n with both sides >= 2, got {n}")
        cols = n // rows
        edges = []
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    edges.append((r * cols + c, r * cols + c + 1))
                if r + 1 < rows:
                    edges.append((r * cols + c, (r + 1) * cols + c))
    else:
        raise ValueError(f"unknown family kind: {kind!r} (expected one of {FAMILY_KINDS})")
    return graph_from_edges(edges, n)


def _near_square_factor(n: int) -> int:
    best = 1
    d = 1
    while d * d <= n:
        if n % d == 0:
            best = d
        d += 1
    return best


def extract_corpus(g: Graph, count: int, sizes: list[int] | tuple[int, ...],
                   seed: int, class_index: int = 0,
                   first_id: int = 0) -> list[LabeledSubgraph]:
    """Node-disjoint walk subgraphs from g: `count` per size.

    Starts are drawn uniformly from nodes not used by any earlier subgraph
    and the walk itself never enters a used node, so all returned parts are
    pairwise node-disjoint. Sizes are filled largest first so that long walks
    still find room; the returned list is ordered by (input size order,
    extraction index). When the graph runs out of room the result is simply
    shorter than requested (logged at warning level).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = child_rng(seed, _STREAM_CORPUS)
    used = np.zeros(g.node_count, dtype=bool)
    by_size: dict[int, list[tuple[int, ...]]] = {s: [] for s in sizes}
    for size in sorted(set(sizes), reverse=True):
        attempts_left = 30 * count
        while len(by_size[size]) < count and attempts_left > 0:
            free = np.flatnonzero(~used)
            if len(free) < size:
                break
            start = int(free[rng.randrange(len(free))])
            members = _blocked_walk(g, start, size, used, rng)
            attempts_left -= 1
            if members is None:
                continue
            used[list(members)] = True
            by_size[size].append(members)
    parts: list[LabeledSubgraph] = []
    next_id = first_id
    for size in sizes:
        got = by_size[size]
        if len(got) < count:
            logger.warning("corpus: only %d/%d disjoint subgraphs of size %d",
                           len(got), count, size)
        for members in got:
            parts.append(LabeledSubgraph(graph=induced_subgraph(g, members),
                                         class_index=class_index,
                                         subgraph_id=next_id, size_class=size))
            next_id += 1
    return parts


def _blocked_walk(g: Graph, start: int, target: int, used: np.ndarray,
                  rng) -> tuple[int, ...] | None:
    """Random walk avoiding used nodes; None when stuck or over the step cap."""
    members = [start]
    member_set = {start}
    current = start
    cap = WALK_STEP_CAP_FACTOR * target
    steps = 0
    while len(members) < target:
        if steps >= cap:
            return None
        nbrs = [int(u) for u in g.neighbors(current) if not used[u]]
        if not nbrs:
            return None
        current = nbrs[rng.randrange(len(nbrs))]
        steps += 1
        if current not in member_set:
            member_set.add(current)
            members.append(current)
    return tuple(members)


def splice(parts: list[LabeledSubgraph], extra_per_part: int,
           seed: int) -> HeterogeneousNetwork:
    """Disjoint union of parts plus extra_per_part * len(parts) splice edges.

    Each splice edge joins a uniformly random node of one uniformly random
    part to a uniformly random node of another; draws that repeat a part pair
    into an existing edge are redrawn, so the splice edge count is exact.
    Any components left over are then joined by extra random cross-component
    edges, reported separately in repair_edges.
    """
    if len(parts) < 2:
        raise ValueError("splicing needs at least 2 parts")
    offsets = []
    total = 0
    for part in parts:
        offsets.append(total)
        total += part.graph.node_count
    truth = np.empty(total, dtype=np.int64)
    provenance = np.empty(total, dtype=np.int64)
    edges: list[tuple[int, int]] = []
    for part, off in zip(parts, offsets):
        truth[off:off + part.graph.node_count] = part.class_index
        provenance[off:off + part.graph.node_count] = part.subgraph_id
        edges.extend((off + u, off + v) for u, v in part.graph.edges())

    rng = child_rng(seed, _STREAM_SPLICE)
    wanted = extra_per_part * len(parts)
    existing = set(edges)
    splice_edges: list[tuple[int, int]] = []
    guard = 0
    while len(splice_edges) < wanted:
        guard += 1
        if guard > 1000 * (wanted + 1):
            raise RuntimeError("splice: could not place the requested edges "
                               "(graph too small for the extra edge count)")
        a = rng.randrange(len(parts))
        b = rng.randrange(len(parts))
        if a == b:
            continue
        u = offsets[a] + rng.randrange(parts[a].graph.node_count)
        v = offsets[b] + rng.randrange(parts[b].graph.node_count)
        key = (min(u, v), max(u, v))
        if key in existing:
            continue
        existing.add(key)
        splice_edges.append(key)

    g = graph_from_edges(edges + splice_edges, total)
    repair_edges: list[tuple[int, int]] = []
    comp = g.component_ids()
    if comp.max() > 0:
        repair_rng = child_rng(seed, _STREAM_REPAIR)
        base = np.flatnonzero(comp == comp[0])
        for cid in range(int(comp.max()) + 1):
            if cid == comp[0]:
                continue
            other = np.flatnonzero(comp == cid)
            u = int(base[repair_rng.randrange(len(base))])
            v = int(other[repair_rng.randrange(len(other))])
            repair_edges.append((min(u, v), max(u, v)))
            base = np.concatenate([base, other])
        g = graph_from_edges(edges + splice_edges + repair_edges, total)
        logger.warning("splice: added %d repair edges to connect the network",
                       len(repair_edges))
    return HeterogeneousNetwork(graph=g, truth=truth, provenance=provenance,
                                splice_edges=splice_edges, repair_edges=repair_edges)


def node_diversity(h: HeterogeneousNetwork) -> np.ndarray:
    """Distinct classes in each node's closed neighborhood (own class counts)."""
    return diversity_from_truth(h.graph, h.truth)


def diversity_from_truth(g: Graph, truth: np.ndarray) -> np.ndarray:
    """node_diversity for a graph and truth loaded from files."""
    out = np.empty(g.node_count, dtype=np.int64)
    for v in range(g.node_count):
        classes = {int(truth[v])}
        classes.update(int(truth[u]) for u in g.neighbors(v))
        out[v] = len(classes)
    return out


def save_truth(h: HeterogeneousNetwork, catalog: ClassCatalog, path: str) -> None:
    """TSV of node_id, class_name, subgraph_id."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in range(h.graph.node_count):
            fh.write(f"{v}\t{catalog[int(h.truth[v])]}\t{int(h.provenance[v])}\n")


def load_truth(path: str, catalog: ClassCatalog) -> tuple[np.ndarray, np.ndarray]:
    """Read a truth TSV back into (truth, provenance) arrays."""
    truths: list[int] = []
    provs: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{i + 1}: expected 3 tab-separated fields")
            node, name, prov = fields
            if int(node) != i:
                raise ValueError(f"{path}:{i + 1}: node ids must be dense and sorted")
            truths.append(catalog.index(name))
            provs.append(int(prov))
    return np.asarray(truths, dtype=np.int64), np.asarray(provs, dtype=np.int64)
