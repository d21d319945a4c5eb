"""Run every lens over every node and tally the assigned labels.

For each node v and lens size s, a random walk from v collects s distinct
nodes; the induced subgraph is embedded and classified. The predicted class
increments v's (s, start) tally cell and every other walk member's
(s, member) cell. Tally row order is size ascending, start before member.

Each walk's seed is mix64(master_seed, node, size, repeat), so results are
identical no matter how work is scheduled; the worker pool only partitions
nodes. The same seed is passed to the classifier as its salt, which lets
stochastic stand-in classifiers stay deterministic too.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classifier import ClassCatalog
from .embedding import embed_image
from .graphs import ComponentTooSmall, Graph, WalkExhausted, induced_subgraph, \
    random_walk_sample
from .seeds import mix64


@dataclass
class LensRun:
    """Dense tally cube plus the walks that failed.

    tallies[v, 2*i + m, j] counts how often lens sizes[i] in mode m
    (0 = start, 1 = member) assigned class j to node v. failures holds
    (node, size, reason) triples for walks that could not complete.
    """

    sizes: tuple[int, ...]
    class_count: int
    tallies: np.ndarray
    failures: list[tuple[int, int, str]]


def classifier_class_count(model) -> int:
    """Number of classes a classifier emits (catalog length or class_count)."""
    catalog = getattr(model, "catalog", None)
    if catalog is not None:
        return len(catalog)
    return int(model.class_count)


def run_lenses(g: Graph, models: dict[int, object], sizes: tuple[int, ...] | list[int],
               master_seed: int, *, workers: int = 1,
               walks_per_node: int = 1) -> LensRun:
    """One walk per node per size (times walks_per_node), tallied by class.

    models maps lens size -> classifier. Workers each hold a full tally
    array; at very large node counts prefer workers=1 or ample memory.
    """
    sizes = tuple(sizes)
    if sorted(set(sizes)) != list(sizes):
        raise ValueError("sizes must be ascending and unique")
    counts = {classifier_class_count(models[s]) for s in sizes}
    if len(counts) != 1:
        raise ValueError("models disagree on the number of classes")
    class_count = counts.pop()
    for s in sizes:
        if models[s].lens_size != s:
            raise ValueError(f"model for size {s} reports lens_size {models[s].lens_size}")

    n = g.node_count
    if workers < 1:
        raise ValueError("workers must be >= 1")
    bounds = [n * i // workers for i in range(workers + 1)]
    chunks = [(g, models, sizes, master_seed, walks_per_node, class_count,
               bounds[i], bounds[i + 1]) for i in range(workers)
              if bounds[i] < bounds[i + 1]]
    if len(chunks) <= 1:
        results = [_run_chunk(args) for args in chunks]
    else:
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(_run_chunk, chunks))

    tallies = np.zeros((n, 2 * len(sizes), class_count), dtype=np.int64)
    failures: list[tuple[int, int, str]] = []
    for part_tallies, part_failures in results:
        tallies += part_tallies
        failures.extend(part_failures)
    return LensRun(sizes=sizes, class_count=class_count, tallies=tallies,
                   failures=failures)


def _run_chunk(args) -> tuple[np.ndarray, list[tuple[int, int, str]]]:
    g, models, sizes, master_seed, walks_per_node, class_count, lo, hi = args
    tallies = np.zeros((g.node_count, 2 * len(sizes), class_count), dtype=np.int64)
    failures: list[tuple[int, int, str]] = []
    for v in range(lo, hi):
        for i, size in enumerate(sizes):
            for rep in range(walks_per_node):
                seed = mix64(master_seed, v, size, rep)
                try:
                    walk = random_walk_sample(g, v, size, seed)
                except ComponentTooSmall:
                    failures.append((v, size, "component_too_small"))
                    continue
                except WalkExhausted:
                    failures.append((v, size, "walk_exhausted"))
                    continue
                img = embed_image(induced_subgraph(g, walk.members))
                label = models[size].predict_label(img, salt=seed)
                tallies[v, 2 * i, label] += 1
                for u in walk.members[1:]:
                    tallies[u, 2 * i + 1, label] += 1
    return tallies, failures


def per_lens_accuracy(tallies: np.ndarray, truth: np.ndarray,
                      sizes: tuple[int, ...] | list[int],
                      mode: str = "pooled") -> dict[int, float | None]:
    """Percent of tallied assignments landing in the true class, per size.

    mode selects the start rows, the member rows, or both pooled. Sizes whose
    selected rows hold no counts map to None.
    """
    out: dict[int, float | None] = {}
    for i, size in enumerate(sizes):
        if mode == "start":
            block = tallies[:, 2 * i, :]
        elif mode == "member":
            block = tallies[:, 2 * i + 1, :]
        elif mode == "pooled":
            block = tallies[:, 2 * i, :] + tallies[:, 2 * i + 1, :]
        else:
            raise ValueError(f"mode must be start, member, or pooled, not {mode!r}")
        total = int(block.sum())
        if total == 0:
            out[size] = None
            continue
        correct = int(block[np.arange(len(truth)), truth].sum())
        out[size] = 100.0 * correct / total
    return out


def write_tally_csv(run: LensRun, catalog: ClassCatalog, path: str,
                    node_ids: np.ndarray | None = None) -> None:
    """Audit dump, one `node,row,class,count` line per nonzero tally cell.

    node_ids translates tally row positions to external node ids (identity
    when omitted). Loading an edge list renumbers nodes, so runs on a loaded
    graph must pass its original_ids here to keep the node column in the same
    id space as the truth file. Lines come out sorted by external node id.
    """
    order = (range(run.tallies.shape[0]) if node_ids is None
             else np.argsort(node_ids))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node,row,class,count\n")
        modes = ("start", "member")
        for v in order:
            node_block = run.tallies[v]
            if not node_block.any():
                continue
            label = int(v) if node_ids is None else int(node_ids[v])
            for r in range(node_block.shape[0]):
                for j in range(node_block.shape[1]):
                    count = int(node_block[r, j])
                    if count:
                        row_name = f"{run.sizes[r // 2]}.{modes[r % 2]}"
                        fh.write(f"{label},{row_name},{catalog[j]},{count}\n")


def read_tally_csv(path: str, catalog: ClassCatalog,
                   sizes: tuple[int, ...] | list[int],
                   node_count: int) -> np.ndarray:
    """Rebuild the dense tally cube from a write_tally_csv dump."""
    sizes = tuple(sizes)
    row_index = {}
    for i, size in enumerate(sizes):
        row_index[f"{size}.start"] = 2 * i
        row_index[f"{size}.member"] = 2 * i + 1
    tallies = np.zeros((node_count, 2 * len(sizes), len(catalog)), dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "node,row,class,count":
            raise ValueError(f"{path}: unexpected tally header {header!r}")
        for ln, line in enumerate(fh, start=2):
            node_s, row_name, class_name, count_s = line.rstrip("\n").split(",")
            tallies[int(node_s), row_index[row_name],
                    catalog.index(class_name)] = int(count_s)
    return tallies


def write_failures_csv(run: LensRun, path: str,
                       node_ids: np.ndarray | None = None) -> None:
    """CSV of walks that failed: node,size,reason.

    node_ids translates start-node positions to external ids, as in
    write_tally_csv.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node,size,reason\n")
        for node, size, reason in run.failures:
            label = int(node) if node_ids is None else int(node_ids[node])
            fh.write(f"{label},{size},{reason}\n")
