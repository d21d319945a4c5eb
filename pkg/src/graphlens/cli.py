"""Command-line entry points.

Subcommands cover the full pipeline: ingest an edge list, build a training
corpus and models, splice a synthetic heterogeneous testbed, run the lenses,
learn weights, evaluate (CSV reports plus rendered figures), analyze
homogeneity, or run the whole demo end to end. Every randomized step derives
from the mandatory master seed, so re-running a subcommand with the same
config yields byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .aggregation import (load_weights, naive_weights, node_distribution,
                          save_weights, solve_weights_lp)
from .classifier import (ClassCatalog, load_models, save_models,
                         train_models_from_corpus)
from .config import RunConfig, load_config
from .embedding import embed_image, load_corpus, save_corpus
from .evaluation import (accuracy_curve, build_diversity_records,
                         confusion_reward, diversity_report, homogeneity_entry,
                         write_curve_csv, write_diversity_csv,
                         write_homogeneity_csv, write_predictions_csv,
                         write_reward_csv)
from .graphs import Graph, load_edge_list, parse_edge_list, write_edge_list
from .pipeline import (per_lens_accuracy, read_tally_csv, run_lenses,
                       write_failures_csv, write_tally_csv)
from .seeds import child_rng, mix64
from .testbed import (LabeledSubgraph, diversity_from_truth, extract_corpus,
                      generate_family, load_truth, save_truth, splice)

# stage tags for derived seeds
_STREAM_SPLIT = 31
_STREAM_CORPUS_CLASS = 32
_STREAM_HOMOGENEITY = 33

# LP training nodes beyond this rarely move the 2|sizes| weights but dominate
# demo runtime; applies only when the cap was left at its default
_DEMO_LP_CAP = 600


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphlens",
        description="Node classification for topologically heterogeneous "
                    "graphs via random-walk lenses.")
    parser.add_argument("--version", action="version",
                        version=f"graphlens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize an edge list into a graph store")
    p.add_argument("input", help="edge-list file (u v per line, # comments)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_ingest)

    p = _sub_with_config(sub, "corpus",
                         "extract a PBM training corpus from family hosts")
    p.add_argument("--out", required=True, help="corpus directory to create")
    p.set_defaults(handler=cmd_corpus)

    p = _sub_with_config(sub, "train", "train per-size centroid models")
    p.add_argument("--corpus", required=True, help="PBM corpus directory")
    p.add_argument("--out", required=True, help="model directory to create")
    p.set_defaults(handler=cmd_train)

    p = _sub_with_config(sub, "splice",
                         "build a spliced heterogeneous testbed with truth")
    p.add_argument("--out", required=True, help="testbed directory to create")
    p.set_defaults(handler=cmd_splice)

    p = _sub_with_config(sub, "lens", "run every lens over every node")
    p.add_argument("--network", required=True, help="edge-list file")
    p.add_argument("--truth", required=True, help="truth TSV")
    p.add_argument("--models", required=True, help="model directory")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_lens)

    p = _sub_with_config(sub, "weights", "learn lens weights from tallies")
    p.add_argument("--tally", required=True, help="tally CSV from the lens step")
    p.add_argument("--truth", required=True, help="truth TSV")
    p.add_argument("--method", choices=("lp", "naive"), default="lp")
    p.add_argument("--out", required=True, help="weights file to write")
    p.set_defaults(handler=cmd_weights)

    p = _sub_with_config(sub, "evaluate",
                         "curves, reward matrix, diversity report, figures")
    p.add_argument("--network", required=True, help="edge-list file")
    p.add_argument("--truth", required=True, help="truth TSV")
    p.add_argument("--tally", required=True, help="tally CSV from the lens step")
    p.add_argument("--weights", required=True, help="weights file")
    p.add_argument("--tau", type=float, default=None,
                   help="tau for the reward matrix and predictions "
                        "(default: the peak-accuracy tau)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_evaluate)

    p = _sub_with_config(sub, "homogeneity",
                         "run each pure single-class network with the "
                         "multi-class models")
    p.add_argument("--models", required=True, help="model directory")
    p.add_argument("--weights", required=True, help="weights file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_homogeneity)

    p = _sub_with_config(sub, "demo",
                         "end-to-end synthetic run: corpus, train, splice, "
                         "lens, weights, evaluate, homogeneity")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_demo)
    return parser


def _sub_with_config(sub, name: str, help_text: str) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--sizes", default=None, help="comma-separated lens sizes")
    p.add_argument("--classes", default=None,
                   help="comma-separated class (family) names")
    p.add_argument("--corpus-count", dest="corpus_count", type=int, default=None,
                   help="training subgraphs per class per size")
    p.add_argument("--parts-per-class", dest="parts_per_class", type=int,
                   default=None, help="spliced parts per class")
    p.add_argument("--splice-extra", dest="splice_extra", type=int, default=None,
                   help="splice edges per part")
    p.add_argument("--tau-step", dest="tau_step", type=float, default=None)
    p.add_argument("--train-fraction", dest="train_fraction", type=float,
                   default=None)
    p.add_argument("--lp-node-cap", dest="lp_node_cap", type=int, default=None)
    p.add_argument("--walks-per-node", dest="walks_per_node", type=int,
                   default=None)
    p.add_argument("--workers", type=int, default=None)
    return p


def _config_from(args) -> RunConfig:
    overrides: dict[str, object] = {
        "seed": args.seed,
        "corpus_count": args.corpus_count,
        "parts_per_class": args.parts_per_class,
        "splice_extra": args.splice_extra,
        "tau_step": args.tau_step,
        "train_fraction": args.train_fraction,
        "lp_node_cap": args.lp_node_cap,
        "walks_per_node": args.walks_per_node,
        "workers": args.workers,
    }
    if args.sizes is not None:
        overrides["sizes"] = tuple(int(tok) for tok in args.sizes.split(","))
    if args.classes is not None:
        overrides["classes"] = tuple(tok.strip() for tok in args.classes.split(","))
    return load_config(args.config, overrides)


def cmd_ingest(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        g = parse_edge_list(fh.read())
    os.makedirs(args.out, exist_ok=True)
    edges_path = os.path.join(args.out, "graph.edges")
    write_edge_list(g, edges_path)
    ids_path = os.path.join(args.out, "ids.tsv")
    with open(ids_path, "w", encoding="utf-8") as fh:
        for dense in range(g.node_count):
            original = dense if g.original_ids is None else int(g.original_ids[dense])
            fh.write(f"{dense}\t{original}\n")
    print(f"ingested {g.node_count} nodes, {g.edge_count} edges -> {edges_path}")
    return 0


def _source_order(g: Graph) -> np.ndarray:
    """Map loaded-dense node positions back to the ids the file used.

    Loading an edge list renumbers nodes in first-appearance order, which
    rarely matches the order the file's own ids imply (a single out-of-order
    edge shifts every later node). Truth and tally files are keyed by the
    file's ids, so commands that join them against a loaded graph translate
    through this permutation: position i of the loaded graph is source node
    _source_order(g)[i]. Requires the file's ids to be exactly 0..N-1, which
    holds for anything the ingest and splice commands wrote.
    """
    if g.original_ids is None:
        return np.arange(g.node_count, dtype=np.int64)
    src = np.asarray(g.original_ids, dtype=np.int64)
    if len(src) and (src.min() < 0 or src.max() >= g.node_count
                     or len(np.unique(src)) != g.node_count):
        raise ValueError(
            "network node ids must be exactly 0..N-1 to line up with truth "
            "and tally files; run the ingest subcommand to normalize them")
    return src


def _family_host(cfg: RunConfig, name: str, node_budget: int, seed: int) -> "Graph":
    """One large connected single-family network of at least node_budget nodes.

    Family generators emit fixed instances, so the host is assembled the way
    the testbed is: instances with sizes cycling through the lens sizes,
    joined into one connected graph by the splice step. Every region of the
    host then shows the family's local structure, including walks that hop
    between neighboring instances, which is exactly what the lens stage
    produces on a spliced network.
    """
    cycles = -(-node_budget // sum(cfg.sizes))
    parts = []
    for i in range(cycles * len(cfg.sizes)):
        n = cfg.sizes[i % len(cfg.sizes)]
        parts.append(LabeledSubgraph(graph=generate_family(name, n),
                                     class_index=0, subgraph_id=i,
                                     size_class=n))
    return splice(parts, cfg.splice_extra, seed).graph


def _build_corpus(cfg: RunConfig) -> dict[str, dict[int, list]]:
    """Walk-extracted canonical images per class and size.

    Training images are cut from large single-family hosts, so each one is
    the kind of walk fragment the lens stage will later produce rather than
    a pristine complete instance. Each (class, size) pair extracts from its
    own fresh host: blocked walks strand nodes as a shared host fills up (a
    used star hub isolates its still-free leaves), and per-size hosts keep
    that starvation from cascading. Hosts carry 4x the nodes the walks will
    consume.
    """
    corpus: dict[str, dict[int, list]] = {}
    for ci, name in enumerate(cfg.classes):
        by_size: dict[int, list] = {}
        for si, size in enumerate(cfg.sizes):
            host = _family_host(
                cfg, name, 4 * cfg.corpus_count * size,
                mix64(cfg.seed, _STREAM_CORPUS_CLASS, ci, si, 1))
            found = extract_corpus(
                host, cfg.corpus_count, [size],
                seed=mix64(cfg.seed, _STREAM_CORPUS_CLASS, ci, si, 2),
                class_index=ci)
            by_size[size] = [embed_image(part.graph) for part in found]
        corpus[name] = by_size
    return corpus


def cmd_corpus(args) -> int:
    cfg = _config_from(args)
    corpus = _build_corpus(cfg)
    written = save_corpus(args.out, corpus)
    print(f"corpus: wrote {written} PBM images under {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _config_from(args)
    corpus = load_corpus(args.corpus)
    catalog = ClassCatalog(cfg.classes)
    models = train_models_from_corpus(corpus, catalog, cfg.sizes)
    paths = save_models(models, args.out)
    print(f"trained {len(paths)} models -> {args.out}")
    return 0


def _build_parts(cfg: RunConfig,
                 classes: list[tuple[str, int]] | None = None
                 ) -> list[LabeledSubgraph]:
    """parts_per_class family instances per (family, class index), sizes cycling.

    classes defaults to cfg.classes with their natural indices; homogeneity
    passes a single family while keeping its index in the full catalog.
    """
    if classes is None:
        classes = [(name, ci) for ci, name in enumerate(cfg.classes)]
    parts: list[LabeledSubgraph] = []
    next_id = 0
    for name, ci in classes:
        for i in range(cfg.parts_per_class):
            n = cfg.sizes[i % len(cfg.sizes)]
            parts.append(LabeledSubgraph(graph=generate_family(name, n),
                                         class_index=ci, subgraph_id=next_id,
                                         size_class=n))
            next_id += 1
    return parts


def cmd_splice(args) -> int:
    cfg = _config_from(args)
    parts = _build_parts(cfg)
    network = splice(parts, cfg.splice_extra, cfg.seed)
    os.makedirs(args.out, exist_ok=True)
    catalog = ClassCatalog(cfg.classes)
    edges_path = os.path.join(args.out, "network.edges")
    truth_path = os.path.join(args.out, "truth.tsv")
    write_edge_list(network.graph, edges_path)
    save_truth(network, catalog, truth_path)
    with open(os.path.join(args.out, "splice_edges.tsv"), "w",
              encoding="utf-8") as fh:
        for u, v in network.splice_edges:
            fh.write(f"{u}\t{v}\trandom\n")
        for u, v in network.repair_edges:
            fh.write(f"{u}\t{v}\trepair\n")
    print(f"spliced {len(parts)} parts: {network.graph.node_count} nodes, "
          f"{network.graph.edge_count} edges "
          f"({len(network.splice_edges)} splice, "
          f"{len(network.repair_edges)} repair) -> {args.out}")
    return 0


def cmd_lens(args) -> int:
    cfg = _config_from(args)
    g = load_edge_list(args.network)
    models = load_models(args.models)
    missing = [s for s in cfg.sizes if s not in models]
    if missing:
        raise ValueError(f"no models for sizes {missing} in {args.models}")
    catalog = next(iter(models.values())).catalog
    truth, _ = load_truth(args.truth, catalog)
    if g.node_count != len(truth):
        raise ValueError("network and truth disagree on the node count")
    src = _source_order(g)
    run = run_lenses(g, {s: models[s] for s in cfg.sizes}, cfg.sizes, cfg.seed,
                     workers=cfg.workers, walks_per_node=cfg.walks_per_node)
    os.makedirs(args.out, exist_ok=True)
    tally_path = os.path.join(args.out, "tally.csv")
    write_tally_csv(run, catalog, tally_path, node_ids=src)
    write_failures_csv(run, os.path.join(args.out, "failures.csv"),
                       node_ids=src)
    for mode in ("pooled", "start"):
        acc = per_lens_accuracy(run.tallies, truth[src], cfg.sizes, mode)
        rendered = ", ".join(
            f"{s}: " + (f"{a:.2f}%" if a is not None else "absent")
            for s, a in acc.items())
        print(f"per-lens accuracy ({mode}): {rendered}")
    print(f"lens run: {len(run.failures)} failed walks -> {tally_path}")
    return 0


def _train_test_split(node_count: int, train_fraction: float,
                      seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = child_rng(seed, _STREAM_SPLIT)
    perm = rng.sample(range(node_count), node_count)
    n_train = round(train_fraction * node_count)
    train = np.asarray(sorted(perm[:n_train]), dtype=np.int64)
    test = np.asarray(sorted(perm[n_train:]), dtype=np.int64)
    return train, test


def cmd_weights(args) -> int:
    cfg = _config_from(args)
    catalog = ClassCatalog(cfg.classes)
    truth, _ = load_truth(args.truth, catalog)
    tallies = read_tally_csv(args.tally, catalog, cfg.sizes, len(truth))
    train, _ = _train_test_split(len(truth), cfg.train_fraction, cfg.seed)
    if args.method == "lp":
        solution = solve_weights_lp(tallies[train], truth[train],
                                    node_cap=cfg.lp_node_cap, seed=cfg.seed,
                                    row_normalize=cfg.row_normalize)
        p = solution.p
        print(f"lp: objective {solution.objective:.6g} over "
              f"{len(solution.used_nodes)} nodes "
              f"({solution.iterations} simplex iterations)")
    else:
        accs = []
        for i in range(2 * len(cfg.sizes)):
            block = tallies[train, i, :]
            total = int(block.sum())
            correct = int(block[np.arange(len(train)), truth[train]].sum())
            accs.append(correct / total if total else 0.0)
        p = naive_weights(accs)
    save_weights(p, cfg.sizes, args.out)
    print(f"weights ({args.method}) -> {args.out}")
    return 0


def _distributions(tallies: np.ndarray, nodes: np.ndarray, p: np.ndarray,
                   row_normalize: bool) -> list[np.ndarray | None]:
    return [node_distribution(tallies[v], p, row_normalize) for v in nodes]


def cmd_evaluate(args) -> int:
    cfg = _config_from(args)
    catalog = ClassCatalog(cfg.classes)
    g = load_edge_list(args.network)
    truth, _ = load_truth(args.truth, catalog)
    if g.node_count != len(truth):
        raise ValueError("network and truth disagree on the node count")
    src = _source_order(g)
    tallies = read_tally_csv(args.tally, catalog, cfg.sizes, len(truth))
    p = load_weights(args.weights, cfg.sizes)
    _, test = _train_test_split(len(truth), cfg.train_fraction, cfg.seed)

    dists = _distributions(tallies, test, p, cfg.row_normalize)
    test_truth = truth[test]
    taus = cfg.tau_grid()
    curve = accuracy_curve(dists, test_truth, taus)
    peak_tau, peak_acc = max(curve, key=lambda point: (point[1], -point[0]))
    reward_tau = args.tau if args.tau is not None else peak_tau
    reward = confusion_reward(dists, test_truth, reward_tau, len(catalog))

    # neighborhoods live in loaded-dense ids; translate so the per-node
    # diversity array is keyed like truth and the tally cube
    dense_diversity = diversity_from_truth(g, truth[src])
    diversity = np.empty_like(dense_diversity)
    diversity[src] = dense_diversity
    records = build_diversity_records(dists, test_truth, diversity, test)
    report = diversity_report(records)

    os.makedirs(args.out, exist_ok=True)
    write_curve_csv(curve, os.path.join(args.out, "curve.csv"))
    write_reward_csv(reward, catalog, os.path.join(args.out, "reward.csv"))
    write_diversity_csv(report, os.path.join(args.out, "diversity.csv"))
    write_predictions_csv(dists, test_truth, test, reward_tau, catalog,
                          os.path.join(args.out, "predictions.csv"))

    from . import plots
    plots.plot_curve(curve, os.path.join(args.out, "curve.png"),
                     random_level=1.0 / len(catalog))
    plots.plot_reward(reward, catalog, os.path.join(args.out, "reward.png"))
    plots.plot_diversity(report, os.path.join(args.out, "diversity.png"))

    unlabeled = sum(1 for w in dists if w is None)
    print(f"evaluate: {len(test)} test nodes ({unlabeled} unlabeled), "
          f"top-1 {curve[0][1]:.4f} at tau {curve[0][0]:g}, "
          f"peak {peak_acc:.4f} at tau {peak_tau:g}")
    print(f"diversity correlations: top weight {report.corr_top_weight:+.4f}, "
          f"entropy {report.corr_entropy:+.4f}")
    print(f"reports -> {args.out}")
    return 0


def cmd_homogeneity(args) -> int:
    cfg = _config_from(args)
    models = load_models(args.models)
    missing = [s for s in cfg.sizes if s not in models]
    if missing:
        raise ValueError(f"no models for sizes {missing} in {args.models}")
    catalog = next(iter(models.values())).catalog
    p = load_weights(args.weights, cfg.sizes)
    taus = cfg.tau_grid()
    rows = []
    os.makedirs(args.out, exist_ok=True)
    for ci, name in enumerate(catalog.names):
        parts = _build_parts(cfg, classes=[(name, ci)])
        network = splice(parts, cfg.splice_extra,
                         mix64(cfg.seed, _STREAM_HOMOGENEITY, ci))
        run = run_lenses(network.graph, {s: models[s] for s in cfg.sizes},
                         cfg.sizes, mix64(cfg.seed, _STREAM_HOMOGENEITY, ci, 1),
                         workers=cfg.workers, walks_per_node=cfg.walks_per_node)
        nodes = np.arange(network.graph.node_count)
        dists = _distributions(run.tallies, nodes, p, cfg.row_normalize)
        truth = np.full(len(nodes), ci, dtype=np.int64)
        curve = accuracy_curve(dists, truth, taus)
        reward_low = confusion_reward(dists, truth, taus[0], len(catalog))
        rows.append(homogeneity_entry(name, curve, reward_low, ci, catalog))
    write_homogeneity_csv(rows, os.path.join(args.out, "homogeneity.csv"))
    from . import plots
    plots.plot_homogeneity(rows, os.path.join(args.out, "homogeneity.png"))
    for row in rows:
        mode = row.incorrect_mode if row.incorrect_mode else "none"
        print(f"homogeneity {row.name}: peak {row.peak_accuracy:.4f} at "
              f"tau {row.peak_tau:g}, incorrect mode {mode}")
    print(f"homogeneity report -> {args.out}")
    return 0


def cmd_demo(args) -> int:
    import dataclasses

    cfg = _config_from(args)
    if args.lp_node_cap is None and cfg.lp_node_cap == 5000:
        # full default cap makes the demo LP needlessly slow; a handful of
        # weights does not need thousands of training nodes
        cfg = dataclasses.replace(cfg, lp_node_cap=_DEMO_LP_CAP)
    out = args.out
    corpus_dir = os.path.join(out, "corpus")
    model_dir = os.path.join(out, "models")
    testbed_dir = os.path.join(out, "testbed")
    run_dir = os.path.join(out, "run")
    os.makedirs(out, exist_ok=True)

    ns = argparse.Namespace(**vars(args))
    ns.out = corpus_dir
    _with_cfg(ns, cfg)
    cmd_corpus(ns)

    ns = argparse.Namespace(**vars(args))
    ns.corpus, ns.out = corpus_dir, model_dir
    _with_cfg(ns, cfg)
    cmd_train(ns)

    ns = argparse.Namespace(**vars(args))
    ns.out = testbed_dir
    _with_cfg(ns, cfg)
    cmd_splice(ns)

    network = os.path.join(testbed_dir, "network.edges")
    truth = os.path.join(testbed_dir, "truth.tsv")

    ns = argparse.Namespace(**vars(args))
    ns.network, ns.truth, ns.models, ns.out = network, truth, model_dir, run_dir
    _with_cfg(ns, cfg)
    cmd_lens(ns)

    tally = os.path.join(run_dir, "tally.csv")
    weights = os.path.join(run_dir, "weights.txt")

    ns = argparse.Namespace(**vars(args))
    ns.tally, ns.truth, ns.method, ns.out = tally, truth, "lp", weights
    _with_cfg(ns, cfg)
    cmd_weights(ns)

    ns = argparse.Namespace(**vars(args))
    ns.network, ns.truth, ns.tally, ns.weights = network, truth, tally, weights
    ns.tau, ns.out = None, run_dir
    _with_cfg(ns, cfg)
    cmd_evaluate(ns)

    ns = argparse.Namespace(**vars(args))
    ns.models, ns.weights, ns.out = model_dir, weights, run_dir
    _with_cfg(ns, cfg)
    cmd_homogeneity(ns)

    print(f"demo complete -> {out}")
    return 0


def _with_cfg(ns: argparse.Namespace, cfg: RunConfig) -> None:
    """Pin an already-resolved config onto a namespace for nested commands."""
    ns.config = None
    ns.seed = cfg.seed
    ns.sizes = ",".join(str(s) for s in cfg.sizes)
    ns.classes = ",".join(cfg.classes)
    ns.corpus_count = cfg.corpus_count
    ns.parts_per_class = cfg.parts_per_class
    ns.splice_extra = cfg.splice_extra
    ns.tau_step = cfg.tau_step
    ns.train_fraction = cfg.train_fraction
    ns.lp_node_cap = cfg.lp_node_cap
    ns.walks_per_node = cfg.walks_per_node
    ns.workers = cfg.workers


if __name__ == "__main__":
    sys.exit(main())
