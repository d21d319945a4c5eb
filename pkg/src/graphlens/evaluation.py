"""Evaluation analytics over per-node label distributions.

Everything here consumes the outputs of aggregation: a label distribution
per node (or None for unlabeled nodes), ground truth, and optionally the
per-node diversity computed from the testbed. Reports are plain CSV; figure
rendering lives in the plots module so this one stays dependency-light.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aggregation import node_accuracy, top_k_prediction
from .classifier import ClassCatalog


@dataclass(frozen=True)
class DiversityRecord:
    """One scored node: ground-truth diversity vs how confident/right it was."""

    diversity: int
    top_weight: float
    entropy: float
    top_correct: bool


@dataclass(frozen=True)
class DiversityBucket:
    diversity: int
    count: int
    top_correct_pct: float
    mean_top_weight: float
    mean_entropy: float


@dataclass(frozen=True)
class DiversityReport:
    """Per-diversity buckets plus node-wise (and bucket-wise) correlations.

    Bucket-wise correlations are None when fewer than two buckets exist or a
    series is constant.
    """

    buckets: tuple[DiversityBucket, ...]
    corr_top_weight: float
    corr_entropy: float
    bucket_corr_top_weight: float | None
    bucket_corr_entropy: float | None


@dataclass(frozen=True)
class HomogeneityRow:
    """One single-class network's outcome under the multi-class pipeline."""

    name: str
    peak_accuracy: float
    peak_tau: float
    incorrect_mode: str | None


def accuracy_curve(dists: list[np.ndarray | None], truth: np.ndarray,
                   taus: list[float]) -> list[tuple[float, float]]:
    """Mean node accuracy at each tau; unlabeled nodes score 0 and count."""
    if len(dists) == 0:
        raise ValueError("empty test set")
    if len(taus) == 0:
        raise ValueError("empty tau grid")
    if any(t2 <= t1 for t1, t2 in zip(taus, taus[1:])):
        raise ValueError("tau grid must be strictly increasing")
    curve = []
    for tau in taus:
        total = 0.0
        for w, y in zip(dists, truth):
            if w is not None:
                total += node_accuracy(top_k_prediction(w, tau), int(y))
        curve.append((tau, total / len(dists)))
    return curve


def confusion_reward(dists: list[np.ndarray | None], truth: np.ndarray,
                     tau: float, class_count: int) -> np.ndarray:
    """Reward matrix at one tau: true class row gets 1/k per retained label.

    Unlabeled nodes contribute nothing; each scored node's row mass is
    exactly 1 (k labels at 1/k each), so row i sums to the number of scored
    nodes of class i.
    """
    matrix = np.zeros((class_count, class_count), dtype=np.float64)
    for w, y in zip(dists, truth):
        if w is None:
            continue
        pred = top_k_prediction(w, tau)
        for j in pred.labels:
            matrix[int(y), j] += 1.0 / pred.k
    return matrix


def scored_counts(dists: list[np.ndarray | None], truth: np.ndarray,
                  class_count: int) -> np.ndarray:
    """Number of labeled (non-None) test nodes per true class."""
    counts = np.zeros(class_count, dtype=np.int64)
    for w, y in zip(dists, truth):
        if w is not None:
            counts[int(y)] += 1
    return counts


def normalized_entropy(w: np.ndarray) -> float:
    """-sum w_i ln w_i / ln C, with 0 ln 0 = 0; in [0, 1]."""
    w = np.asarray(w, dtype=np.float64)
    if len(w) < 2:
        raise ValueError("entropy needs at least 2 classes")
    positive = w[w > 0]
    h = float(-(positive * np.log(positive)).sum())
    return h / math.log(len(w))


def pearson(x: np.ndarray | list[float], y: np.ndarray | list[float]) -> float:
    """Standard Pearson correlation; constant input is an error."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two equal-length vectors of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("pearson is undefined for a constant input")
    return float(dx @ dy) / (sx * sy)


def build_diversity_records(dists: list[np.ndarray | None], truth: np.ndarray,
                            diversity: np.ndarray,
                            node_ids: list[int] | np.ndarray | None = None
                            ) -> list[DiversityRecord]:
    """Per-node diversity records for the labeled nodes.

    node_ids maps positions in dists/truth to graph node indices (identity
    when omitted); diversity is indexed by graph node.
    """
    if node_ids is None:
        node_ids = np.arange(len(dists))
    records = []
    for w, y, v in zip(dists, truth, node_ids):
        if w is None:
            continue
        top = int(np.argmax(w))
        records.append(DiversityRecord(diversity=int(diversity[int(v)]),
                                       top_weight=float(w[top]),
                                       entropy=normalized_entropy(w),
                                       top_correct=top == int(y)))
    return records


def diversity_report(records: list[DiversityRecord]) -> DiversityReport:
    """Bucket the records by diversity and correlate confidence with it."""
    if len(records) < 2:
        raise ValueError("diversity report needs at least 2 records")
    buckets = []
    for d in sorted({r.diversity for r in records}):
        group = [r for r in records if r.diversity == d]
        buckets.append(DiversityBucket(
            diversity=d,
            count=len(group),
            top_correct_pct=100.0 * sum(r.top_correct for r in group) / len(group),
            mean_top_weight=float(np.mean([r.top_weight for r in group])),
            mean_entropy=float(np.mean([r.entropy for r in group]))))
    div = [r.diversity for r in records]
    corr_tw = pearson(div, [r.top_weight for r in records])
    corr_en = pearson(div, [r.entropy for r in records])
    bucket_tw: float | None = None
    bucket_en: float | None = None
    if len(buckets) >= 2:
        bd = [b.diversity for b in buckets]
        try:
            bucket_tw = pearson(bd, [b.mean_top_weight for b in buckets])
            bucket_en = pearson(bd, [b.mean_entropy for b in buckets])
        except ValueError:
            pass
    return DiversityReport(buckets=tuple(buckets), corr_top_weight=corr_tw,
                           corr_entropy=corr_en, bucket_corr_top_weight=bucket_tw,
                           bucket_corr_entropy=bucket_en)


def homogeneity_entry(name: str, curve: list[tuple[float, float]],
                      reward_low_tau: np.ndarray, true_class: int,
                      catalog: ClassCatalog) -> HomogeneityRow:
    """Summarize one single-class run: peak accuracy plus the most common
    wrong label.

    The incorrect mode is read from the true class's reward row at the
    lowest tau on the grid, where retained sets are near singletons and the
    reward approximates a hard-label count. None when nothing off-diagonal
    was ever assigned.
    """
    peak_tau, peak_acc = max(curve, key=lambda point: (point[1], -point[0]))
    row = reward_low_tau[true_class].copy()
    row[true_class] = -1.0
    mode_idx = int(np.argmax(row))
    mode = catalog[mode_idx] if row[mode_idx] > 0 else None
    return HomogeneityRow(name=name, peak_accuracy=peak_acc, peak_tau=peak_tau,
                          incorrect_mode=mode)


def write_curve_csv(curve: list[tuple[float, float]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("tau,accuracy\n")
        for tau, acc in curve:
            fh.write(f"{tau!r},{acc!r}\n")


def write_reward_csv(matrix: np.ndarray, catalog: ClassCatalog, path: str) -> None:
    names = catalog.names
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("true\\predicted," + ",".join(names) + "\n")
        for i, name in enumerate(names):
            fh.write(name + "," + ",".join(repr(float(v)) for v in matrix[i]) + "\n")


def write_diversity_csv(report: DiversityReport, path: str) -> None:
    """Bucket rows followed by correlation footer rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("diversity,count,top_correct_pct,mean_top_weight,mean_entropy\n")
        for b in report.buckets:
            fh.write(f"{b.diversity},{b.count},{b.top_correct_pct!r},"
                     f"{b.mean_top_weight!r},{b.mean_entropy!r}\n")
        fh.write(f"corr_node,top_weight,{report.corr_top_weight!r}\n")
        fh.write(f"corr_node,entropy,{report.corr_entropy!r}\n")
        if report.bucket_corr_top_weight is not None:
            fh.write(f"corr_bucket,top_weight,{report.bucket_corr_top_weight!r}\n")
        if report.bucket_corr_entropy is not None:
            fh.write(f"corr_bucket,entropy,{report.bucket_corr_entropy!r}\n")


def write_homogeneity_csv(rows: list[HomogeneityRow], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("network,peak_accuracy,peak_tau,incorrect_mode\n")
        for row in rows:
            mode = row.incorrect_mode if row.incorrect_mode is not None else ""
            fh.write(f"{row.name},{row.peak_accuracy!r},{row.peak_tau!r},{mode}\n")


def write_predictions_csv(dists: list[np.ndarray | None], truth: np.ndarray,
                          node_ids: list[int] | np.ndarray, tau: float,
                          catalog: ClassCatalog, path: str) -> None:
    """Per-node predictions at one tau: node,true,k,labels,score.

    Retained labels are joined with '|' in rank order; unlabeled nodes get
    k=0, an empty label list, and score 0.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node,true,k,labels,score\n")
        for w, y, v in zip(dists, truth, node_ids):
            true_name = catalog[int(y)]
            if w is None:
                fh.write(f"{int(v)},{true_name},0,,0.0\n")
                continue
            pred = top_k_prediction(w, tau)
            labels = "|".join(catalog[j] for j in pred.labels)
            score = node_accuracy(pred, int(y))
            fh.write(f"{int(v)},{true_name},{pred.k},{labels},{score!r}\n")
