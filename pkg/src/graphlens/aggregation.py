"""Lens weighting and per-node label aggregation.

Each node carries a tally matrix X of shape (2*|sizes|, C): how often each
lens row (size x start/member mode) assigned each class. A weight vector p on
the simplex turns X into a label distribution w = normalize(p @ X). Weights
come either from per-row accuracies (naive) or from a linear program that
asks, for every training node, that the true class column win under p, with
slack xi for nodes where it cannot:

    minimize   sum_m xi_m
    subject to (X_m p)[y_m] >= (X_m p)[j] - xi_m   for all classes j
               sum_i p_i = 1,  p >= 0,  xi >= 0

Predictions keep the smallest descending-weight prefix whose cumulative
weight reaches tau; a node scores 1/k when its true class is retained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeds import child_rng
from .simplex import solve_standard_form

_STREAM_LP_CAP = 21
_STREAM_LP_JIGGLE = 22

# Cumulative-weight comparisons forgive float dust so that e.g. binary
# 0.5 + 0.3 = 0.7999... still reaches tau = 0.8.
_TAU_GUARD = 1e-9

# Refuse to build simplex tableaus past this many float64 cells.
_MAX_TABLEAU_CELLS = 800_000_000


@dataclass(frozen=True)
class SlackSolution:
    """LP outcome: weights on the simplex plus per-training-node slacks.

    used_nodes indexes the (possibly capped) training nodes the LP actually
    saw; xi aligns with it. objective = xi.sum().
    """

    p: np.ndarray
    xi: np.ndarray
    objective: float
    used_nodes: np.ndarray
    iterations: int


@dataclass(frozen=True)
class Prediction:
    """Ordered retained labels for one node at threshold tau; k = len(labels)."""

    labels: tuple[int, ...]
    k: int
    tau: float


def row_labels(sizes: tuple[int, ...] | list[int]) -> list[str]:
    """Names of the 2*|sizes| tally rows, size ascending, start before member."""
    out = []
    for s in sizes:
        out.append(f"{s}.start")
        out.append(f"{s}.member")
    return out


def solve_weights_lp(tallies: np.ndarray, truth: np.ndarray, *,
                     node_cap: int = 5000, seed: int = 0,
                     row_normalize: bool = False) -> SlackSolution:
    """Learn simplex weights by LP over the given training tallies.

    tallies has shape (M, rows, C) and truth (M,). Training nodes beyond
    node_cap are uniformly subsampled (seeded). Nodes with identical (tally,
    truth) are solved once with a multiplicity weight, which leaves the LP
    unchanged. Returned slacks are the minimal feasible slacks at the solved
    p, so every constraint holds by construction.
    """
    tallies = np.asarray(tallies)
    if tallies.ndim != 3 or len(truth) != tallies.shape[0]:
        raise ValueError("tallies must be (nodes, rows, classes) matching truth")
    m_all, n_rows, n_classes = tallies.shape
    if m_all < 1:
        raise ValueError("at least one training node required")
    if n_classes < 2:
        raise ValueError("at least two classes required")

    used = np.arange(m_all)
    if m_all > node_cap:
        rng = child_rng(seed, _STREAM_LP_CAP)
        used = np.asarray(sorted(rng.sample(range(m_all), node_cap)))
    x_used = tallies[used].astype(np.float64)
    if row_normalize:
        x_used = _normalized_rows(x_used)
    y_used = truth[used]

    groups: dict[bytes, int] = {}
    reps: list[int] = []
    mult: list[int] = []
    group_of = np.empty(len(used), dtype=np.int64)
    for i in range(len(used)):
        key = x_used[i].tobytes() + bytes([int(y_used[i]) & 0xFF])
        gi = groups.get(key)
        if gi is None:
            gi = len(reps)
            groups[key] = gi
            reps.append(i)
            mult.append(0)
        group_of[i] = gi
        mult[gi] += 1
    g = len(reps)
    x_g = x_used[reps]
    y_g = y_used[reps]

    n_ineq = g * (n_classes - 1)
    n_vars = n_rows + g + n_ineq
    if (n_ineq + 1) * (n_vars + 2) > _MAX_TABLEAU_CELLS:
        raise RuntimeError(
            f"LP tableau would need {n_ineq + 1}x{n_vars + 2} cells; "
            f"lower node_cap (currently seeing {g} distinct training nodes)")

    a = np.zeros((n_ineq + 1, n_vars), dtype=np.float64)
    b = np.zeros(n_ineq + 1, dtype=np.float64)
    c = np.zeros(n_vars, dtype=np.float64)
    c[n_rows:n_rows + g] = np.asarray(mult, dtype=np.float64)
    r = 0
    for gi in range(g):
        y_col = x_g[gi, :, int(y_g[gi])]
        for j in range(n_classes):
            if j == int(y_g[gi]):
                continue
            # true column must win: d.p + xi >= 0 becomes -d.p - xi + s = 0
            a[r, :n_rows] = x_g[gi, :, j] - y_col
            a[r, n_rows + gi] = -1.0
            a[r, n_rows + g + r] = 1.0
            r += 1
    a[r, :n_rows] = 1.0
    b[r] = 1.0

    # Every inequality row has a zero right-hand side, so the feasible region
    # is riddled with degenerate vertices and the simplex can stall for ages.
    # A tiny seeded jiggle on those right-hand sides breaks the ties; by LP
    # duality it moves the optimum by at most sum(mult) * 6e-8, and the
    # returned slacks are recomputed exactly at the solved p regardless.
    jiggle = child_rng(seed, _STREAM_LP_JIGGLE)
    b[:n_ineq] = [3e-8 * (1.0 + jiggle.random()) for _ in range(n_ineq)]

    solution = solve_standard_form(c, a, b)
    p = solution.x[:n_rows]
    if abs(p.sum() - 1.0) > 1e-9 or (p < -1e-12).any():
        raise RuntimeError("simplex returned weights off the simplex")
    p = np.maximum(p, 0.0)

    # The jiggle can leave the solved vertex a hair above the true optimum,
    # so compare its exact objective against every one-hot corner and keep
    # the better point. Bounds the jiggle regression and guarantees the
    # solution never loses to a single-row weighting.
    mult_arr = np.asarray(mult, dtype=np.float64)
    best_obj = float(minimal_slacks(x_g, y_g, p) @ mult_arr)
    for r_i in range(n_rows):
        corner = np.zeros(n_rows)
        corner[r_i] = 1.0
        corner_obj = float(minimal_slacks(x_g, y_g, corner) @ mult_arr)
        if corner_obj < best_obj:
            best_obj = corner_obj
            p = corner

    xi_g = minimal_slacks(x_g, y_g, p)
    xi = xi_g[group_of]
    return SlackSolution(p=p, xi=xi, objective=float(xi.sum()),
                         used_nodes=used, iterations=solution.iterations)


def minimal_slacks(tallies: np.ndarray, truth: np.ndarray,
                   p: np.ndarray) -> np.ndarray:
    """Smallest feasible slack per node at fixed weights p.

    xi_m = max(0, max_j (X_m p)[j] - (X_m p)[y_m]); the LP objective at p is
    the sum of these.
    """
    scores = np.einsum("i,mij->mj", p, np.asarray(tallies, dtype=np.float64))
    true_scores = scores[np.arange(len(truth)), truth.astype(np.int64)]
    return np.maximum(0.0, scores.max(axis=1) - true_scores)


def naive_weights(accuracies: np.ndarray | list[float]) -> np.ndarray:
    """Per-row accuracies normalized to the simplex."""
    acc = np.asarray(accuracies, dtype=np.float64)
    if (acc < 0).any():
        raise ValueError("accuracies must be nonnegative")
    total = acc.sum()
    if total <= 0:
        raise ValueError("cannot normalize all-zero accuracies")
    return acc / total


def node_distribution(counts: np.ndarray, p: np.ndarray,
                      row_normalize: bool = False) -> np.ndarray | None:
    """Label distribution w for one node, or None when the node is unlabeled.

    scores_j = sum_i p_i * counts[i, j]; w = scores / scores.sum(). A node is
    unlabeled when the weighted scores sum to zero (no walk reached it on any
    row p cares about).
    """
    x = np.asarray(counts, dtype=np.float64)
    if x.shape[0] != len(p):
        raise ValueError(f"tally has {x.shape[0]} rows but p has {len(p)}")
    if row_normalize:
        x = _normalized_rows(x)
    scores = p @ x
    total = scores.sum()
    if total <= 0.0:
        return None
    return scores / total


def _normalized_rows(x: np.ndarray) -> np.ndarray:
    sums = x.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(sums > 0, x / np.where(sums > 0, sums, 1.0), 0.0)
    return out


def top_k_prediction(w: np.ndarray, tau: float) -> Prediction:
    """Smallest descending-weight label prefix with cumulative weight >= tau.

    Ties in weight break toward the lower class index; zero-weight labels are
    never retained.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    order = sorted(range(len(w)), key=lambda j: (-w[j], j))
    labels: list[int] = []
    cum = 0.0
    for j in order:
        if w[j] <= 0.0:
            break
        labels.append(j)
        cum += w[j]
        if cum >= tau - _TAU_GUARD:
            break
    return Prediction(labels=tuple(labels), k=len(labels), tau=tau)


def node_accuracy(pred: Prediction, true_class: int) -> float:
    """1/k when the true class is among the retained labels, else 0."""
    if pred.k and true_class in pred.labels:
        return 1.0 / pred.k
    return 0.0


def save_weights(p: np.ndarray, sizes: tuple[int, ...] | list[int],
                 path: str) -> None:
    """Text weights file: one `<row-label> <value>` line per lens row."""
    names = row_labels(sizes)
    if len(names) != len(p):
        raise ValueError(f"{len(p)} weights for {len(names)} rows")
    with open(path, "w", encoding="utf-8") as fh:
        for name, value in zip(names, p):
            fh.write(f"{name} {float(value)!r}\n")


def load_weights(path: str, sizes: tuple[int, ...] | list[int]) -> np.ndarray:
    """Read a weights file written by save_weights, validating row labels."""
    names = row_labels(sizes)
    values: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            name, value = line.split()
            values[name] = float(value)
    if sorted(values) != sorted(names):
        raise ValueError(f"{path}: weight rows do not match sizes {tuple(sizes)}")
    return np.asarray([values[name] for name in names], dtype=np.float64)
