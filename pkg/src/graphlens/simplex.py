"""Dense two-phase simplex for small linear programs.

Solves  min c.x  subject to  A x = b, x >= 0  with b >= 0. Phase 1 drives
artificial variables (added only for rows without a ready unit column) to
zero; phase 2 optimizes the real objective from the feasible basis found.
Entering columns follow Dantzig's rule until the objective stalls on a
degenerate vertex, after which Bland's rule takes over so the method cannot
cycle. The tableau is kept dense in one numpy array, so memory grows as
rows x columns; callers are expected to keep instances modest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-9
_PIVOT_TOL = 1e-10
_RATIO_TIE = 1e-13
_STALL_LIMIT = 64


class InfeasibleProgram(RuntimeError):
    """Phase 1 could not reach a feasible basis."""


class UnboundedProgram(RuntimeError):
    """The objective decreases without bound over the feasible region."""


@dataclass(frozen=True)
class SimplexSolution:
    x: np.ndarray
    objective: float
    iterations: int


def solve_standard_form(c: np.ndarray, a: np.ndarray, b: np.ndarray,
                        max_iter: int | None = None) -> SimplexSolution:
    """Optimal basic solution of min c.x, A x = b, x >= 0 (b must be >= 0)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    m, n = a.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if (b < 0).any():
        raise ValueError("standard form requires b >= 0")

    basis = np.full(m, -1, dtype=np.int64)
    taken_rows: set[int] = set()
    nnz_per_col = (a != 0).sum(axis=0)
    for j in np.flatnonzero(nnz_per_col == 1):
        r = int(np.argmax(a[:, j] != 0))
        if a[r, j] == 1.0 and r not in taken_rows:
            basis[r] = j
            taken_rows.add(r)
    art_rows = np.flatnonzero(basis < 0)
    n_art = len(art_rows)

    # Tableau columns: n structural, n_art artificial, then b.
    t = np.zeros((m, n + n_art + 1), dtype=np.float64)
    t[:, :n] = a
    for k, r in enumerate(art_rows):
        t[r, n + k] = 1.0
        basis[r] = n + k
    t[:, -1] = b

    # Cost rows (last entry = -objective), reduced against the initial basis.
    z2 = np.concatenate([c, np.zeros(n_art + 1)])
    z1 = np.zeros(n + n_art + 1)
    z1[n:n + n_art] = 1.0
    for r in range(m):
        if z1[basis[r]] != 0.0:
            z1 = z1 - z1[basis[r]] * t[r]
        if z2[basis[r]] != 0.0:
            z2 = z2 - z2[basis[r]] * t[r]

    if max_iter is None:
        max_iter = 10 * (m + n + n_art) + 2000
    iterations = 0

    if n_art:
        # entering restricted to structural columns: artificials only leave
        iterations = _optimize(t, basis, z1, n, [z2], iterations, max_iter)
        if -z1[-1] > 1e-7:
            raise InfeasibleProgram(f"phase 1 residual {-z1[-1]:.3g}")
        t, basis, z2 = _expel_artificials(t, basis, z2, n)

    iterations = _optimize(t, basis, z2, n, [], iterations, max_iter)

    x = np.zeros(n, dtype=np.float64)
    for r in range(t.shape[0]):
        if basis[r] < n:
            x[basis[r]] = t[r, -1]
    return SimplexSolution(x=x, objective=float(c @ x), iterations=iterations)


def _optimize(t: np.ndarray, basis: np.ndarray, z: np.ndarray, width: int,
              riders: list[np.ndarray], iterations: int, max_iter: int) -> int:
    """Pivot until no reduced cost among the first `width` columns is negative.

    `riders` are extra cost rows kept consistent through the same pivots
    (phase 2's row while phase 1 runs).
    """
    bland = False
    stall = 0
    last_obj = -z[-1]
    while True:
        cols = z[:width]
        if bland:
            negatives = np.flatnonzero(cols < -_TOL)
            if len(negatives) == 0:
                return iterations
            j = int(negatives[0])
        else:
            j = int(np.argmin(cols))
            if cols[j] >= -_TOL:
                return iterations
        col = t[:, j]
        rows = np.flatnonzero(col > _PIVOT_TOL)
        if len(rows) == 0:
            raise UnboundedProgram(f"column {j} has no blocking row")
        ratios = t[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + _RATIO_TIE]
        r = int(tied[np.argmin(basis[tied])])

        if iterations >= max_iter:
            raise RuntimeError(f"simplex exceeded {max_iter} iterations")
        iterations += 1
        _pivot(t, basis, r, j, [z, *riders])

        obj = -z[-1]
        if obj < last_obj - 1e-12:
            last_obj = obj
            stall = 0
            bland = False
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True


def _pivot(t: np.ndarray, basis: np.ndarray, r: int, j: int,
           cost_rows: list[np.ndarray]) -> None:
    piv_row = t[r] / t[r, j]
    col = t[:, j].copy()
    t -= np.outer(col, piv_row)
    t[r] = piv_row
    for z in cost_rows:
        if z[j] != 0.0:
            z -= z[j] * piv_row
    basis[r] = j


def _expel_artificials(t: np.ndarray, basis: np.ndarray, z2: np.ndarray,
                       n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pivot zero-level artificials out of the basis, dropping redundant rows."""
    keep = np.ones(t.shape[0], dtype=bool)
    for r in range(t.shape[0]):
        if basis[r] < n:
            continue
        j = int(np.argmax(np.abs(t[r, :n])))
        if abs(t[r, j]) <= _PIVOT_TOL:
            keep[r] = False  # redundant constraint
            continue
        _pivot(t, basis, r, j, [z2])
    t = np.ascontiguousarray(np.delete(t[keep], np.s_[n:-1], axis=1))
    z2 = np.delete(z2, np.s_[n:-1])
    return t, basis[keep], z2
