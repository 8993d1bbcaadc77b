"""Dense simplex for small box-constrained LPs.

Solves ``min c'x  s.t.  A x <= b,  lower <= x <= upper`` with a tableau dual
simplex.  Each variable is measured from the box corner that minimises its
cost term, so the all-slack basis is dual feasible from the start and no
phase one is needed; cutting-plane methods also fit the dual method well
because each new cut only makes the current basis primal infeasible.
Bland's rule picks both the leaving row and the entering column, which
rules out cycling and makes the returned vertex deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "solve_box_lp"]


@dataclass(frozen=True, eq=False)
class LPResult:
    status: str  # "optimal", "infeasible" or "iteration_limit"
    x: np.ndarray
    objective: float
    pivots: int


def solve_box_lp(c, A, b, lower, upper, *, tol: float = 1e-10, max_pivots: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float).ravel()
    lower = np.asarray(lower, dtype=float).ravel()
    upper = np.asarray(upper, dtype=float).ravel()
    d = c.size
    A = np.asarray(A, dtype=float).reshape(-1, d)
    b = np.asarray(b, dtype=float).ravel()
    m = A.shape[0]
    if b.size != m:
        raise ValueError(f"A has {m} rows but b has {b.size} entries")

    # x = anchor + sign * z with z in [0, upper - lower] and nonnegative costs
    flip = c < 0
    anchor = np.where(flip, upper, lower)
    sign = np.where(flip, -1.0, 1.0)

    rows = m + d
    T = np.zeros((rows + 1, d + rows + 1))
    T[:m, :d] = A * sign
    T[m:rows, :d] = np.eye(d)
    T[:rows, d : d + rows] = np.eye(rows)
    T[:m, -1] = b - A @ anchor
    T[m:rows, -1] = upper - lower
    T[-1, :d] = np.abs(c)
    basis = np.arange(d, d + rows)

    pivots = 0
    status = "optimal"
    while True:
        infeasible_rows = np.flatnonzero(T[:rows, -1] < -tol)
        if infeasible_rows.size == 0:
            break
        if pivots >= max_pivots:
            status = "iteration_limit"
            break
        r = infeasible_rows[np.argmin(basis[infeasible_rows])]
        row = T[r, :-1]
        cols = np.flatnonzero(row < -tol)
        if cols.size == 0:
            status = "infeasible"
            break
        ratios = T[-1, cols] / -row[cols]
        best = ratios.min()
        j = cols[ratios <= best + 1e-12 * max(1.0, abs(best))].min()

        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        basis[r] = j
        pivots += 1

    z = np.zeros(d)
    structural = basis < d
    z[basis[structural]] = T[:rows, -1][structural]
    z = np.clip(z, 0.0, upper - lower)
    x = anchor + sign * z
    if status == "infeasible":
        return LPResult(status, np.full(d, np.nan), float("inf"), pivots)
    return LPResult(status, x, float(c @ x), pivots)
