"""Optimal one-to-one matching on rectangular cost matrices.

The solver wraps scipy's Jonker-Volgenant implementation and adds a
deterministic tie-break: among all minimum-cost matchings it returns the
one whose (row, col) pair list, sorted by row, is lexicographically
smallest. Ties are resolved by recovering optimal dual potentials, which
confine every optimal matching to the zero-reduced-cost subgraph, and then
greedily fixing rows to their smallest feasible column in that subgraph.

Maximization problems (IoU matching) are solved by negating scores before
the call. Inadmissible cells can be masked out via ``forbid``; the solver
then maximizes the number of admissible pairs first and drops any pair
that still lands on a forbidden cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NonFiniteCost


@dataclass(frozen=True)
class AssignmentResult:
    """Matched (row, col) pairs sorted by row, plus their summed cost."""

    pairs: list[tuple[int, int]]
    total_cost: float


def solve_min_cost(cost, forbid: np.ndarray | None = None) -> AssignmentResult:
    """Minimum-cost one-to-one matching of cardinality min(n_rows, n_cols).

    Args:
        cost: (n_rows, n_cols) array of finite reals.
        forbid: optional boolean mask of the same shape; True cells cannot
            appear in the result. The solver maximizes the number of
            admissible pairs, then minimizes their total cost, so with a
            mask the cardinality may drop below min(n_rows, n_cols).

    Raises:
        NonFiniteCost: if any entry is NaN or infinite.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2:
        raise ValueError(f"cost must be a 2-D matrix, got shape {c.shape}")
    n_rows, n_cols = c.shape
    if n_rows == 0 or n_cols == 0:
        return AssignmentResult([], 0.0)
    if not np.isfinite(c).all():
        raise NonFiniteCost("cost matrix contains NaN or infinite entries")

    work = c
    if forbid is not None:
        forbid = np.asarray(forbid, dtype=bool)
        if forbid.shape != c.shape:
            raise ValueError("forbid mask shape must match the cost matrix")
        if forbid.all():
            return AssignmentResult([], 0.0)
        scale = max(1.0, float(np.abs(c[~forbid]).max()))
        # One forbidden edge must outweigh any achievable admissible total,
        # so cardinality dominates cost.
        big = (2 * min(n_rows, n_cols) + 1) * scale + 1.0
        work = np.where(forbid, big, c)

    # Pad to square: dummy rows/cols cost 0 and absorb the unmatched side.
    n = max(n_rows, n_cols)
    sq = np.zeros((n, n))
    sq[:n_rows, :n_cols] = work

    rows, cols = linear_sum_assignment(sq)
    match_col = np.empty(n, dtype=np.int64)
    match_col[rows] = cols

    tight = _tight_edges(sq, match_col)
    if tight.sum() > n:
        match_col = _lexicographic_matching(tight, match_col)

    pairs = []
    for i in range(n_rows):
        j = int(match_col[i])
        if j >= n_cols:
            continue
        if forbid is not None and forbid[i, j]:
            continue
        pairs.append((i, j))
    total = float(sum(c[i, j] for i, j in pairs))
    return AssignmentResult(pairs, total)


def _tight_edges(sq: np.ndarray, match_col: np.ndarray) -> np.ndarray:
    """Zero-reduced-cost mask under optimal duals recovered from the matching.

    Every optimal matching lies inside this subgraph, and every perfect
    matching of the subgraph is optimal, so tie-breaking can ignore costs
    from here on.
    """
    n = sq.shape[0]
    row_of_col = np.empty(n, dtype=np.int64)
    row_of_col[match_col] = np.arange(n)

    # Feasible duals solve the difference constraints
    #   u[i] - u[row_of_col[j]] <= sq[i, j] - sq[row_of_col[j], j]
    # (Bellman-Ford; no negative cycles because the matching is optimal).
    base = sq[row_of_col, np.arange(n)]
    w = sq - base[None, :]
    u = np.zeros(n)
    for _ in range(n):
        cand = (u[row_of_col][None, :] + w).min(axis=1)
        new_u = np.minimum(u, cand)
        if np.array_equal(new_u, u):
            break
        u = new_u
    v = base - u[row_of_col]

    reduced = sq - u[:, None] - v[None, :]
    eps = 1e-9 * max(1.0, float(np.abs(sq).max()))
    return reduced <= eps


def _lexicographic_matching(tight: np.ndarray, match_col: np.ndarray) -> np.ndarray:
    """Smallest perfect matching of the tight subgraph in (row, col) order.

    Maintains a valid completion at all times: to test a candidate column
    for a row, reroute the column's current owner through an augmenting
    path; revert if none exists.
    """
    n = tight.shape[0]
    adj = [np.flatnonzero(tight[i]).tolist() for i in range(n)]
    match_col = match_col.copy()
    col_owner = np.empty(n, dtype=np.int64)
    col_owner[match_col] = np.arange(n)
    used = np.zeros(n, dtype=bool)

    def augment(r: int, visited: set[int]) -> bool:
        for j in adj[r]:
            if used[j] or j in visited:
                continue
            visited.add(j)
            owner = int(col_owner[j])
            if owner == -1 or augment(owner, visited):
                col_owner[j] = r
                match_col[r] = j
                return True
        return False

    for i in range(n):
        for j in adj[i]:
            if used[j]:
                continue
            if match_col[i] == j:
                break
            r = int(col_owner[j])
            old = int(match_col[i])
            match_col[i] = j
            col_owner[j] = i
            col_owner[old] = -1
            match_col[r] = -1
            used[j] = True
            if augment(r, set()):
                used[j] = False
                break
            # No completion with (i, j); restore and try the next column.
            used[j] = False
            match_col[i] = old
            col_owner[old] = i
            col_owner[j] = r
            match_col[r] = j
        used[match_col[i]] = True
    return match_col
