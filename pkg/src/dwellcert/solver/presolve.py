"""Exact presolve: merge variables forced equal by paired unit rows.

Two rows  x_p - x_q <= 0  and  x_q - x_p <= 0  (coefficients exactly +1
and -1, zero right-hand side) force x_p = x_q.  With a unit jump factor
the jump rows of the assembled LP pair up exactly like this for every
vertex, collapsing the per-mode values to a single function; the merge is
exact, so the expanded solution satisfies the original LP bit-for-bit on
the merged rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from dwellcert.lp_model import LinearProgram

__all__ = ["merge_equal_columns", "PresolveResult"]


@dataclass
class PresolveResult:
    lp: LinearProgram | None          # None: nothing to merge
    expand: Callable[[np.ndarray], np.ndarray] | None
    infeasible: bool = False
    num_merged: int = 0


def _find_equal_pairs(lp: LinearProgram) -> set[tuple[int, int]]:
    lengths = np.diff(lp.row_ptr)
    two = np.nonzero(lengths == 2)[0]
    directed = set()
    for r in two:
        if lp.rhs[r] != 0.0:
            continue
        lo = lp.row_ptr[r]
        c0, c1 = lp.col_idx[lo], lp.col_idx[lo + 1]
        a0, a1 = lp.coef[lo], lp.coef[lo + 1]
        if a0 == 1.0 and a1 == -1.0:
            directed.add((int(c0), int(c1)))      # x_c0 <= x_c1
        elif a0 == -1.0 and a1 == 1.0:
            directed.add((int(c1), int(c0)))
    return {(p, q) for p, q in directed if p < q and (q, p) in directed}


def merge_equal_columns(lp: LinearProgram) -> PresolveResult:
    pairs = _find_equal_pairs(lp)
    if not pairs:
        return PresolveResult(lp=None, expand=None)

    parent = np.arange(lp.num_vars)

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for p, q in sorted(pairs):
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[max(rp, rq)] = min(rp, rq)
    rep = np.array([find(c) for c in range(lp.num_vars)])

    reps = np.unique(rep)
    new_id = np.empty(lp.num_vars, dtype=np.int64)
    new_id[reps] = np.arange(len(reps))
    col_map = new_id[rep]

    objective = np.zeros(len(reps))
    np.add.at(objective, col_map, lp.objective)
    var_lo = np.full(len(reps), -np.inf)
    var_hi = np.full(len(reps), np.inf)
    np.maximum.at(var_lo, col_map, lp.var_lo)
    np.minimum.at(var_hi, col_map, lp.var_hi)
    if np.any(var_lo > var_hi):
        return PresolveResult(lp=None, expand=None, infeasible=True)

    import scipy.sparse as sp
    A = sp.csr_matrix((lp.coef.copy(), col_map[lp.col_idx], lp.row_ptr.copy()),
                      shape=(lp.num_rows, len(reps)))
    A.sum_duplicates()
    A.eliminate_zeros()
    keep = np.diff(A.indptr) > 0
    if np.any(~keep & (lp.rhs < 0)):
        return PresolveResult(lp=None, expand=None, infeasible=True)
    A = A[keep]

    reduced = LinearProgram(
        num_vars=len(reps),
        objective=objective,
        var_lo=var_lo,
        var_hi=var_hi,
        row_ptr=A.indptr.astype(np.int64),
        col_idx=A.indices.astype(np.int64),
        coef=A.data,
        rhs=lp.rhs[keep],
    )

    def expand(values: np.ndarray) -> np.ndarray:
        return values[col_map]

    return PresolveResult(lp=reduced, expand=expand,
                          num_merged=lp.num_vars - len(reps))
