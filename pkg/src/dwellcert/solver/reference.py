"""Self-contained reference LP backend: revised simplex with a product
eta file over a periodically refreshed dense LU.

The LP  max c.x  s.t.  Ax <= b,  l <= x <= u  is solved through its
inequality dual

    min  b.y + u.zeta - l.eta
    s.t. A^T y + zeta - eta = c,     y, zeta, eta >= 0,

whose unit columns give a feasible starting basis outright.  The basis
stays n x n (the assembled bound LPs have far more rows than variables,
so a row-sized basis would be prohibitive) and every pivot is a column
replacement.  Box bounds turn into singleton dual columns rather than
general rows.  Entering columns are picked by scaled Dantzig pricing with
a Bland fallback engaged on stalls; leaving rows by a two-pass ratio test
with a small feasibility relaxation.  At optimality the simplex
multipliers of the equality rows are exactly the primal point, and the
closing nonnegative-reduced-cost sweep doubles as the certificate that
the point satisfies every primal constraint.

Requirement: every variable with a positive objective coefficient needs a
finite upper bound and every one with a negative coefficient a finite
lower bound (otherwise the dual has no unit starting basis).  The LPs
assembled by this package always satisfy this; for anything else use the
"highs" backend.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from dwellcert import _core as kern
from dwellcert.lp_model import LinearProgram
from dwellcert.solver import (
    INFEASIBLE, ITERATION_LIMIT, NUMERICAL_FAILURE, OPTIMAL,
    Solution, SolverConfig,
)

_PIVOT_REL = 1e-7       # reject pivots smaller than this times max |w|
_STALL_WINDOW = 600     # iterations without objective progress -> Bland


class _Factor:
    """B^-1 as (diag signs | dense LU) followed by an eta file."""

    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        self.lu = None
        self.sign = np.ones(n)
        self.vecs = np.empty((cap, n))
        self.pos = np.empty(cap, dtype=np.int64)
        self.piv = np.empty(cap)
        self.count = 0

    def set_identity(self, sign: np.ndarray) -> None:
        self.lu = None
        self.sign = sign
        self.count = 0

    def set_lu(self, dense: np.ndarray) -> None:
        self.lu = sla.lu_factor(dense, overwrite_a=True, check_finite=False)
        self.count = 0

    def push(self, w: np.ndarray, p: int) -> None:
        k = self.count
        self.vecs[k] = w
        self.pos[k] = p
        self.piv[k] = w[p]
        self.count = k + 1

    @property
    def full(self) -> bool:
        return self.count >= self.cap

    def ftran(self, a: np.ndarray) -> np.ndarray:
        if self.lu is None:
            z = a * self.sign
        else:
            z = sla.lu_solve(self.lu, a, check_finite=False)
        if self.count:
            kern.ftran_etas(self.vecs[:self.count], self.pos[:self.count],
                            self.piv[:self.count], z)
        return z

    def btran(self, g: np.ndarray) -> np.ndarray:
        y = g.copy()
        if self.count:
            kern.btran_etas(self.vecs[:self.count], self.pos[:self.count],
                            self.piv[:self.count], y)
        if self.lu is None:
            y *= self.sign
        else:
            y = sla.lu_solve(self.lu, y, trans=1, check_finite=False)
        return y


def solve_reference(lp: LinearProgram, cfg: SolverConfig) -> Solution:
    n = lp.num_vars
    m = lp.num_rows
    # copy: scipy would otherwise share the data buffer and sort_indices
    # would permute it in place, corrupting the caller's LP
    A = sp.csr_matrix((lp.coef.copy(), lp.col_idx.copy(), lp.row_ptr.copy()),
                      shape=(m, n))
    A.sort_indices()
    b = lp.rhs
    c = lp.objective
    lo, hi = lp.var_lo, lp.var_hi

    ufin = np.nonzero(np.isfinite(hi))[0]
    lfin = np.nonzero(np.isfinite(lo))[0]
    nz, nh = len(ufin), len(lfin)
    ncols = m + nz + nh

    zeta_of = np.full(n, -1, dtype=np.int64)
    zeta_of[ufin] = m + np.arange(nz)
    eta_of = np.full(n, -1, dtype=np.int64)
    eta_of[lfin] = m + nz + np.arange(nh)

    cost = np.concatenate([b, hi[ufin], -lo[lfin]])
    scale = np.concatenate([lp.row_scales(),
                            np.maximum(1.0, np.abs(hi[ufin])),
                            np.maximum(1.0, np.abs(lo[lfin]))])
    thresh = cfg.feas_tol * scale

    # starting basis: one unit column per equality row
    basis = np.empty(n, dtype=np.int64)
    sign = np.empty(n)
    for j in range(n):
        if c[j] >= 0.0:
            col = zeta_of[j] if zeta_of[j] >= 0 else eta_of[j]
        else:
            col = eta_of[j] if eta_of[j] >= 0 else -1
        if col < 0:
            raise ValueError(
                "reference backend needs a finite upper bound on variables "
                "with positive objective coefficient (and a finite lower "
                f"bound for negative ones); variable {j} has neither")
        if col >= m + nz and c[j] > 0.0:
            raise ValueError(
                f"variable {j}: positive objective but no finite upper bound")
        basis[j] = col
        sign[j] = 1.0 if col < m + nz else -1.0
    in_basis = np.zeros(ncols, dtype=bool)
    in_basis[basis] = True

    cap = cfg.refactor_every or max(48, min(384, n // 10))
    fac = _Factor(n, cap)
    fac.set_identity(sign)
    xB = np.abs(c).astype(float)

    rows_of_col = A.indices
    ptr = A.indptr
    dat = A.data

    def column(q: int, out: np.ndarray) -> np.ndarray:
        out[:] = 0.0
        if q < m:
            s = slice(ptr[q], ptr[q + 1])
            out[rows_of_col[s]] = dat[s]
        elif q < m + nz:
            out[ufin[q - m]] = 1.0
        else:
            out[lfin[q - m - nz]] = -1.0
        return out

    def refactor() -> None:
        dense = np.zeros((n, n))
        y_slots = np.nonzero(basis < m)[0]
        if len(y_slots):
            sub = A[basis[y_slots]].tocoo()
            dense[sub.col, y_slots[sub.row]] = sub.data
        z_slots = np.nonzero((basis >= m) & (basis < m + nz))[0]
        dense[ufin[basis[z_slots] - m], z_slots] = 1.0
        h_slots = np.nonzero(basis >= m + nz)[0]
        dense[lfin[basis[h_slots] - m - nz], h_slots] = -1.0
        fac.set_lu(dense)

    def reduced_costs(pi: np.ndarray, out: np.ndarray) -> np.ndarray:
        out[:m] = b - A @ pi
        out[m:m + nz] = hi[ufin] - pi[ufin]
        out[m + nz:] = pi[lfin] - lo[lfin]
        return out

    d = np.empty(ncols)
    a_buf = np.empty(n)
    alpha_row = np.empty(ncols)
    harris_delta = 10.0 * cfg.feas_tol

    devex = cfg.pricing == "devex"
    weights = np.ones(ncols) if devex else None
    bland = cfg.pricing == "bland"
    forced_bland = bland
    dual_obj = float(cost[basis] @ xB)
    best_obj = dual_obj
    since_progress = 0
    iters = 0
    status = None
    message = ""

    while iters < cfg.max_iters:
        pi = fac.btran(cost[basis])
        reduced_costs(pi, d)
        elig = (d < -thresh) & ~in_basis
        if not np.any(elig):
            status = OPTIMAL
            break
        if bland:
            q = int(np.nonzero(elig)[0][0])
        elif devex:
            score = np.where(elig, d * d / weights, 0.0)
            q = int(score.argmax())
        else:
            score = np.where(elig, d / scale, 0.0)
            q = int(score.argmin())

        w = fac.ftran(column(q, a_buf))
        wmax = float(np.abs(w).max())
        t, p = kern.harris_ratio(xB, w, harris_delta,
                                 max(1e-11, 1e-9 * wmax))
        if p < 0:
            status = INFEASIBLE
            message = "dual unbounded: the primal constraints are inconsistent"
            break
        weak_pivot = abs(w[p]) < _PIVOT_REL * wmax
        if weak_pivot and fac.count:
            # a fresh factorization may reveal a better pivot
            refactor()
            xB = fac.ftran(c)
            continue

        if devex:
            # pivot row over all columns, for the reference-weight update
            a_buf[:] = 0.0
            a_buf[p] = 1.0
            rho = fac.btran(a_buf)
            alpha_row[:m] = A @ rho
            alpha_row[m:m + nz] = rho[ufin]
            alpha_row[m + nz:] = -rho[lfin]
            piv_q = alpha_row[q] if alpha_row[q] != 0.0 else w[p]
            cand = (alpha_row / piv_q) ** 2 * weights[q]
            np.maximum(weights, cand, out=weights)
            leaving_weight = max(weights[q] / piv_q ** 2, 1.0)
            if weights.max() > 1e10:
                weights[:] = 1.0
                leaving_weight = 1.0

        xB -= t * w
        xB[p] = t
        leaving = basis[p]
        in_basis[leaving] = False
        in_basis[q] = True
        basis[p] = q
        if devex:
            weights[leaving] = leaving_weight
        fac.push(w, p)
        dual_obj += t * d[q]
        iters += 1

        if dual_obj < best_obj - 1e-10 * (1.0 + abs(best_obj)):
            best_obj = dual_obj
            since_progress = 0
            if bland and not forced_bland:
                bland = False
        else:
            since_progress += 1
            if since_progress >= _STALL_WINDOW and not bland:
                bland = True
        if fac.full or weak_pivot:
            refactor()
            xB = fac.ftran(c)

    else:
        status = ITERATION_LIMIT

    if status != OPTIMAL:
        return Solution(status=status, objective=float("nan"),
                        values=np.full(n, np.nan), iterations=iters,
                        message=message)

    # clean recomputation of the optimal point from the final basis
    refactor()
    xB = fac.ftran(c)
    pi = fac.btran(cost[basis])
    reduced_costs(pi, d)
    x = pi

    objective = float(c @ x)
    worst_d = float((d[~in_basis] / scale[~in_basis]).min()) \
        if ncols > n else 0.0
    gap = abs(float(cost[basis] @ xB) - objective)
    if worst_d < -10 * cfg.feas_tol or xB.min() < -1e-6 \
            or gap > 1e-6 * (1.0 + abs(objective)):
        return Solution(status=NUMERICAL_FAILURE, objective=objective,
                        values=x, iterations=iters,
                        message=f"optimality certificate failed "
                                f"(worst reduced cost {worst_d:.2e}, "
                                f"gap {gap:.2e})")
    return Solution(status=OPTIMAL, objective=objective, values=x,
                    iterations=iters)
