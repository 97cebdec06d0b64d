"""Optional high-performance backend via scipy's bundled HiGHS solver.

Used for cross-checking the reference backend and for large fans where
the reference simplex gets slow.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from dwellcert.lp_model import LinearProgram
from dwellcert.solver import (
    INFEASIBLE, ITERATION_LIMIT, NUMERICAL_FAILURE, OPTIMAL,
    Solution, SolverConfig,
)


def solve_highs(lp: LinearProgram, cfg: SolverConfig) -> Solution:
    A = sp.csr_matrix((lp.coef.copy(), lp.col_idx.copy(), lp.row_ptr.copy()),
                      shape=(lp.num_rows, lp.num_vars))
    res = linprog(
        -lp.objective,
        A_ub=A,
        b_ub=lp.rhs,
        bounds=np.column_stack([lp.var_lo, lp.var_hi]),
        method="highs",
        options={
            "primal_feasibility_tolerance": min(1e-10, cfg.feas_tol),
            "dual_feasibility_tolerance": min(1e-10, cfg.opt_tol),
            "maxiter": cfg.max_iters,
        },
    )
    if res.status == 0:
        return Solution(status=OPTIMAL, objective=float(-res.fun),
                        values=np.asarray(res.x, dtype=float),
                        iterations=int(getattr(res, "nit", 0)))
    if res.status == 2:
        return Solution(status=INFEASIBLE, objective=float("nan"),
                        values=np.full(lp.num_vars, np.nan),
                        message=res.message)
    if res.status == 1:
        return Solution(status=ITERATION_LIMIT, objective=float("nan"),
                        values=np.full(lp.num_vars, np.nan),
                        message=res.message)
    return Solution(status=NUMERICAL_FAILURE, objective=float("nan"),
                    values=np.full(lp.num_vars, np.nan),
                    message=res.message)
