"""Backend-neutral LP solving.

solve() dispatches to a registered backend after an optional exact
presolve.  The self-contained reference backend certifies optimality with
a reduced-cost check; check_solution() is the independent arbiter of
feasibility used by the test suite.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from dwellcert.lp_model import LinearProgram

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
ITERATION_LIMIT = "IterationLimit"
NUMERICAL_FAILURE = "NumericalFailure"

__all__ = [
    "SolverConfig", "Solution", "CheckReport", "solve", "check_solution",
    "register_backend", "available_backends",
    "OPTIMAL", "INFEASIBLE", "ITERATION_LIMIT", "NUMERICAL_FAILURE",
]


@dataclass
class SolverConfig:
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    max_iters: int = 1_000_000
    backend: str = "reference"
    presolve: bool = True
    refactor_every: int = 0      # 0 selects an n-dependent default
    pricing: str = "devex"       # "devex", "dantzig", or "bland"

    def __post_init__(self):
        if self.feas_tol <= 0 or self.opt_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass
class Solution:
    status: str
    objective: float
    values: np.ndarray
    iterations: int = 0
    message: str = ""
    solve_time: float = 0.0


@dataclass
class CheckReport:
    """Worst violations of a candidate point, scaled: row residuals by the
    row's max coefficient, bound residuals by the bound magnitude."""

    bounds: float
    rows: float
    by_group: dict[str, float] = field(default_factory=dict)
    worst_row: int = -1

    @property
    def max_residual(self) -> float:
        return max(self.bounds, self.rows)

    def within(self, tol: float) -> bool:
        return self.max_residual <= tol


def check_solution(lp: LinearProgram, values: np.ndarray) -> CheckReport:
    """Residuals of a candidate point, computed straight from the LP data
    (no solver state involved)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (lp.num_vars,):
        raise ValueError(f"expected {lp.num_vars} values")
    lo_scale = np.maximum(1.0, np.abs(np.where(np.isfinite(lp.var_lo),
                                               lp.var_lo, 0.0)))
    hi_scale = np.maximum(1.0, np.abs(np.where(np.isfinite(lp.var_hi),
                                               lp.var_hi, 0.0)))
    lo_viol = np.where(np.isfinite(lp.var_lo),
                       (lp.var_lo - values) / lo_scale, 0.0)
    hi_viol = np.where(np.isfinite(lp.var_hi),
                       (values - lp.var_hi) / hi_scale, 0.0)
    bounds = float(max(lo_viol.max(initial=0.0), hi_viol.max(initial=0.0)))

    if lp.num_rows:
        resid = (lp.row_activity(values) - lp.rhs) / lp.row_scales()
        rows = float(resid.max())
        worst_row = int(resid.argmax())
    else:
        resid = np.zeros(0)
        rows, worst_row = 0.0, -1

    by_group = {}
    for name, rng in lp.groups.items():
        if len(rng):
            by_group[name] = float(resid[rng.start:rng.stop].max())
        else:
            by_group[name] = 0.0
    return CheckReport(bounds=max(bounds, 0.0), rows=max(rows, 0.0),
                       by_group=by_group, worst_row=worst_row)


_BACKENDS: dict[str, object] = {}


def register_backend(name: str, fn) -> None:
    _BACKENDS[name] = fn


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def solve(lp: LinearProgram, cfg: SolverConfig | None = None) -> Solution:
    """Solve the LP to optimality with the configured backend."""
    cfg = cfg or SolverConfig()
    if cfg.backend not in _BACKENDS:
        raise ValueError(f"unknown backend {cfg.backend!r}; "
                         f"available: {', '.join(available_backends())}")
    t0 = time.perf_counter()

    target = lp
    expand = None
    if cfg.presolve:
        from dwellcert.solver.presolve import merge_equal_columns
        reduced = merge_equal_columns(lp)
        if reduced.infeasible:
            return Solution(status=INFEASIBLE, objective=float("nan"),
                            values=np.full(lp.num_vars, np.nan),
                            message="presolve: contradictory merged bounds",
                            solve_time=time.perf_counter() - t0)
        if reduced.lp is not None:
            target = reduced.lp
            expand = reduced.expand

    sol = _BACKENDS[cfg.backend](target, cfg)

    if expand is not None and sol.status == OPTIMAL:
        full = expand(sol.values)
        sol = Solution(status=sol.status,
                       objective=float(lp.objective @ full),
                       values=full, iterations=sol.iterations,
                       message=sol.message, solve_time=sol.solve_time)
    sol.solve_time = time.perf_counter() - t0

    if sol.status == OPTIMAL:
        report = check_solution(lp, sol.values)
        if not report.within(cfg.feas_tol):
            sol = Solution(status=NUMERICAL_FAILURE, objective=sol.objective,
                           values=sol.values, iterations=sol.iterations,
                           message=f"final residual {report.max_residual:.3e} "
                                   f"exceeds feasibility tolerance",
                           solve_time=sol.solve_time)
    return sol


from dwellcert.solver import reference as _reference  # noqa: E402
register_backend("reference", _reference.solve_reference)

try:
    from dwellcert.solver import highs as _highs  # noqa: E402
    register_backend("highs", _highs.solve_highs)
except ImportError:  # scipy without linprog
    pass
