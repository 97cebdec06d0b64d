"""Search over the jump factor mu: one LP solve per grid point, collect
(mu, alpha, tau_a), and report the best finite dwell-time bound.

The triangulation and the constraint skeleton are built once; only the
jump-row coefficients change with mu.  No unimodality of tau_a(mu) is
assumed anywhere: refine() is a best-effort local shrink around a grid
minimizer and simply returns the best point it probed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from dwellcert.lp_model import VariableMap, assemble, update_mu
from dwellcert.solver import OPTIMAL, Solution, SolverConfig, solve
from dwellcert.systems import DwellParams, SwitchedLinearSystem
from dwellcert.triangulation import FanTriangulation, build_fan

__all__ = ["SweepPoint", "SweepResult", "sweep", "refine",
           "default_mu_grid", "write_sweep_csv"]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepPoint:
    mu: float
    alpha: float
    tau_a: float          # inf when alpha <= 0
    status: str


@dataclass
class SweepResult:
    points: list[SweepPoint]
    best: int | None      # index of the minimal finite tau_a (ties: smaller mu)
    K: int
    params: DwellParams
    system: SwitchedLinearSystem

    @property
    def best_point(self) -> SweepPoint | None:
        return None if self.best is None else self.points[self.best]


def default_mu_grid(lo: float = 1.0, hi: float = 3.0,
                    step: float = 0.05) -> np.ndarray:
    count = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


def _tau(mu: float, alpha: float, a_upper: float) -> float:
    if alpha <= 0.0:
        return math.inf
    if mu == 1.0:
        return 0.0
    return a_upper * math.log(mu) / alpha


def _point(sol: Solution, mu: float, a_upper: float) -> SweepPoint:
    if sol.status == OPTIMAL:
        alpha = float(sol.objective)
        return SweepPoint(mu=mu, alpha=alpha,
                          tau_a=_tau(mu, alpha, a_upper), status=sol.status)
    return SweepPoint(mu=mu, alpha=math.nan, tau_a=math.inf, status=sol.status)


class _MuSolver:
    """Solve the assembled LP at varying mu, rebuilding only the jump rows."""

    def __init__(self, system, K, params, cfg,
                 tri: FanTriangulation | None = None):
        self.tri = tri if tri is not None else build_fan(system.n, K)
        self.params = params
        self.cfg = cfg or SolverConfig()
        base = DwellParams(a_lower=params.a_lower, a_upper=params.a_upper,
                           mu=max(params.mu, 1.0))
        self.lp0, self.vmap = assemble(self.tri, system, base)
        self.base_mu = base.mu
        self.cache: dict[float, SweepPoint] = {}

    def at(self, mu: float) -> SweepPoint:
        mu = float(mu)
        if mu in self.cache:
            return self.cache[mu]
        lp = self.lp0 if mu == self.base_mu else update_mu(self.lp0,
                                                           self.vmap, mu)
        sol = solve(lp, self.cfg)
        pt = _point(sol, mu, self.params.a_upper)
        self.cache[mu] = pt
        return pt


def sweep(system: SwitchedLinearSystem, K: int, mu_grid,
          params: DwellParams | None = None,
          cfg: SolverConfig | None = None,
          tri: FanTriangulation | None = None) -> SweepResult:
    """One LP solve per grid value of mu, in grid order.

    Solver failures are recorded in the point's status and never abort
    the sweep.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    if mu_grid.size == 0:
        raise ValueError("mu grid is empty")
    if np.any(np.diff(mu_grid) < 0) or mu_grid[0] < 1.0:
        raise ValueError("mu grid must be ascending and start at >= 1")
    params = params or DwellParams(mu=float(mu_grid[0]))

    runner = _MuSolver(system, K, params, cfg, tri)
    points = [runner.at(mu) for mu in mu_grid]

    best = None
    for i, pt in enumerate(points):
        if math.isfinite(pt.tau_a):
            if best is None or pt.tau_a < points[best].tau_a:
                best = i
    return SweepResult(points=points, best=best, K=runner.tri.K,
                       params=params, system=system)


def refine(system: SwitchedLinearSystem, K: int, bracket: tuple[float, float],
           params: DwellParams | None = None, iters: int = 8,
           cfg: SolverConfig | None = None,
           tri: FanTriangulation | None = None) -> SweepPoint:
    """Golden-section shrink of tau_a(mu) over the bracket.

    Returns the best probed point (bracket ends included); makes no
    unimodality guarantee.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (1.0 <= lo <= hi):
        raise ValueError("bracket must satisfy 1 <= lo <= hi")
    params = params or DwellParams(mu=lo)
    runner = _MuSolver(system, K, params, cfg, tri)

    if lo == hi:
        return runner.at(lo)

    probes = [runner.at(lo), runner.at(hi)]
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = runner.at(c), runner.at(d)
    probes += [fc, fd]
    for _ in range(max(0, iters - 2)):
        if fc.tau_a <= fd.tau_a:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = runner.at(c)
            probes.append(fc)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = runner.at(d)
            probes.append(fd)
    return min(probes, key=lambda p: (p.tau_a, p.mu))


def write_sweep_csv(result: SweepResult, path) -> None:
    """CSV emission: header mu,alpha,tau_a,status, one row per point."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mu", "alpha", "tau_a", "status"])
        for p in result.points:
            w.writerow([repr(p.mu), repr(p.alpha), repr(p.tau_a), p.status])
