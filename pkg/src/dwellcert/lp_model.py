"""Assembly of the bound-search linear program.

Variables: one decay rate alpha plus one value V[x, i] per non-origin fan
vertex x and mode i (the value at the origin is identically zero and is
not materialized).  The objective is to maximize alpha.  Constraints:

  boxes   a_lower * r(x) <= V[x, i] <= a_upper * r(x)     (as variable bounds)
  decay   v[cone, i]^T X^-1 A_i x_j + alpha * r(x_j) <= 0  per cone, j, mode
  jumps   V[x, j] - mu * V[x, i] <= 0                      per vertex, i != j

where r(x) is the vertex radius (the fan puts every vertex at radius K)
and v[cone, i] stacks the values at the cone's vertices.  Alpha is
unbounded below and capped above by a_upper * max_i ||A_i||_2 + 1, a
bound that is provably slack at the optimum and only guards a defective
solver against reporting an unbounded problem.

Row order is deterministic: all decay rows first, ordered by
(cone, j, mode), then all jump rows ordered by (vertex, i, j).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from dwellcert.systems import DwellParams, SwitchedLinearSystem
from dwellcert.triangulation import FanTriangulation

__all__ = ["LinearProgram", "VariableMap", "assemble", "row_count",
           "to_lp_text"]


@dataclass
class LinearProgram:
    """Solver-agnostic LP: maximize objective . v subject to box bounds
    on the variables and sparse inequality rows a . v <= rhs (CSR)."""

    num_vars: int
    objective: np.ndarray
    var_lo: np.ndarray
    var_hi: np.ndarray
    row_ptr: np.ndarray
    col_idx: np.ndarray
    coef: np.ndarray
    rhs: np.ndarray
    groups: dict[str, range] = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.coef)):
            raise ValueError("row coefficients must be finite")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("row right-hand sides must be finite")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective must be finite")
        if len(self.col_idx) and (self.col_idx.min() < 0
                                  or self.col_idx.max() >= self.num_vars):
            raise ValueError("row references a nonexistent variable")
        if np.any(np.isnan(self.var_lo)) or np.any(np.isnan(self.var_hi)):
            raise ValueError("variable bounds must not be NaN")

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    @property
    def nnz(self) -> int:
        return len(self.coef)

    def row(self, r: int) -> tuple[np.ndarray, np.ndarray, float]:
        lo, hi = self.row_ptr[r], self.row_ptr[r + 1]
        return self.col_idx[lo:hi], self.coef[lo:hi], float(self.rhs[r])

    def row_activity(self, values: np.ndarray) -> np.ndarray:
        """a . v for every row (one pass over the CSR arrays)."""
        prod = self.coef * values[self.col_idx]
        return np.add.reduceat(prod, self.row_ptr[:-1]) \
            if self.num_rows else np.zeros(0)

    def row_scales(self) -> np.ndarray:
        """max |coefficient| per row, floored at 1, for residual scaling."""
        if not self.num_rows:
            return np.zeros(0)
        mags = np.abs(self.coef)
        out = np.maximum.reduceat(mags, self.row_ptr[:-1])
        out[np.diff(self.row_ptr) == 0] = 0.0
        return np.maximum(out, 1.0)


@dataclass(frozen=True)
class VariableMap:
    """Column layout: alpha in column 0, then the vertex values grouped
    by vertex id (modes contiguous)."""

    num_vertices: int
    num_modes: int
    alpha_col: int = 0

    def v_col(self, vertex_id: int, mode: int) -> int:
        if not (1 <= vertex_id <= self.num_vertices):
            raise IndexError(f"vertex id {vertex_id} out of range")
        if not (0 <= mode < self.num_modes):
            raise IndexError(f"mode index {mode} out of range")
        return 1 + (vertex_id - 1) * self.num_modes + mode

    def var_name(self, col: int) -> str:
        if col == self.alpha_col:
            return "alpha"
        vid, mode = divmod(col - 1, self.num_modes)
        return f"V_{vid + 1}_{mode}"

    @property
    def num_vars(self) -> int:
        return 1 + self.num_vertices * self.num_modes


def row_count(tri: FanTriangulation, num_modes: int) -> tuple[int, int, int]:
    """(variables, decay rows, jump rows) that assemble() will produce."""
    S = tri.num_boundary_vertices
    M = len(tri.simplices)
    return (S * num_modes + 1,
            M * tri.n * num_modes,
            S * num_modes * (num_modes - 1))


def assemble(tri: FanTriangulation, system: SwitchedLinearSystem,
             params: DwellParams) -> tuple[LinearProgram, VariableMap]:
    """Build the LP for the given fan, system, and parameters."""
    if tri.n != system.n:
        raise ValueError(
            f"dimension mismatch: fan is {tri.n}-d, system is {system.n}-d")
    n = tri.n
    N = system.num_modes
    S = tri.num_boundary_vertices
    M = len(tri.simplices)
    vmap = VariableMap(num_vertices=S, num_modes=N)
    num_vars, n_c2, n_c3 = row_count(tri, N)

    radii = np.linalg.norm(tri.points, axis=1)

    objective = np.zeros(num_vars)
    objective[vmap.alpha_col] = 1.0

    var_lo = np.empty(num_vars)
    var_hi = np.empty(num_vars)
    var_lo[0] = -np.inf
    var_hi[0] = params.a_upper * system.max_spectral_norm() + 1.0
    vr = np.repeat(radii[1:], N)
    var_lo[1:] = params.a_lower * vr
    var_hi[1:] = params.a_upper * vr

    # decay rows, ordered (cone, j, mode); each has n value entries + alpha
    vids = tri.simplex_vertex_ids                      # (M, n)
    G = np.empty((M, N, n, n))
    for i, A in enumerate(system.matrices):
        G[:, i] = np.einsum("mij,jk,mkl->mil", tri.X_inv_all, A, tri.X_all)

    # coefficient of V[vertex k of cone, mode i] in row (cone, j, i) is
    # G[cone, i][k, j]; column order within a row follows k
    c2_coef = np.empty((M, n, N, n + 1))
    c2_coef[..., :n] = G.transpose(0, 3, 1, 2)          # (M, j, i, k)
    c2_coef[..., n] = np.repeat(radii[vids], N, axis=1).reshape(M, n, N)

    vcols = 1 + (vids - 1) * N                          # (M, n) col of mode 0
    cols_k = np.broadcast_to(vcols[:, None, None, :], (M, n, N, n)) \
        + np.arange(N)[None, None, :, None]
    c2_cols = np.empty((M, n, N, n + 1), dtype=np.int64)
    c2_cols[..., :n] = cols_k
    c2_cols[..., n] = vmap.alpha_col

    # jump rows, ordered (vertex, i, j): V[x, j] - mu * V[x, i] <= 0
    if N > 1:
        pair_i, pair_j = np.nonzero(~np.eye(N, dtype=bool))
        order = np.lexsort((pair_j, pair_i))
        pair_i, pair_j = pair_i[order], pair_j[order]
        base = 1 + np.arange(S) * N
        c3_cols = np.empty((S, N * (N - 1), 2), dtype=np.int64)
        c3_cols[..., 0] = base[:, None] + pair_j[None, :]
        c3_cols[..., 1] = base[:, None] + pair_i[None, :]
        c3_coef = np.empty((S, N * (N - 1), 2))
        c3_coef[..., 0] = 1.0
        c3_coef[..., 1] = -params.mu
        c3_cols = c3_cols.reshape(-1, 2)
        c3_coef = c3_coef.reshape(-1, 2)
    else:
        c3_cols = np.empty((0, 2), dtype=np.int64)
        c3_coef = np.empty((0, 2))

    assert c2_cols.reshape(-1, n + 1).shape[0] == n_c2
    assert c3_cols.shape[0] == n_c3

    lengths = np.concatenate([np.full(n_c2, n + 1, dtype=np.int64),
                              np.full(n_c3, 2, dtype=np.int64)])
    row_ptr = np.zeros(n_c2 + n_c3 + 1, dtype=np.int64)
    np.cumsum(lengths, out=row_ptr[1:])
    col_idx = np.concatenate([c2_cols.reshape(-1), c3_cols.reshape(-1)])
    coef = np.concatenate([c2_coef.reshape(-1), c3_coef.reshape(-1)])
    rhs = np.zeros(n_c2 + n_c3)

    lp = LinearProgram(
        num_vars=num_vars,
        objective=objective,
        var_lo=var_lo,
        var_hi=var_hi,
        row_ptr=row_ptr,
        col_idx=col_idx,
        coef=coef,
        rhs=rhs,
        groups={"c2": range(0, n_c2), "c3": range(n_c2, n_c2 + n_c3)},
    )
    return lp, vmap


def update_mu(lp: LinearProgram, vmap: VariableMap, mu: float) -> LinearProgram:
    """Copy of lp with the jump-row coupling factor replaced.

    Only the -mu coefficients of the jump rows change with mu, so a sweep
    can reuse the assembled skeleton.
    """
    if mu < 1.0:
        raise ValueError("mu must be at least 1")
    c3 = lp.groups.get("c3")
    if c3 is None:
        raise ValueError("lp was not produced by assemble()")
    coef = lp.coef.copy()
    start = lp.row_ptr[c3.start] if len(c3) else len(coef)
    coef[start + 1::2] = -mu
    return LinearProgram(
        num_vars=lp.num_vars, objective=lp.objective,
        var_lo=lp.var_lo, var_hi=lp.var_hi,
        row_ptr=lp.row_ptr, col_idx=lp.col_idx, coef=coef, rhs=lp.rhs,
        groups=lp.groups,
    )


def to_lp_text(lp: LinearProgram, vmap: VariableMap | None = None,
               name: str = "dwellcert") -> str:
    """Render the LP in CPLEX LP text format for external cross-checks."""
    def vname(c):
        return vmap.var_name(c) if vmap is not None else f"x{c}"

    out = io.StringIO()
    out.write(f"\\ {name}\nMaximize\n obj:")
    for c in np.nonzero(lp.objective)[0]:
        v = lp.objective[c]
        out.write(f" {'+' if v >= 0 else '-'} {abs(v)!r} {vname(c)}")
    out.write("\nSubject To\n")
    for r in range(lp.num_rows):
        cols, coefs, rhs = lp.row(r)
        out.write(f" r{r}:")
        for c, a in zip(cols, coefs):
            out.write(f" {'+' if a >= 0 else '-'} {abs(a)!r} {vname(c)}")
        out.write(f" <= {rhs!r}\n")
    out.write("Bounds\n")
    for c in range(lp.num_vars):
        lo = "-inf" if np.isinf(lp.var_lo[c]) else repr(lp.var_lo[c])
        hi = "+inf" if np.isinf(lp.var_hi[c]) else repr(lp.var_hi[c])
        out.write(f" {lo} <= {vname(c)} <= {hi}\n")
    out.write("End\n")
    return out.getvalue()
