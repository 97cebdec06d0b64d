"""Fan triangulation of R^n around the origin.

The fan is built in two steps.  The surface of the cube grid [-K, K]^n is
subdivided into (n-1)-simplices: every facet of the cube is a copy of
[-K, K]^(n-1), and each of its unit cells carries the standard Kuhn
subdivision, mirrored into the negative orthants coordinate-wise.  Every
surface simplex is then radially rescaled onto the sphere of radius K
(each lattice vertex v is moved to (max-norm(v)/euclid-norm(v)) * v) and
coned to the origin.  The resulting cones partition R^n \\ {0} by rays, so
a function that is linear on every cone is determined by its values at
the sphere vertices and is positively homogeneous of degree 1.

Counts: 8K cones for n=2 and 48K^2 for n=3 (2n facets, each contributing
2^(n-1) * K^(n-1) * (n-1)! simplices).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import permutations, product

import numpy as np

__all__ = [
    "Vertex",
    "SimplexCone",
    "FanTriangulation",
    "build_fan",
    "radial_map",
]

# Non-degeneracy floor for |det X| relative to K^n; a failure indicates a
# construction bug, not bad input.
_DET_FLOOR = 1e-10
_INV_TOL = 1e-9
_LAMBDA_TOL = 1e-9


def radial_map(x) -> np.ndarray:
    """Rescale x onto the sphere whose radius is the max-norm of x.

    Returns 0 for x = 0; otherwise (max-norm/euclid-norm) * x, so the
    output has Euclidean norm equal to the max-norm of the input.
    """
    x = np.asarray(x, dtype=float)
    norm_inf = np.max(np.abs(x))
    if norm_inf == 0.0:
        return np.zeros_like(x)
    return (norm_inf / np.linalg.norm(x)) * x


@dataclass(frozen=True)
class Vertex:
    """A fan vertex: integer cube-surface coordinates and their image on
    the sphere.  Vertex 0 is always the origin."""

    id: int
    grid: tuple[int, ...]
    point: np.ndarray
    radius: float


@dataclass(frozen=True)
class SimplexCone:
    """One cone of the fan: the origin (implicit apex) plus n sphere
    vertices.  X holds the vertex points as columns; X_inv is cached for
    conic-coordinate solves."""

    id: int
    vertex_ids: tuple[int, ...]
    X: np.ndarray
    X_inv: np.ndarray
    det_abs: float


@dataclass
class FanTriangulation:
    n: int
    K: int
    vertices: list[Vertex]
    simplices: list[SimplexCone]
    # dense arrays mirroring the lists, for batched work
    points: np.ndarray = field(repr=False)          # (V, n)
    simplex_vertex_ids: np.ndarray = field(repr=False)  # (M, n) int
    X_all: np.ndarray = field(repr=False)           # (M, n, n)
    X_inv_all: np.ndarray = field(repr=False)       # (M, n, n)
    _locate_table: np.ndarray = field(repr=False)   # flat cell index -> simplex id

    @property
    def num_boundary_vertices(self) -> int:
        return len(self.vertices) - 1

    def locate(self, x) -> tuple[int, np.ndarray]:
        """Find a cone containing x (x != 0) and its conic coordinates.

        Returns (simplex id, lam) with lam = X_inv @ x, lam >= -1e-9.  On
        a face shared by several cones any containing cone may be
        returned; the evaluated piecewise-linear value is the same either
        way.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}")
        if not np.any(x):
            raise ValueError("the origin is not inside any cone")
        sid, lam = self.locate_many(x[None, :])
        return int(sid[0]), lam[0]

    def locate_many(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized locate for an (B, n) array of nonzero points."""
        X = np.asarray(X, dtype=float)
        B, n = X.shape
        if n != self.n:
            raise ValueError(f"expected points of dimension {self.n}")
        absX = np.abs(X)
        norm_inf = absX.max(axis=1)
        if np.any(norm_inf == 0.0):
            raise ValueError("the origin is not inside any cone")
        d = absX.argmax(axis=1)
        xd = X[np.arange(B), d]
        side = (xd > 0).astype(np.int64)

        # project onto the cube surface and read off the Kuhn cell
        U = X * (self.K / norm_inf)[:, None]
        keep = np.ones((B, n), dtype=bool)
        keep[np.arange(B), d] = False
        others = U[keep].reshape(B, n - 1)
        neg = others < 0
        mags = np.abs(others)
        cell = np.minimum(np.floor(mags).astype(np.int64), self.K - 1)
        frac = mags - cell
        order = np.argsort(-frac, axis=1, kind="stable")

        flat = self._flat_cell_index(d, side, cell, neg, order)
        sid = self._locate_table[flat]
        lam = np.einsum("bij,bj->bi", self.X_inv_all[sid], X)

        bad = lam.min(axis=1) < -_LAMBDA_TOL
        if np.any(bad):
            for idx in np.nonzero(bad)[0]:
                sid[idx], lam[idx] = self._locate_scan(X[idx])
        return sid, lam

    def _flat_cell_index(self, d, side, cell, neg, order) -> np.ndarray:
        n, K = self.n, self.K
        fct = math.factorial(n - 1)
        idx = d * 2 + side
        for c in range(n - 1):
            idx = idx * K + cell[:, c]
        for c in range(n - 1):
            idx = idx * 2 + neg[:, c]
        # Lehmer rank of the permutation
        rank = np.zeros(len(order), dtype=np.int64)
        for c in range(n - 1):
            smaller = (order[:, c + 1:] < order[:, c][:, None]).sum(axis=1)
            rank = rank * (n - 1 - c) + smaller
        return idx * fct + rank

    def _locate_scan(self, x) -> tuple[int, np.ndarray]:
        # robustness fallback: scan every cone for the best coordinates
        lam_all = np.einsum("mij,j->mi", self.X_inv_all, x)
        best = int(lam_all.min(axis=1).argmax())
        lam = lam_all[best]
        if lam.min() < -_LAMBDA_TOL:
            raise RuntimeError("internal error: point not located in any cone")
        return best, lam

    def export_csv(self, vertices_path, simplices_path) -> None:
        """Debug dump: vertex id, grid coords, point coords; simplex id,
        vertex ids."""
        with open(vertices_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id"] + [f"g{i}" for i in range(self.n)]
                       + [f"p{i}" for i in range(self.n)])
            for v in self.vertices:
                w.writerow([v.id, *v.grid, *(repr(c) for c in v.point)])
        with open(simplices_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id"] + [f"v{i}" for i in range(self.n)])
            for s in self.simplices:
                w.writerow([s.id, *s.vertex_ids])


def _surface_faces(n: int, K: int):
    """Enumerate the cube-surface simplices facet by facet.

    Yields ((d, side, cell, negbits, permrank), face) where face is the
    tuple of n integer grid vertices.  The key is a bijection onto the
    face set, which locate() exploits.
    """
    for d in range(n):
        others = [c for c in range(n) if c != d]
        for side in (0, 1):
            axis_val = K if side == 1 else -K
            for cell in product(range(K), repeat=n - 1):
                for negbits in product((0, 1), repeat=n - 1):
                    sign = tuple(-1 if b else 1 for b in negbits)
                    for prank, perm in enumerate(permutations(range(n - 1))):
                        mags = list(cell)
                        face = []
                        for step in range(n):
                            if step > 0:
                                mags[perm[step - 1]] += 1
                            g = [0] * n
                            g[d] = axis_val
                            for c, o in enumerate(others):
                                g[o] = sign[c] * mags[c]
                            face.append(tuple(g))
                        key = (d, side, cell, negbits, prank)
                        yield key, tuple(face)


def build_fan(n: int, K: int) -> FanTriangulation:
    """Construct the radius-K fan triangulation in dimension n.

    Deterministic: vertices are sorted lexicographically by grid
    coordinates (the origin gets id 0) and simplices by their sorted
    vertex-id tuple.
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if K < 1:
        raise ValueError("K must be a positive integer")
    K = int(K)

    keyed_faces = list(_surface_faces(n, K))
    grid_set = set()
    for _, face in keyed_faces:
        grid_set.update(face)

    grids = [(0,) * n] + sorted(grid_set)
    vid_of = {g: i for i, g in enumerate(grids)}

    grid_arr = np.array(grids, dtype=float)
    norm_inf = np.abs(grid_arr).max(axis=1)
    norm_two = np.linalg.norm(grid_arr, axis=1)
    scale = np.divide(norm_inf, norm_two, out=np.zeros_like(norm_two),
                      where=norm_two > 0)
    points = grid_arr * scale[:, None]
    radii = np.linalg.norm(points, axis=1)

    vertices = [Vertex(i, grids[i], points[i], float(radii[i]))
                for i in range(len(grids))]

    face_ids = {}
    for key, face in keyed_faces:
        ids = tuple(sorted(vid_of[g] for g in face))
        if ids in face_ids:
            raise RuntimeError("internal error: duplicate surface simplex")
        face_ids[ids] = key

    ordered = sorted(face_ids)
    X_all = points[np.array(ordered, dtype=np.int64)].transpose(0, 2, 1)
    det = np.linalg.det(X_all)
    if np.any(np.abs(det) <= _DET_FLOOR * float(K) ** n):
        raise RuntimeError("internal error: degenerate cone simplex")
    X_inv_all = np.linalg.inv(X_all)
    resid = np.abs(np.einsum("mij,mjk->mik", X_inv_all, X_all)
                   - np.eye(n)).max()
    if resid > _INV_TOL:
        raise RuntimeError("internal error: inaccurate cone inverse")

    simplices = [
        SimplexCone(i, ids, X_all[i], X_inv_all[i], float(abs(det[i])))
        for i, ids in enumerate(ordered)
    ]

    # flat (facet, side, cell, signs, perm) -> simplex id, for locate()
    fct = math.factorial(n - 1)
    table = np.full(2 * n * (2 * K) ** (n - 1) * fct, -1, dtype=np.int64)
    for sid, ids in enumerate(ordered):
        d, side, cell, negbits, prank = face_ids[ids]
        idx = d * 2 + side
        for c in cell:
            idx = idx * K + c
        for b in negbits:
            idx = idx * 2 + b
        table[idx * fct + prank] = sid
    if np.any(table < 0):
        raise RuntimeError("internal error: locate table not filled")

    return FanTriangulation(
        n=n,
        K=K,
        vertices=vertices,
        simplices=simplices,
        points=points,
        simplex_vertex_ids=np.array(ordered, dtype=np.int64),
        X_all=X_all,
        X_inv_all=X_inv_all,
        _locate_table=table,
    )
