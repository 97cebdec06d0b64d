"""Independent brute-force oracles used by the test suite.

These deliberately avoid the library's construction paths: the surface
enumeration walks the full reflected standard grid subdivision, and the
polygon area below is a plain shoelace sum.
"""

from __future__ import annotations

import math
from itertools import combinations, permutations, product

import numpy as np


def reflect(coords, J):
    return tuple(-c if i in J else c for i, c in enumerate(coords))


def boundary_faces_bruteforce(n: int, K: int) -> set[tuple[tuple[int, ...], ...]]:
    """All cube-surface (n-1)-simplices of the radius-K grid subdivision.

    Enumerates every grid simplex (base point z, sign set J, permutation
    rho), keeps the ones with exactly one vertex of max-norm < K and n
    vertices of max-norm K, and collects those n vertices (sorted, as a
    deduplicated set of faces).  Also asserts that the interior vertex is
    always the base vertex.
    """
    faces = set()
    subsets = [frozenset(s) for r in range(n + 1)
               for s in combinations(range(n), r)]
    for z in product(range(K), repeat=n):
        for rho in permutations(range(n)):
            verts = [list(z)]
            for step in rho:
                nxt = list(verts[-1])
                nxt[step] += 1
                verts.append(nxt)
            norms = [max(abs(c) for c in v) for v in verts]
            inner = [j for j, nm in enumerate(norms) if nm < K]
            if len(inner) != 1 or any(nm > K for nm in norms):
                continue
            assert inner == [0], "interior vertex must be the base vertex"
            for J in subsets:
                face = tuple(sorted(reflect(tuple(v), J) for v in verts[1:]))
                faces.add(face)
    return faces


def polygon_area(points: np.ndarray) -> float:
    """Shoelace area of the polygon with the given 2D vertices (convex,
    centered at the origin; sorted here by angle)."""
    ang = np.arctan2(points[:, 1], points[:, 0])
    p = points[np.argsort(ang)]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def expm_series(A: np.ndarray, tol: float = 1e-18) -> np.ndarray:
    """Matrix exponential by direct Taylor summation (oracle use only;
    adequate for the moderate norms exercised in tests)."""
    n = A.shape[0]
    term = np.eye(n)
    total = np.eye(n)
    for k in range(1, 200):
        term = term @ A / k
        total = total + term
        if np.abs(term).max() <= tol * max(1.0, np.abs(total).max()):
            break
    return total


def factorial(k: int) -> int:
    return math.factorial(k)
