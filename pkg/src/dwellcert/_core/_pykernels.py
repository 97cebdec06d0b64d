"""Pure-Python (numpy) kernels for the simplex inner loop.

Reference semantics for the compiled versions in _ckernels.pyx; the two
implementations must produce bit-identical results.
"""

from __future__ import annotations

import numpy as np


def ftran_etas(vecs: np.ndarray, pos: np.ndarray, piv: np.ndarray,
               z: np.ndarray) -> None:
    """Apply the stored eta transforms to z in order, in place.

    Eta k records a basis change B -> B * (I + (w - e_p) e_p^T) with
    w = vecs[k] (pivot entry included) and p = pos[k], piv[k] = w[p].
    """
    for k in range(len(piv)):
        p = pos[k]
        zp = z[p] / piv[k]
        if zp != 0.0:
            z -= zp * vecs[k]
        z[p] = zp


def btran_etas(vecs: np.ndarray, pos: np.ndarray, piv: np.ndarray,
               y: np.ndarray) -> None:
    """Apply the transposed eta inverses to y in reverse order, in place."""
    for k in range(len(piv) - 1, -1, -1):
        p = pos[k]
        v = vecs[k]
        s = float(v @ y) - v[p] * y[p]
        y[p] = (y[p] - s) / piv[k]


def harris_ratio(xb: np.ndarray, w: np.ndarray, feas_tol: float,
                 pivot_tol: float) -> tuple[float, int]:
    """Two-pass ratio test with a feasibility-tolerance relaxation.

    Pass 1 bounds the step by min (xb+feas_tol)/w over w > pivot_tol;
    pass 2 picks, among rows whose exact ratio is within that bound, the
    one with the largest pivot (ties to the lowest index).  Returns
    (step, index); index -1 means the step is unbounded.
    """
    elig = w > pivot_tol
    if not np.any(elig):
        return np.inf, -1
    idx = np.nonzero(elig)[0]
    we = w[idx]
    xe = xb[idx]
    tmax = np.min((xe + feas_tol) / we)
    ok = xe <= tmax * we
    cand = idx[ok]
    best = cand[np.argmax(w[cand])]
    t = xb[best] / w[best]
    return (t if t > 0.0 else 0.0), int(best)
