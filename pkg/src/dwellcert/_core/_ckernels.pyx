# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the simplex inner loop.

Same contracts as _pykernels.py; see there for the semantics.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def ftran_etas(double[:, ::1] vecs, long long[::1] pos, double[::1] piv,
               double[::1] z):
    cdef Py_ssize_t k, i, p, n = z.shape[0], m = piv.shape[0]
    cdef double zp
    for k in range(m):
        p = pos[k]
        zp = z[p] / piv[k]
        if zp != 0.0:
            for i in range(n):
                z[i] -= zp * vecs[k, i]
        z[p] = zp


def btran_etas(double[:, ::1] vecs, long long[::1] pos, double[::1] piv,
               double[::1] y):
    cdef Py_ssize_t k, i, p, n = y.shape[0], m = piv.shape[0]
    cdef double s
    for k in range(m - 1, -1, -1):
        p = pos[k]
        s = 0.0
        for i in range(n):
            s += vecs[k, i] * y[i]
        s -= vecs[k, p] * y[p]
        y[p] = (y[p] - s) / piv[k]


def harris_ratio(double[::1] xb, double[::1] w, double feas_tol,
                 double pivot_tol):
    cdef Py_ssize_t i, n = w.shape[0], best = -1
    cdef double tmax = np.inf, r, t, wbest = 0.0
    for i in range(n):
        if w[i] > pivot_tol:
            r = (xb[i] + feas_tol) / w[i]
            if r < tmax:
                tmax = r
    if tmax == np.inf:
        return np.inf, -1
    for i in range(n):
        if w[i] > pivot_tol and xb[i] <= tmax * w[i]:
            if w[i] > wbest:
                wbest = w[i]
                best = i
    t = xb[best] / w[best]
    if t < 0.0:
        t = 0.0
    return t, best
