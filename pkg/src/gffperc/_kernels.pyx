# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: union-find cluster labeling and bridge-path scanning.

Both functions have pure-NumPy twins in ``_kernels_py`` that consume the same
pre-generated random buffers in the same order, so results are identical
across backends.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt

cnp.import_array()

BACKEND = "cython"


cdef inline int _find(int* parent, int i) nogil:
    while parent[i] != i:
        parent[i] = parent[parent[i]]  # path halving
        i = parent[i]
    return i


def cluster_labels(int n, cnp.int32_t[::1] eu, cnp.int32_t[::1] ev,
                   cnp.uint8_t[::1] open_mask):
    """Union-find roots for the subgraph of the open edges.

    Returns an int32 array ``labels`` of length ``n`` with ``labels[x]`` the
    root representative of the cluster containing ``x``.
    """
    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent_arr = np.arange(n, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] size_arr = np.ones(n, dtype=np.int32)
    cdef int* parent = <int*> cnp.PyArray_DATA(parent_arr)
    cdef int* size = <int*> cnp.PyArray_DATA(size_arr)
    cdef Py_ssize_t m = eu.shape[0]
    cdef Py_ssize_t k
    cdef int ru, rv, i
    with nogil:
        for k in range(m):
            if open_mask[k]:
                ru = _find(parent, eu[k])
                rv = _find(parent, ev[k])
                if ru != rv:
                    if size[ru] < size[rv]:
                        ru, rv = rv, ru
                    parent[rv] = ru
                    size[ru] += size[rv]
        for i in range(n):
            parent[i] = _find(parent, i)
    return parent_arr


def bridge_survival(cnp.float64_t[:, ::1] normals, cnp.float64_t[::1] unif,
                    double a, double b, double h, bint exact_min):
    """Survival indicators for Brownian bridges from ``a`` to ``b``.

    Row ``r`` of ``normals`` supplies the i.i.d. standard normal increments
    of one bridge on a grid of ``steps`` intervals over [0, 1] with variance
    parameter 1.  A run survives when the bridge stays at or above ``h``:
    on the grid alone when ``exact_min`` is false, or — using the known
    dip probability of each sub-interval given its endpoints, thinned by one
    uniform per run — for the continuum path when ``exact_min`` is true.
    """
    cdef Py_ssize_t runs = normals.shape[0]
    cdef Py_ssize_t steps = normals.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out_arr = np.zeros(runs, dtype=np.uint8)
    cdef cnp.uint8_t* out = <cnp.uint8_t*> cnp.PyArray_DATA(out_arr)
    cdef double scale = sqrt(1.0 / steps)
    cdef Py_ssize_t r, j
    cdef double wsum, wn, w, t, x, u, prev, logsurv
    cdef bint alive
    if a < h or b < h:
        return out_arr
    with nogil:
        for r in range(runs):
            wsum = 0.0
            for j in range(steps):
                wsum += normals[r, j]
            wn = wsum * scale
            alive = True
            logsurv = 0.0
            prev = a - h
            wsum = 0.0
            for j in range(1, steps + 1):
                wsum += normals[r, j - 1]
                w = wsum * scale
                t = (<double> j) / (<double> steps)
                x = a + (b - a) * t + w - t * wn
                u = x - h
                if u < 0.0:
                    alive = False
                    break
                if exact_min:
                    logsurv += log1p(-exp(-2.0 * steps * prev * u))
                prev = u
            if alive and (not exact_min or log(unif[r]) < logsurv):
                out[r] = 1
    return out_arr
