# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, floor, INFINITY

cnp.import_array()


class BudgetExceeded(RuntimeError):
    pass


def min_abs_dot(X, N):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] nn = np.ascontiguousarray(N, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], m = nn.shape[0], i, j, k
    best_arr = np.full(n, np.inf)
    arg_arr = np.full(n, -1, dtype=np.intp)
    cdef double[::1] best = best_arr
    cdef Py_ssize_t[::1] arg = arg_arr
    cdef double v, b, x0, x1, x2
    for i in range(n):
        x0 = -x[i, 0]
        x1 = x[i, 1]
        x2 = x[i, 2]
        b = INFINITY
        k = -1
        for j in range(m):
            v = fabs(x0 * nn[j, 0] + x1 * nn[j, 1] + x2 * nn[j, 2])
            if v < b:
                b = v
                k = j
        best[i] = b
        arg[i] = k
    return best_arr, arg_arr


cdef inline void _mul3(double[:, :, ::1] out, Py_ssize_t o, double[:, :, ::1] a, Py_ssize_t ia,
                       double[:, :, ::1] b, Py_ssize_t ib) nogil:
    cdef Py_ssize_t r, c
    for r in range(3):
        for c in range(3):
            out[o, r, c] = a[ia, r, 0] * b[ib, 0, c] + a[ia, r, 1] * b[ib, 1, c] + a[ia, r, 2] * b[ib, 2, c]


def ball_bfs(pairings, center, double cosh_radius, double cell, long budget):
    cdef double[:, :, ::1] pair = np.ascontiguousarray(pairings, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t k = pair.shape[0], cap = 1024, total = 1, head = 0, s, o
    mats_arr = np.empty((cap, 3, 3))
    parent_arr = np.empty(cap, dtype=np.intp)
    via_arr = np.empty(cap, dtype=np.intp)
    cdef double[:, :, ::1] mats = mats_arr
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef Py_ssize_t[::1] via = via_arr
    tmp_arr = np.empty((1, 3, 3))
    cdef double[:, :, ::1] tmp = tmp_arr
    cdef double val, px, py
    cdef long ix, iy, dx, dy
    cdef bint dup
    seen = {}
    mats[0, :, :] = 0.0
    mats[0, 0, 0] = 1.0
    mats[0, 1, 1] = 1.0
    mats[0, 2, 2] = 1.0
    parent[0] = -1
    via[0] = -1
    seen[(0, 0)] = 0
    while head < total:
        for s in range(k):
            _mul3(tmp, 0, mats, head, pair, s)
            val = c[0] * tmp[0, 0, 0] - c[1] * tmp[0, 1, 0] - c[2] * tmp[0, 2, 0]
            if val > cosh_radius:
                continue
            px = tmp[0, 1, 0] / cell
            py = tmp[0, 2, 0] / cell
            ix = <long>floor(px + 0.5)
            iy = <long>floor(py + 0.5)
            dup = False
            for dx in range(-1, 2):
                for dy in range(-1, 2):
                    if (ix + dx, iy + dy) in seen:
                        dup = True
                        break
                if dup:
                    break
            if dup:
                continue
            if total >= budget:
                raise BudgetExceeded("enumeration budget exceeded")
            if total == cap:
                cap *= 2
                mats_arr = np.concatenate([mats_arr, np.empty_like(mats_arr)])
                parent_arr = np.concatenate([parent_arr, np.empty_like(parent_arr)])
                via_arr = np.concatenate([via_arr, np.empty_like(via_arr)])
                mats = mats_arr
                parent = parent_arr
                via = via_arr
            o = total
            mats[o, :, :] = tmp[0, :, :]
            parent[o] = head
            via[o] = s
            seen[(ix, iy)] = o
            total += 1
        head += 1
    return mats_arr[:total].copy(), parent_arr[:total].copy(), via_arr[:total].copy()
