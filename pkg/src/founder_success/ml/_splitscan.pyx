# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split-scan kernels.

Both functions walk each pre-sorted column once, accumulating left-side
statistics in row order, and return the best (column, left size, score).
The arithmetic mirrors ``_splitscan_py`` operation for operation so the two
implementations pick identical splits.
"""

from libc.math cimport INFINITY


def scan_gini(const double[:, ::1] xs, const double[:, ::1] ys, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = xs.shape[0], k = xs.shape[1]
    cdef Py_ssize_t i, j, best_col = -1, best_pos = 0
    cdef double best = -INFINITY, acc, tot, nl, nr, negl, pr, negr, s
    if min_leaf < 1:
        min_leaf = 1
    with nogil:
        for j in range(k):
            tot = 0.0
            for i in range(n):
                tot = tot + ys[i, j]
            acc = 0.0
            for i in range(1, n):
                acc = acc + ys[i - 1, j]
                if i < min_leaf or i > n - min_leaf:
                    continue
                if not (xs[i - 1, j] < xs[i, j]):
                    continue
                nl = <double>i
                nr = <double>n - nl
                negl = nl - acc
                pr = tot - acc
                negr = nr - pr
                s = (acc * acc + negl * negl) / nl + (pr * pr + negr * negr) / nr
                if s > best:
                    best = s
                    best_col = j
                    best_pos = i
    return best_col, best_pos, best


def scan_newton(
    const double[:, ::1] xs,
    const double[:, ::1] gs,
    const double[:, ::1] hs,
    double lam,
    Py_ssize_t min_leaf,
):
    cdef Py_ssize_t n = xs.shape[0], k = xs.shape[1]
    cdef Py_ssize_t i, j, best_col = -1, best_pos = 0
    cdef double best = -INFINITY, gl, hl, gt, ht, gr, hr, s
    if min_leaf < 1:
        min_leaf = 1
    with nogil:
        for j in range(k):
            gt = 0.0
            ht = 0.0
            for i in range(n):
                gt = gt + gs[i, j]
                ht = ht + hs[i, j]
            gl = 0.0
            hl = 0.0
            for i in range(1, n):
                gl = gl + gs[i - 1, j]
                hl = hl + hs[i - 1, j]
                if i < min_leaf or i > n - min_leaf:
                    continue
                if not (xs[i - 1, j] < xs[i, j]):
                    continue
                gr = gt - gl
                hr = ht - hl
                s = gl * gl / (hl + lam) + gr * gr / (hr + lam)
                if s > best:
                    best = s
                    best_col = j
                    best_pos = i
    return best_col, best_pos, best
