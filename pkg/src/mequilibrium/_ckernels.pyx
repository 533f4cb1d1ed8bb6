# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in :mod:`mequilibrium.kernels`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def lloyd(double[:, ::1] points, double[:, ::1] init, int max_iter=300):
    """Lloyd iterations from `init`; returns (centroids, labels, error, history)."""
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1], k = init.shape[0]
    cdef Py_ssize_t i, j, c, best, far, it
    cdef double dist, bestd, diff, err, fard
    cent_arr = np.array(init, dtype=np.float64, copy=True)
    cdef double[:, ::1] cent = cent_arr
    labels_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] labels = labels_arr
    mind_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] mind = mind_arr
    sums_arr = np.zeros((k, d), dtype=np.float64)
    cdef double[:, ::1] sums = sums_arr
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    history = []
    cdef bint changed
    for it in range(max_iter):
        changed = False
        err = 0.0
        for i in range(n):
            best = 0
            bestd = 1e300
            for c in range(k):
                dist = 0.0
                for j in range(d):
                    diff = points[i, j] - cent[c, j]
                    dist += diff * diff
                if dist < bestd:
                    bestd = dist
                    best = c
            mind[i] = bestd
            err += bestd
            if labels[i] != best:
                labels[i] = best
                changed = True
        history.append(err)
        if not changed and it > 0:
            break
        for c in range(k):
            counts[c] = 0
            for j in range(d):
                sums[c, j] = 0.0
        for i in range(n):
            c = labels[i]
            counts[c] += 1
            for j in range(d):
                sums[c, j] += points[i, j]
        for c in range(k):
            if counts[c] > 0:
                for j in range(d):
                    cent[c, j] = sums[c, j] / counts[c]
            else:
                far = 0
                fard = -1.0
                for i in range(n):
                    if mind[i] > fard:
                        fard = mind[i]
                        far = i
                for j in range(d):
                    cent[c, j] = points[far, j]
                mind[far] = 0.0
                labels[far] = c
    err = 0.0
    for i in range(n):
        c = labels[i]
        dist = 0.0
        for j in range(d):
            diff = points[i, j] - cent[c, j]
            dist += diff * diff
        err += dist
    return cent_arr, labels_arr, err, np.array(history)


def order_codes(double[:, ::1] values, double eps):
    """Lehmer code of the ascending order of each row, or -1 when two entries tie."""
    cdef Py_ssize_t n = values.shape[0], m = values.shape[1], i, a, b
    out_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef cnp.int64_t code, smaller
    cdef double va, vb, scale
    cdef bint tie
    for i in range(n):
        code = 0
        tie = False
        for a in range(m):
            va = values[i, a]
            smaller = 0
            for b in range(m):
                if a == b:
                    continue
                vb = values[i, b]
                scale = 1.0
                if fabs(va) > scale:
                    scale = fabs(va)
                if fabs(vb) > scale:
                    scale = fabs(vb)
                if fabs(va - vb) <= eps * scale:
                    tie = True
                    break
            if tie:
                break
        if tie:
            out[i] = -1
            continue
        # rank of each position; Lehmer digits of the sorting permutation
        out[i] = _lehmer(values[i])
    return out_arr


cdef cnp.int64_t _lehmer(double[:] row):
    cdef Py_ssize_t m = row.shape[0], p, q, a
    cdef cnp.int64_t code = 0, smaller
    cdef Py_ssize_t order[16]
    cdef Py_ssize_t used[16]
    cdef double best
    cdef Py_ssize_t bi
    for a in range(m):
        used[a] = 0
    for p in range(m):
        best = 1e300
        bi = -1
        for a in range(m):
            if not used[a] and (bi < 0 or row[a] < best):
                best = row[a]
                bi = a
        used[bi] = 1
        order[p] = bi
    for p in range(m):
        smaller = 0
        for q in range(p + 1, m):
            if order[q] < order[p]:
                smaller += 1
        code = code * (m - p) + smaller
    return code
