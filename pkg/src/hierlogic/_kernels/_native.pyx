# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the inference hot paths.

Same interface and semantics as the NumPy backend, with the per-node work
fused into C loops (contiguous over the pixel axis) to avoid temporaries.
"""

from libc.math cimport exp
from libc.stdint cimport int64_t

import numpy as np

NAME = "native"

E_PER_SOURCE = 0
E_POOLED = 1


def raw_update(double[:, ::1] values,
               int64_t[::1] parent_index,
               int64_t[::1] nonleaf_ids,
               int64_t[::1] child_order,
               int64_t[::1] child_starts,
               int64_t[::1] child_counts,
               int64_t[::1] parent_rank,
               int64_t[::1] level_starts,
               int64_t[::1] level_sizes,
               int e_variant):
    cdef Py_ssize_t k = values.shape[1]
    out_arr = np.asarray(values).copy()
    cdef double[:, ::1] out = out_arr

    scratch_a = np.empty(k)
    scratch_b = np.empty(k)
    scratch_c = np.empty(k)
    cdef double[::1] csum = scratch_a
    cdef double[::1] maxc = scratch_b
    cdef double[::1] down = scratch_c

    cdef Py_ssize_t i, ci, j, lv
    cdef int64_t p, c, v, lo, hi, start, n
    cdef double sc, sv, he, m, inv

    # Upward (child -> parent) and downward (parent -> child) terms, one
    # parent at a time; children are contiguous in child_order.
    for i in range(nonleaf_ids.shape[0]):
        p = nonleaf_ids[i]
        lo = child_starts[i]
        hi = child_starts[i + 1]
        for j in range(k):
            csum[j] = 0.0
            maxc[j] = 0.0
        for ci in range(lo, hi):
            c = child_order[ci]
            for j in range(k):
                sc = values[c, j]
                csum[j] += sc * (1.0 - sc + sc * values[p, j])
                if sc > maxc[j]:
                    maxc[j] = sc
        inv = 1.0 / <double>(hi - lo)
        for j in range(k):
            sv = values[p, j]
            out[p, j] += csum[j] * inv
            down[j] = sv * (1.0 - sv + sv * maxc[j])
        for ci in range(lo, hi):
            c = child_order[ci]
            for j in range(k):
                out[c, j] += down[j]

    # Exclusion term, per level block.  csum doubles as the level sum and
    # down as the per-source aggregate.
    for lv in range(level_starts.shape[0]):
        start = level_starts[lv]
        n = level_sizes[lv]
        if n < 2:
            continue
        m = <double>(n - 1)
        for j in range(k):
            csum[j] = 0.0
        for v in range(start, start + n):
            for j in range(k):
                csum[j] += values[v, j]
        if e_variant == 0:
            for j in range(k):
                down[j] = 0.0
            for v in range(start, start + n):
                for j in range(k):
                    sv = values[v, j]
                    he = -(1.0 - sv * (csum[j] - sv) / m)
                    down[j] += sv * he
            for v in range(start, start + n):
                for j in range(k):
                    sv = values[v, j]
                    he = -(1.0 - sv * (csum[j] - sv) / m)
                    out[v, j] += (down[j] - sv * he) / m
        else:
            for v in range(start, start + n):
                for j in range(k):
                    sv = values[v, j]
                    he = -(1.0 - sv * (csum[j] - sv) / m)
                    out[v, j] += he * (csum[j] - sv) / m
    return out_arr


def level_softmax(double[:, ::1] values,
                  int64_t[::1] level_starts,
                  int64_t[::1] level_sizes):
    cdef Py_ssize_t k = values.shape[1]
    out_arr = np.empty((values.shape[0], k))
    cdef double[:, ::1] out = out_arr
    scratch_a = np.empty(k)
    scratch_b = np.empty(k)
    cdef double[::1] mx = scratch_a
    cdef double[::1] den = scratch_b
    cdef Py_ssize_t lv, j
    cdef int64_t start, n, v
    cdef double x
    for lv in range(level_starts.shape[0]):
        start = level_starts[lv]
        n = level_sizes[lv]
        for j in range(k):
            mx[j] = values[start, j]
            den[j] = 0.0
        for v in range(start + 1, start + n):
            for j in range(k):
                if values[v, j] > mx[j]:
                    mx[j] = values[v, j]
        for v in range(start, start + n):
            for j in range(k):
                x = exp(values[v, j] - mx[j])
                out[v, j] = x
                den[j] += x
        for v in range(start, start + n):
            for j in range(k):
                out[v, j] /= den[j]
    return out_arr


def decode(double[:, ::1] values,
           int64_t[::1] parent_index,
           int64_t[::1] level_starts,
           int64_t[::1] level_sizes):
    cdef Py_ssize_t size = values.shape[0]
    cdef Py_ssize_t k = values.shape[1]
    cdef Py_ssize_t num_levels = level_starts.shape[0]
    cum_arr = np.empty((size, k))
    cdef double[:, ::1] cum = cum_arr
    cdef Py_ssize_t j
    cdef int64_t v, lv, start, end, top, n1
    top = level_starts[num_levels - 1]
    for v in range(top, size):
        for j in range(k):
            cum[v, j] = values[v, j]
    for lv in range(num_levels - 2, -1, -1):
        start = level_starts[lv]
        end = start + level_sizes[lv]
        for v in range(start, end):
            for j in range(k):
                cum[v, j] = values[v, j] + cum[parent_index[v], j]
    leaf_arr = np.zeros(k, dtype=np.int64)
    score_arr = np.empty(k)
    cdef int64_t[::1] leaf = leaf_arr
    cdef double[::1] score = score_arr
    n1 = level_sizes[0]
    for j in range(k):
        score[j] = cum[0, j]
    for v in range(1, n1):
        for j in range(k):
            if cum[v, j] > score[j]:
                score[j] = cum[v, j]
                leaf[j] = v
    return leaf_arr, score_arr
