# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan of Hamming distances between an observation and trajectory codewords."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def scan_patterns(const cnp.uint8_t[:, ::1] E, const cnp.int32_t[:, ::1] patterns):
    """Distances for every (pattern, shift) entry.

    ``E[n, m]`` is 1 when codebook bit (m, n) disagrees with observation n.
    Entry ``k = p * M + u`` reads bin ``(patterns[p, n] + u) % M`` at time n.
    Returns ``(best_k, best_d, second_d, hist)`` where ``second_d`` is the
    smallest distance over all other entries (``-1`` for a single entry) and
    ``hist[d]`` counts entries at distance d.
    """
    cdef Py_ssize_t N = E.shape[0]
    cdef Py_ssize_t M = E.shape[1]
    cdef Py_ssize_t P = patterns.shape[0]
    if patterns.shape[1] != N:
        raise ValueError("pattern length does not match observation length")
    cdef cnp.int32_t[::1] acc = np.zeros(M, dtype=np.int32)
    hist_arr = np.zeros(N + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] hist = hist_arr
    cdef Py_ssize_t p, n, u, off
    cdef const cnp.uint8_t* row
    cdef cnp.int32_t d
    cdef cnp.int32_t best = N + 1
    cdef cnp.int32_t second = N + 1
    cdef Py_ssize_t best_k = -1
    for p in range(P):
        for u in range(M):
            acc[u] = 0
        for n in range(N):
            off = patterns[p, n]
            row = &E[n, 0]
            for u in range(M - off):
                acc[u] += row[u + off]
            for u in range(M - off, M):
                acc[u] += row[u + off - M]
        for u in range(M):
            d = acc[u]
            hist[d] += 1
            if d < best:
                second = best
                best = d
                best_k = p * M + u
            elif d < second:
                second = d
    if P * M == 1:
        second = -1
    return best_k, best, second, hist_arr
