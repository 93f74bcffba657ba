# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled integer kernels for brute-force information matrices and orbit census."""
import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()


# Above this many profiles the dense Laplacian gets too large; loop over pairs instead.
cdef Py_ssize_t LAPLACIAN_MAX_ROWS = 1024


def pair_gram(const signed char[:, ::1] codes, const long long[::1] first,
              const long long[::1] second):
    """Integer sum of difference-vector outer products over the listed pairs."""
    if codes.shape[0] <= LAPLACIAN_MAX_ROWS:
        return _gram_laplacian(codes, first, second)
    return _gram_direct(codes, first, second)


cdef _gram_laplacian(const signed char[:, ::1] codes, const long long[::1] first,
                     const long long[::1] second):
    # sum (c_i - c_j)(c_i - c_j)^T = C^T L C with L the pair-count Laplacian
    cdef Py_ssize_t n = first.shape[0]
    cdef Py_ssize_t m = codes.shape[0]
    cdef Py_ssize_t p = codes.shape[1]
    cdef Py_ssize_t t, r, k, a, b
    cdef long long i, j, lrk, acc
    lap_arr = np.zeros((m, m), dtype=np.int64)
    lc_arr = np.zeros((m, p), dtype=np.int64)
    gram = np.zeros((p, p), dtype=np.int64)
    cdef long long[:, ::1] lap = lap_arr
    cdef long long[:, ::1] lc = lc_arr
    cdef long long[:, ::1] g = gram
    for t in range(n):
        i = first[t]
        j = second[t]
        lap[i, i] += 1
        lap[j, j] += 1
        lap[i, j] -= 1
        lap[j, i] -= 1
    for r in range(m):
        for k in range(m):
            lrk = lap[r, k]
            if lrk != 0:
                for a in range(p):
                    lc[r, a] += lrk * codes[k, a]
    for a in range(p):
        for b in range(a, p):
            acc = 0
            for r in range(m):
                acc += codes[r, a] * lc[r, b]
            g[a, b] = acc
            g[b, a] = acc
    return gram


cdef _gram_direct(const signed char[:, ::1] codes, const long long[::1] first,
                  const long long[::1] second):
    cdef Py_ssize_t n = first.shape[0]
    cdef Py_ssize_t p = codes.shape[1]
    cdef Py_ssize_t t, c, a, b, nnz, ca
    cdef long long i, j
    cdef int da
    gram = np.zeros((p, p), dtype=np.int64)
    cdef long long[:, ::1] g = gram
    cdef int* diff = <int*> malloc(p * sizeof(int))
    cdef Py_ssize_t* nz = <Py_ssize_t*> malloc(p * sizeof(Py_ssize_t))
    if diff == NULL or nz == NULL:
        free(diff)
        free(nz)
        raise MemoryError()
    try:
        for t in range(n):
            i = first[t]
            j = second[t]
            nnz = 0
            for c in range(p):
                diff[c] = codes[i, c] - codes[j, c]
                if diff[c] != 0:
                    nz[nnz] = c
                    nnz += 1
            for a in range(nnz):
                ca = nz[a]
                da = diff[ca]
                for b in range(a, nnz):
                    g[ca, nz[b]] += da * diff[nz[b]]
    finally:
        free(diff)
        free(nz)
    for a in range(p):
        for b in range(a + 1, p):
            g[b, a] = g[a, b]
    return gram


def column_nonzero_counts(const signed char[:, ::1] codes, const long long[::1] first,
                          const long long[::1] second):
    """Per column, the number of pairs whose difference vector is nonzero there."""
    cdef Py_ssize_t n = first.shape[0]
    cdef Py_ssize_t p = codes.shape[1]
    cdef Py_ssize_t t, c
    cdef long long i, j
    counts = np.zeros(p, dtype=np.int64)
    cdef long long[::1] out = counts
    for t in range(n):
        i = first[t]
        j = second[t]
        for c in range(p):
            if codes[i, c] != codes[j, c]:
                out[c] += 1
    return counts
