# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled MinHash signature kernel (drop-in for minhash_py)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.uint64_t u64


def minhash_signature_kernel(cnp.ndarray[u64, ndim=1] shingle_hashes,
                             cnp.ndarray[u64, ndim=1] a,
                             cnp.ndarray[u64, ndim=1] b):
    cdef Py_ssize_t n = shingle_hashes.shape[0]
    cdef Py_ssize_t num_perm = a.shape[0]
    if n == 0:
        raise ValueError("no shingle hashes")
    cdef cnp.ndarray[u64, ndim=1] out = np.full(num_perm, <u64>0xFFFFFFFFFFFFFFFF,
                                                dtype=np.uint64)
    cdef Py_ssize_t i, j
    cdef u64 h, best, ai, bi
    for i in range(num_perm):
        ai = a[i]
        bi = b[i]
        best = <u64>0xFFFFFFFFFFFFFFFF
        for j in range(n):
            h = ai * shingle_hashes[j] + bi
            if h < best:
                best = h
        out[i] = best
    return out
