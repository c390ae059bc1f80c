# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; drop-in replacements for ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2

cnp.import_array()

DEF MAX_SYSTEMS = 24
cdef long long _BUFFER_LIMIT = 1 << 26


def subset_entropies(outcomes, probs, radices):
    cdef cnp.int64_t[:, ::1] outc = np.ascontiguousarray(outcomes, dtype=np.int64)
    cdef double[::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef cnp.int64_t[::1] rad = np.ascontiguousarray(radices, dtype=np.int64)
    cdef Py_ssize_t n = rad.shape[0]
    cdef Py_ssize_t natoms = outc.shape[0]
    if n > MAX_SYSTEMS:
        raise ValueError("too many systems for the compiled kernel")
    cdef long long total = 1
    cdef Py_ssize_t i
    for i in range(n):
        total *= rad[i]
        if total > _BUFFER_LIMIT:
            raise ValueError("joint alphabet too large for the compiled kernel")
    out_arr = np.zeros(1 << n)
    buf_arr = np.zeros(total)
    cdef double[::1] out = out_arr
    cdef double[::1] buf = buf_arr
    cdef long long stride[MAX_SYSTEMS]
    cdef int members[MAX_SYSTEMS]
    cdef int nm
    cdef long long size, idx, j
    cdef long mask
    cdef Py_ssize_t a
    cdef double h, p
    for mask in range(1, 1 << n):
        size = 1
        nm = 0
        for i in range(n):
            if (mask >> i) & 1:
                members[nm] = <int>i
                stride[nm] = size
                size *= rad[i]
                nm += 1
        for j in range(size):
            buf[j] = 0.0
        for a in range(natoms):
            idx = 0
            for i in range(nm):
                idx += outc[a, members[i]] * stride[i]
            buf[idx] += pr[a]
        h = 0.0
        for j in range(size):
            p = buf[j]
            if p > 0.0:
                h -= p * log2(p)
        out[mask] = h
    return out_arr
