# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled jet convolution kernels.

Same contract as ``_kernels_py``: walk the first ``nrows`` entries of the
multiplication table and accumulate coefficient products into ``out``.
Input buffers are const so frozen (read-only) coefficient arrays pass
without a copy.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv_scalar(const double[::1] a, const double[::1] b, double[::1] out,
                const int[::1] tab_ia, const int[::1] tab_ib,
                const int[::1] tab_io, Py_ssize_t nrows):
    cdef Py_ssize_t r
    for r in range(nrows):
        out[tab_io[r]] += a[tab_ia[r]] * b[tab_ib[r]]


def conv_batch(const double[:, ::1] a, const double[:, ::1] b,
               double[:, ::1] out,
               const int[::1] tab_ia, const int[::1] tab_ib,
               const int[::1] tab_io, Py_ssize_t nrows):
    cdef Py_ssize_t r, k, m = a.shape[1]
    cdef Py_ssize_t ia, ib, io
    for r in range(nrows):
        ia = tab_ia[r]
        ib = tab_ib[r]
        io = tab_io[r]
        for k in range(m):
            out[io, k] += a[ia, k] * b[ib, k]
