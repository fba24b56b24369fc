# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled truncated-product kernel.

Same contract as the numpy fallback: accumulate a[:, i]*b[:, j] into
out[:, k] over the precomputed triple table.  The table is sorted by k, which
keeps the writes to each output column contiguous in the outer loop.
"""


def mul_into(double[:, ::1] a, double[:, ::1] b, double[:, ::1] out,
             Py_ssize_t[::1] ii, Py_ssize_t[::1] jj, Py_ssize_t[::1] kk,
             Py_ssize_t[::1] starts):
    cdef Py_ssize_t npts = a.shape[0]
    cdef Py_ssize_t npairs = ii.shape[0]
    cdef Py_ssize_t p, t, i, j, k
    out[:, :] = 0.0
    for p in range(npairs):
        i = ii[p]
        j = jj[p]
        k = kk[p]
        for t in range(npts):
            out[t, k] += a[t, i] * b[t, j]
