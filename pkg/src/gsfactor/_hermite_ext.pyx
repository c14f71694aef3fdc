# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Hermite-function kernels (same contract as ``_hermite_py``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs, M_PI, pow

cnp.import_array()

cdef double SCALED_CUTOFF = 20.0
cdef double RESCALE = 1e150


def hermite_table(int n_max, x_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64).ravel()
    cdef Py_ssize_t m = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n_max + 1, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.empty(n_max + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(n_max + 1)
    cdef double pim14 = pow(M_PI, -0.25)
    cdef double xi, prev, cur, nxt, logscale, f
    cdef Py_ssize_t i
    cdef int n
    for n in range(n_max + 1):
        a[n] = sqrt(2.0 / (n + 1))
        b[n] = sqrt(n / (n + 1.0))
    for i in range(m):
        xi = x[i]
        if fabs(xi) <= SCALED_CUTOFF:
            prev = 0.0
            cur = pim14 * exp(-0.5 * xi * xi)
            out[0, i] = cur
            for n in range(n_max):
                nxt = a[n] * xi * cur - b[n] * prev
                prev = cur
                cur = nxt
                out[n + 1, i] = cur
        else:
            logscale = -0.5 * xi * xi
            prev = 0.0
            cur = pim14
            out[0, i] = cur * exp(logscale)
            for n in range(n_max):
                nxt = a[n] * xi * cur - b[n] * prev
                if fabs(nxt) > RESCALE:
                    f = fabs(nxt)
                    nxt /= f
                    cur /= f
                    logscale += log(f)
                prev = cur
                cur = nxt
                if cur == 0.0:
                    out[n + 1, i] = 0.0
                elif cur > 0.0:
                    out[n + 1, i] = exp(log(cur) + logscale)
                else:
                    out[n + 1, i] = -exp(log(-cur) + logscale)
    return out


def inv_christoffel(int n, x_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64).ravel()
    cdef Py_ssize_t m = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m)
    cdef double pim14 = pow(M_PI, -0.25)
    cdef double xi, prev, cur, nxt, acc
    cdef Py_ssize_t i
    cdef int k
    for i in range(m):
        xi = x[i]
        prev = 0.0
        cur = pim14
        acc = cur * cur
        for k in range(n - 1):
            nxt = sqrt(2.0 / (k + 1)) * xi * cur - sqrt(k / (k + 1.0)) * prev
            prev = cur
            cur = nxt
            acc += cur * cur
        out[i] = 1.0 / acc
    return out
