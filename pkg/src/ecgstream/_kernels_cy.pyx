# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled streaming kernels.

Each kernel advances an explicit state so that processing a signal in
arbitrary chunks is bit-identical to processing it in one call: every
output sample is computed from the same values in the same arithmetic
order regardless of where chunk boundaries fall.
"""

import numpy as np

from libc.math cimport fabs

name = "compiled"


def fir_init(taps):
    """Delay line holding the last len(taps)-1 inputs, oldest first."""
    return np.zeros(len(taps) - 1, dtype=np.float64)


def fir_push(taps, state, x):
    """Direct-form FIR over [state | x]; mutates state to the new tail."""
    cdef double[::1] tv = np.ascontiguousarray(taps, dtype=np.float64)
    cdef double[::1] hist = state
    x = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = x
    cdef Py_ssize_t fl = tv.shape[0]
    cdef Py_ssize_t m = hist.shape[0]
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty(n, dtype=np.float64)
    buf = np.empty(m + n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double[::1] bv = buf
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(m):
        bv[i] = hist[i]
    for i in range(n):
        bv[m + i] = xv[i]
    for i in range(n):
        acc = 0.0
        for k in range(fl):
            acc += tv[k] * bv[m + i - k]
        ov[i] = acc
    for i in range(m):
        hist[i] = bv[n + i]
    return out


def sos_init(sos):
    """Transposed direct-form II state pair per biquad section."""
    return np.zeros((len(sos), 2), dtype=np.float64)


def sos_push(sos, state, x):
    """Biquad cascade (b0,b1,b2,1,a1,a2 rows); mutates per-section state."""
    cdef double[:, ::1] sv = np.ascontiguousarray(sos, dtype=np.float64)
    cdef double[:, ::1] zi = state
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.array(x, dtype=np.float64, copy=True)
    cdef double[::1] y = out
    cdef Py_ssize_t nsec = sv.shape[0]
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t s, i
    cdef double b0, b1, b2, a1, a2, s0, s1, xi, yi
    for s in range(nsec):
        b0 = sv[s, 0]; b1 = sv[s, 1]; b2 = sv[s, 2]
        a1 = sv[s, 4]; a2 = sv[s, 5]
        s0 = zi[s, 0]; s1 = zi[s, 1]
        for i in range(n):
            xi = y[i]
            yi = b0 * xi + s0
            s0 = b1 * xi - a1 * yi + s1
            s1 = b2 * xi - a2 * yi
            y[i] = yi
        zi[s, 0] = s0
        zi[s, 1] = s1
    return out


def runmax_init():
    return np.zeros(1, dtype=np.float64)


def runmax_push(state, double lam, x):
    """y[n] = x[n] / m[n] with m[n] = max(|x[n]|, lam * m[n-1]); 0 while m == 0."""
    cdef double[::1] st = state
    x = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = x
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double m = st[0]
    cdef double v, a
    for i in range(n):
        v = xv[i]
        a = fabs(v)
        m = lam * m
        if a > m:
            m = a
        ov[i] = 0.0 if m == 0.0 else v / m
    st[0] = m
    return out
