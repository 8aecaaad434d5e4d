# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Walsh-Hadamard transform and Pauli moment sums.

Same contracts as rksign.kernels._fallback; see that module for the
definitions.  Per-X-mask partial sums are accumulated with Kahan
compensation and reduced with numpy's pairwise sum, so results are
run-to-run identical.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static int POPCOUNT64(unsigned long long x) {
        int c = 0;
        while (x) { x &= x - 1; ++c; }
        return c;
    }
    #endif
    """
    int POPCOUNT64(unsigned long long x) nogil


cdef inline void _wht_f64(double* v, Py_ssize_t dim) nogil:
    cdef Py_ssize_t h = 1, i, j
    cdef double a, b
    while h < dim:
        i = 0
        while i < dim:
            for j in range(i, i + h):
                a = v[j]
                b = v[j + h]
                v[j] = a + b
                v[j + h] = a - b
            i += 2 * h
        h *= 2


cdef inline void _wht_c128(double complex* v, Py_ssize_t dim) nogil:
    cdef Py_ssize_t h = 1, i, j
    cdef double complex a, b
    while h < dim:
        i = 0
        while i < dim:
            for j in range(i, i + h):
                a = v[j]
                b = v[j + h]
                v[j] = a + b
                v[j + h] = a - b
            i += 2 * h
        h *= 2


def wht_inplace_f64(double[::1] v):
    _wht_f64(&v[0], v.shape[0])


def wht_inplace_c128(double complex[::1] v):
    _wht_c128(&v[0], v.shape[0])


def pauli_moment_sums_f64(double[::1] psi, bint skip_odd_y=True):
    """(sum <P>^2, sum <P>^4) for a real state."""
    cdef Py_ssize_t dim = psi.shape[0]
    if dim & (dim - 1):
        raise ValueError("state length is not a power of two")
    cdef cnp.ndarray part2 = np.zeros(dim)
    cdef cnp.ndarray part4 = np.zeros(dim)
    cdef double[::1] p2 = part2
    cdef double[::1] p4 = part4
    cdef double[::1] u = np.empty(dim)
    cdef Py_ssize_t x, s, z
    cdef double w2, s2, c2, s4, c4, y, t
    with nogil:
        for x in range(dim):
            for s in range(dim):
                u[s] = psi[s ^ x] * psi[s]
            _wht_f64(&u[0], dim)
            s2 = 0.0; c2 = 0.0; s4 = 0.0; c4 = 0.0
            for z in range(dim):
                if skip_odd_y and (POPCOUNT64(<unsigned long long> (z & x)) & 1):
                    continue
                w2 = u[z] * u[z]
                # Kahan-compensated accumulation of w2 and w2*w2.
                y = w2 - c2; t = s2 + y; c2 = (t - s2) - y; s2 = t
                y = w2 * w2 - c4; t = s4 + y; c4 = (t - s4) - y; s4 = t
            p2[x] = s2
            p4[x] = s4
    return float(part2.sum()), float(part4.sum())


def pauli_moment_sums_c128(double complex[::1] psi):
    """(sum |<P>|^2, sum |<P>|^4) for a complex state (all strings kept)."""
    cdef Py_ssize_t dim = psi.shape[0]
    if dim & (dim - 1):
        raise ValueError("state length is not a power of two")
    cdef cnp.ndarray part2 = np.zeros(dim)
    cdef cnp.ndarray part4 = np.zeros(dim)
    cdef double[::1] p2 = part2
    cdef double[::1] p4 = part4
    cdef double complex[::1] u = np.empty(dim, dtype=np.complex128)
    cdef Py_ssize_t x, s, z
    cdef double w2, s2, c2, s4, c4, y, t, re, im
    with nogil:
        for x in range(dim):
            for s in range(dim):
                u[s] = psi[s ^ x].conjugate() * psi[s]
            _wht_c128(&u[0], dim)
            s2 = 0.0; c2 = 0.0; s4 = 0.0; c4 = 0.0
            for z in range(dim):
                re = u[z].real; im = u[z].imag
                w2 = re * re + im * im
                y = w2 - c2; t = s2 + y; c2 = (t - s2) - y; s2 = t
                y = w2 * w2 - c4; t = s4 + y; c4 = (t - s4) - y; s4 = t
            p2[x] = s2
            p4[x] = s4
    return float(part2.sum()), float(part4.sum())
