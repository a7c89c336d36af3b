# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels for Pauli-string linear algebra.

A Pauli string is stored as a pair of bit masks (x, z): bit q of x is set
where X or Y acts on qubit q, bit q of z where Z or Y acts.  Its dense
matrix has one entry per row,

    P[a, a^x] = i**popcount(x & z) * (-1)**popcount((a^x) & z),

so multiplying by exp(-i*theta*P) = cos(theta)*I - i*sin(theta)*P mixes
row pairs (a, a^x) in place.  These loops dominate the runtime of every
product-formula evolution; hamsim._kernels_np holds the numpy fallback
with identical semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

BACKEND = "cython"


cdef inline double complex _i_power(int kappa) nogil:
    kappa &= 3
    if kappa == 0:
        return 1.0 + 0.0j
    if kappa == 1:
        return 1.0j
    if kappa == 2:
        return -1.0 + 0.0j
    return -1.0j


cdef void _apply_diagonal(double complex[:, ::1] u, unsigned long long z,
                          double theta) nogil:
    cdef Py_ssize_t dim = u.shape[0]
    cdef Py_ssize_t a, t
    cdef double complex f_even = cos(theta) - 1.0j * sin(theta)
    cdef double complex f_odd = cos(theta) + 1.0j * sin(theta)
    cdef double complex f
    for a in range(dim):
        f = f_odd if (__builtin_popcountll(a & z) & 1) else f_even
        for t in range(dim):
            u[a, t] = f * u[a, t]


cdef inline void _mix_rows(double complex[:, ::1] u, Py_ssize_t a,
                           Py_ssize_t b, double c, double complex qa,
                           double complex qb) nogil:
    # rows split into interleaved re/im doubles so the loop vectorizes
    cdef double* ra = <double*> &u[a, 0]
    cdef double* rb = <double*> &u[b, 0]
    cdef double qar = qa.real, qai = qa.imag
    cdef double qbr = qb.real, qbi = qb.imag
    cdef double ar, ai, br, bi
    cdef Py_ssize_t t, n2 = 2 * u.shape[1]
    for t in range(0, n2, 2):
        ar = ra[t]; ai = ra[t + 1]
        br = rb[t]; bi = rb[t + 1]
        ra[t] = c * ar + qar * br - qai * bi
        ra[t + 1] = c * ai + qar * bi + qai * br
        rb[t] = c * br + qbr * ar - qbi * ai
        rb[t + 1] = c * bi + qbr * ai + qbi * ar


cdef void _apply_pair_serial(double complex[:, ::1] u, unsigned long long x,
                             unsigned long long z, double theta) nogil:
    cdef Py_ssize_t dim = u.shape[0]
    cdef Py_ssize_t a, b
    cdef double c = cos(theta), s = sin(theta)
    cdef double complex base = _i_power(__builtin_popcountll(x & z))
    cdef double complex pa, pb
    for a in range(dim):
        b = a ^ x
        if b < a:
            continue
        pa = -base if (__builtin_popcountll(b & z) & 1) else base
        pb = -base if (__builtin_popcountll(a & z) & 1) else base
        _mix_rows(u, a, b, c, -1.0j * s * pa, -1.0j * s * pb)


def apply_pauli_exp_sequence(double complex[:, ::1] u not None,
                             unsigned long long[::1] xs not None,
                             unsigned long long[::1] zs not None,
                             double[::1] angles not None):
    """In place, u <- E_0 E_1 ... E_{M-1} u with E_m = exp(-i*angles[m]*P_m).

    The first sequence entry is the leftmost product factor (the one applied
    last to a state), matching the written order of product formulas.
    """
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t dim = u.shape[0]
    if zs.shape[0] != m or angles.shape[0] != m:
        raise ValueError("xs, zs, angles must have equal length")
    if u.shape[1] != dim:
        raise ValueError("u must be square")
    cdef Py_ssize_t i
    with nogil:
        for i in range(m - 1, -1, -1):
            if xs[i] == 0:
                _apply_diagonal(u, zs[i], angles[i])
            else:
                _apply_pair_serial(u, xs[i], zs[i], angles[i])


def accumulate_pauli_terms(double complex[:, ::1] out not None,
                           unsigned long long[::1] xs not None,
                           unsigned long long[::1] zs not None,
                           double[::1] coeffs not None):
    """In place, out += sum_m coeffs[m] * P_m (dense)."""
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t dim = out.shape[0]
    if zs.shape[0] != m or coeffs.shape[0] != m:
        raise ValueError("xs, zs, coeffs must have equal length")
    if out.shape[1] != dim:
        raise ValueError("out must be square")
    cdef Py_ssize_t i, a, b
    cdef unsigned long long x, z
    cdef double complex val, base
    with nogil:
        for i in range(m):
            x = xs[i]
            z = zs[i]
            base = coeffs[i] * _i_power(__builtin_popcountll(x & z))
            for a in range(dim):
                b = a ^ x
                val = -base if (__builtin_popcountll(b & z) & 1) else base
                out[a, b] = out[a, b] + val
