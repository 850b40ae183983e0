# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for Pauli-string operators.

A Pauli string is stored as two bitmasks: ``x`` (letters X or Y) and ``z``
(letters Z or Y).  Acting on the basis state ``|b>`` it gives
``phase * (-1)**popcount(b & z) |b ^ x>`` where the phase ``i**(#Y)`` is
already folded into the coefficient.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

ctypedef fused scalar:
    double
    double complex


def apply_pauli(const uint64_t[::1] xs, const uint64_t[::1] zs,
                const scalar[::1] coefs, const scalar[::1] psi, scalar[::1] out):
    """Accumulate ``sum_t coef_t P_t psi`` into ``out`` (gather form)."""
    cdef Py_ssize_t n_terms = xs.shape[0]
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t t, j
    cdef uint64_t x, z, src
    cdef scalar c
    with nogil:
        for t in range(n_terms):
            x = xs[t]
            z = zs[t]
            c = coefs[t]
            for j in range(dim):
                src = (<uint64_t>j) ^ x
                if __builtin_popcountll(src & z) & 1:
                    out[j] -= c * psi[src]
                else:
                    out[j] += c * psi[src]


def z_diagonal(const uint64_t[::1] zs, const double[::1] coefs, Py_ssize_t dim):
    """Diagonal of ``sum_t c_t Z-string_t`` over the full basis."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] diag = np.zeros(dim, dtype=np.float64)
    cdef double[::1] d = diag
    cdef Py_ssize_t n_terms = zs.shape[0]
    cdef Py_ssize_t t, j
    cdef uint64_t z
    cdef double c
    with nogil:
        for t in range(n_terms):
            z = zs[t]
            c = coefs[t]
            for j in range(dim):
                if __builtin_popcountll((<uint64_t>j) & z) & 1:
                    d[j] -= c
                else:
                    d[j] += c
    return diag
