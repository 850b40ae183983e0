"""Numpy fallback for the compiled Pauli kernels (same signatures)."""

import numpy as np


def _signs(idx, z):
    return 1 - 2 * (np.bitwise_count(idx & np.uint64(z)) & 1).astype(np.int8)


def apply_pauli(xs, zs, coefs, psi, out):
    """Accumulate ``sum_t coef_t P_t psi`` into ``out`` (gather form)."""
    idx = np.arange(psi.shape[0], dtype=np.uint64)
    for x, z, c in zip(xs, zs, coefs):
        src = idx ^ np.uint64(x)
        if z:
            out += c * _signs(src, z) * psi[src]
        else:
            out += c * psi[src]


def z_diagonal(zs, coefs, dim):
    """Diagonal of ``sum_t c_t Z-string_t`` over the full basis."""
    idx = np.arange(dim, dtype=np.uint64)
    diag = np.zeros(dim, dtype=np.float64)
    for z, c in zip(zs, coefs):
        diag += c * _signs(idx, z)
    return diag
