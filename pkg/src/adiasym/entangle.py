"""Bipartite entanglement of chain states: reduced density matrices and entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import StateVector

CLAMP = 1e-14


@dataclass(frozen=True)
class ReducedDensity:
    n1: int  # qubits 0 .. n1-1 are kept
    matrix: np.ndarray


def _full_amplitudes(psi) -> tuple[np.ndarray, int]:
    if isinstance(psi, StateVector):
        vec = psi.full()
        n = psi.n_qubits
    else:
        vec = np.asarray(psi)
        n = int(round(np.log2(vec.size)))
    if vec.size != 1 << n:
        raise ValueError(f"state length {vec.size} is not a power of two")
    return vec, n


def reduced_density(psi, n1: int) -> ReducedDensity:
    """Trace out qubits ``n1 .. n-1``.

    Qubit ``q`` is bit ``q`` of the index, so the amplitude array reshapes to
    ``(2**(n - n1), 2**n1)`` with the kept qubits on the fast axis.
    """
    vec, n = _full_amplitudes(psi)
    if not 1 <= n1 <= n - 1:
        raise ValueError(f"cut n1={n1} must lie in [1, {n - 1}]")
    M = vec.reshape(1 << (n - n1), 1 << n1)
    return ReducedDensity(n1, M.T @ M.conj())


def entropy(rho) -> float:
    """Von Neumann entropy in bits; eigenvalues below ``1e-14`` count as zero."""
    mat = rho.matrix if isinstance(rho, ReducedDensity) else np.asarray(rho)
    lam = np.linalg.eigvalsh(mat)
    lam = lam[lam > CLAMP]
    return float(-np.sum(lam * np.log2(lam)))


def cut_entropies(psi) -> np.ndarray:
    """Entropy for every prefix cut ``n1 = 1 .. n-1``.

    Uses singular values of the reshaped amplitudes, which gives the same
    spectrum as the smaller of the two reduced density matrices.
    """
    vec, n = _full_amplitudes(psi)
    out = np.empty(n - 1)
    for n1 in range(1, n):
        sv = np.linalg.svd(vec.reshape(1 << (n - n1), 1 << n1), compute_uv=False)
        lam = sv**2
        lam = lam[lam > CLAMP]
        out[n1 - 1] = -np.sum(lam * np.log2(lam))
    return out


def chain_average_entropy(psi) -> float:
    """Mean entanglement entropy over all ``n - 1`` prefix cuts."""
    return float(np.mean(cut_entropies(psi)))


def half_chain_entropy(psi) -> float:
    vec, n = _full_amplitudes(psi)
    return entropy(reduced_density(vec, n // 2))
