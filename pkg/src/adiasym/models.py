"""Reference models with closed-form spectra: Grover, transverse Ising, mixed.

These serve as oracles for the numerical machinery in :mod:`adiasym.spectra`
and :mod:`adiasym.evolve`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliOperatorSum, PauliString, uniform_superposition


@dataclass(frozen=True)
class GroverModel:
    n: int
    w: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.w < (1 << self.n):
            raise ValueError("marked state out of range")

    def hamiltonians(self):
        return grover_hamiltonians(self.n, self.w)


@dataclass(frozen=True)
class IsingModel:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("periodic chain needs n >= 2")

    def hamiltonians(self):
        return ising_hamiltonians(self.n)


@dataclass(frozen=True)
class MixedModel:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("periodic chain needs n >= 2")

    def hamiltonians(self):
        return mixed_hamiltonians(self.n)


def grover_hamiltonians(n: int, w: int):
    """``H_I = 1 - |S><S|`` and ``H_F = 1 - |w><w|``."""
    if n < 1:
        raise ValueError("n must be positive")
    dim = 1 << n
    if not 0 <= w < dim:
        raise ValueError(f"marked index {w} outside [0, {dim})")
    marked = np.zeros(dim)
    marked[w] = 1.0
    H_I = PauliOperatorSum(n, [(1.0, "I" * n)], rank1=[(-1.0, uniform_superposition(n))])
    H_F = PauliOperatorSum(n, [(1.0, "I" * n)], rank1=[(-1.0, marked)])
    return H_I, H_F


def grover_gap_analytic(n: int, s: float) -> float:
    return math.sqrt(1.0 - 4.0 * (1.0 - 2.0 ** (-n)) * s * (1.0 - s))


def grover_levels_analytic(n: int, s: float) -> tuple[float, float]:
    g = grover_gap_analytic(n, s)
    return 0.5 * (1.0 - g), 0.5 * (1.0 + g)


def _bonds(n: int):
    # literal periodic sum: for n = 2 both terms are the same bond
    return [(l, (l + 1) % n) for l in range(n)]


def ising_hamiltonians(n: int):
    """``H_I = -sum sigma^x_l`` and ``H_F = -sum sigma^z_l sigma^z_{l+1}`` (periodic)."""
    if n < 2:
        raise ValueError("periodic chain needs n >= 2")
    H_I = PauliOperatorSum(n, [(-1.0, PauliString.single(n, {l: "X"})) for l in range(n)])
    H_F = PauliOperatorSum(n, [(-1.0, PauliString.single(n, {a: "Z", b: "Z"})) for a, b in _bonds(n)])
    return H_I, H_F


def mixed_hamiltonians(n: int):
    """Grover-type initial and shifted Ising final Hamiltonian."""
    if n < 2:
        raise ValueError("periodic chain needs n >= 2")
    H_I, _ = grover_hamiltonians(n, 0)
    terms = [(0.5 * n, "I" * n)]
    terms += [(-0.5, PauliString.single(n, {a: "Z", b: "Z"})) for a, b in _bonds(n)]
    return H_I, PauliOperatorSum(n, terms)


def ising_momenta(n: int) -> np.ndarray:
    """``ka = +-(2m+1) pi / n`` for ``m = 0 .. n/2 - 1`` (even ``n`` only)."""
    if n < 2 or n % 2:
        raise ValueError("momentum grid is defined for even n >= 2 only")
    pos = (2 * np.arange(n // 2) + 1) * math.pi / n
    return np.concatenate([-pos[::-1], pos])


def ising_quasiparticle_energies(n: int, s: float) -> list[tuple[float, float]]:
    """Pairs ``(ka, eps_k)`` with ``eps_k = 2 sqrt(1 - 4 cos^2(ka/2) s (1-s))``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    ka = ising_momenta(n)
    arg = np.clip(1.0 - 4.0 * np.cos(ka / 2.0) ** 2 * s * (1.0 - s), 0.0, None)
    return list(zip(ka.tolist(), (2.0 * np.sqrt(arg)).tolist()))


def ising_even_spectrum(n: int, s: float) -> np.ndarray:
    """Even bit-flip sector levels ``-sum eps/2 + sum_{k in K} eps_k`` with ``|K|`` even."""
    eps = np.array([e for _, e in ising_quasiparticle_energies(n, s)])
    base = -0.5 * eps.sum()
    levels = []
    for occ in itertools.product((0, 1), repeat=n):
        if sum(occ) % 2 == 0:
            levels.append(base + float(np.dot(occ, eps)))
    return np.sort(np.array(levels))


def ising_runtime_estimate_analytic(n: int) -> float:
    """Exact ``sqrt(g''/g^3)`` at ``s = 1/2`` for the lowest even-sector gap.

    The gap is ``2 eps_min`` with ``ka = pi/n``; the result expands as
    ``(2/pi^2) n^2 - 1/12 + O(1/n)``.
    """
    x = math.pi / (2 * n)
    return math.cos(x) / (2.0 * math.sin(x) ** 2)


def grover_runtime_estimate_analytic(n: int) -> float:
    """``sqrt(g''/g^3)`` at ``s = 1/2``: ``2 N sqrt(1 - 1/N)`` with ``N = 2**n``."""
    N = 2.0**n
    return 2.0 * N * math.sqrt(1.0 - 1.0 / N)


def landscape(model: str, n: int, s: float, phi):
    """Energy of the product state ``(cos phi |0> + sin phi |1>)^n`` under ``H(s)``.

    For Grover the marked state is relabelled to ``|1...1>`` first; the
    marked-state overlap then enters as ``sin(phi)**(2n)``.
    """
    phi = np.asarray(phi, dtype=float)
    c, si = np.cos(phi), np.sin(phi)
    if model == "grover":
        out = 1.0 - (1.0 - s) * (c + si) ** (2 * n) / 2.0**n - s * si ** (2 * n)
    elif model == "ising":
        out = n * (-(1.0 - s) * np.sin(2.0 * phi) - s * (c**2 - si**2) ** 2)
    elif model == "mixed":
        out = (1.0 - s) * (1.0 - (c + si) ** (2 * n) / 2.0**n) + 0.5 * n * s * (
            1.0 - (c**2 - si**2) ** 2
        )
    else:
        raise ValueError(f"unknown model {model!r}")
    return float(out) if out.ndim == 0 else out


def local_minima(values: np.ndarray) -> np.ndarray:
    """Indices of strict interior local minima and minimal endpoints of a sampled curve."""
    v = np.asarray(values)
    idx = []
    if v[0] < v[1]:
        idx.append(0)
    inner = np.flatnonzero((v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])) + 1
    idx.extend(inner.tolist())
    if v[-1] < v[-2]:
        idx.append(len(v) - 1)
    return np.array(sorted(set(idx)), dtype=int)


def model_hamiltonians(model: str, n: int, w: int | None = None):
    if model == "grover":
        return grover_hamiltonians(n, (1 << n) - 1 if w is None else w)
    if model == "ising":
        return ising_hamiltonians(n)
    if model == "mixed":
        return mixed_hamiltonians(n)
    raise ValueError(f"unknown model {model!r}")
